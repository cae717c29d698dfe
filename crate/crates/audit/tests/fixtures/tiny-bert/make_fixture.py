"""Regenerates the tiny randomly initialised BERT classifier used to test the
ONNX backend, plus golden scores computed by PyTorch.

    python3 make_fixture.py

Requires torch, transformers and onnx. Output is deterministic for a fixed
torch version.
"""

import json
import os

import torch
from tokenizers import Tokenizer, normalizers, pre_tokenizers, processors
from tokenizers.models import WordPiece
from transformers import BertConfig, BertForSequenceClassification

HERE = os.path.dirname(os.path.abspath(__file__))
LABELS = ["toxic", "severe_toxic", "obscene", "threat", "insult", "identity_hate"]

WORDS = """
a am and anyone at be bothering christian did done finished guy gun he homework
i is lady library mean muslim my nobody not on pointing say she studying that the
to dat ain't always working late fridays have already idiot you kill so what
""".split()
PIECES = ["##s", "##ing", "##ed", "##t", "##n", "'", ".", ",", "!", "?"]

class Exportable(torch.nn.Module):
    """Runs the classifier with an explicit additive attention mask so the
    exported graph avoids the data-dependent mask construction."""

    def __init__(self, model):
        super().__init__()
        self.model = model

    def forward(self, input_ids, attention_mask, token_type_ids):
        bert = self.model.bert
        mask = (1.0 - attention_mask[:, None, None, :].float()) * -10000.0
        h = bert.embeddings(input_ids=input_ids, token_type_ids=token_type_ids)
        for layer in bert.encoder.layer:
            h = layer(h, attention_mask=mask)
        return self.model.classifier(bert.pooler(h))


SENTENCES = [
    ("That Christian guy is pointing a gun at that lady.", 64),
    ("That Muslim guy is pointing a gun at that lady.", 64),
    ("She is at the library studying.", 64),
    ("She at the library studying.", 64),
    ("I ain't bothering nobody.", 64),
    ("Unknown zebra words get UNK tokens!", 64),
    ("I did not mean to say dat so what you idiot, he is always working late on fridays.", 8),
]


def main():
    torch.manual_seed(0)
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + sorted(set(WORDS)) + PIECES
    tokenizer = Tokenizer(WordPiece({t: i for i, t in enumerate(vocab)}, unk_token="[UNK]"))
    tokenizer.normalizer = normalizers.BertNormalizer(lowercase=True)
    tokenizer.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tokenizer.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        special_tokens=[("[CLS]", 2), ("[SEP]", 3)],
    )
    tokenizer.save(os.path.join(HERE, "tokenizer.json"))

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
        num_labels=6,
        id2label=dict(enumerate(LABELS)),
        label2id={l: i for i, l in enumerate(LABELS)},
        problem_type="multi_label_classification",
        attn_implementation="eager",
        initializer_range=0.5,
    )
    model = BertForSequenceClassification(config).eval()
    # random init leaves logits near zero; spread them out
    with torch.no_grad():
        model.classifier.weight.mul_(2.0)
        model.classifier.bias.copy_(torch.linspace(-2.0, 2.0, 6))

    wrapped = Exportable(model).eval()

    def encode(text, max_tokens):
        tokenizer.enable_truncation(max_tokens)
        enc = tokenizer.encode(text)
        return {
            "input_ids": torch.tensor([enc.ids]),
            "attention_mask": torch.tensor([enc.attention_mask]),
            "token_type_ids": torch.tensor([enc.type_ids]),
        }

    sample = encode("that lady", 64)
    torch.onnx.export(
        wrapped,
        (sample["input_ids"], sample["attention_mask"], sample["token_type_ids"]),
        os.path.join(HERE, "model.onnx"),
        input_names=["input_ids", "attention_mask", "token_type_ids"],
        output_names=["logits"],
        dynamic_axes={
            "input_ids": {0: "batch", 1: "sequence"},
            "attention_mask": {0: "batch", 1: "sequence"},
            "token_type_ids": {0: "batch", 1: "sequence"},
            "logits": {0: "batch"},
        },
        opset_version=14,
        dynamo=False,
    )

    fixtures = []
    for text, max_tokens in SENTENCES:
        enc = encode(text, max_tokens)
        with torch.no_grad():
            reference = model(**enc).logits[0]
            logits = wrapped(enc["input_ids"], enc["attention_mask"], enc["token_type_ids"])[0]
        assert torch.allclose(reference, logits, atol=1e-5), text
        probs = torch.sigmoid(logits.double()).tolist()
        fixtures.append({
            "text": text,
            "max_tokens": max_tokens,
            "token_count": int(enc["input_ids"].shape[1]),
            "scores": {
                "toxicity": probs[0],
                "severe_toxicity": probs[1],
                "obscene": probs[2],
                "threat": probs[3],
                "insult": probs[4],
                "identity_attack": probs[5],
            },
        })
    with open(os.path.join(HERE, "golden.json"), "w") as f:
        json.dump({"tolerance": 1e-4, "fixtures": fixtures}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
