"""Exports a BERT sequence classifier (e.g. unitary/toxic-bert) to ONNX in
the form the `onnx` backend loads.

    python3 scripts/export_model.py unitary/toxic-bert models/toxic-bert

Writes model.onnx and tokenizer.json into the output directory. The
attention mask is applied as an explicit additive term because tract cannot
evaluate the mask construction emitted by recent transformers releases.

Requires torch and transformers.
"""

import argparse
import os

import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer


class Exportable(torch.nn.Module):
    def __init__(self, model):
        super().__init__()
        self.model = model

    def forward(self, input_ids, attention_mask, token_type_ids):
        bert = self.model.bert
        mask = (1.0 - attention_mask[:, None, None, :].float()) * -10000.0
        h = bert.embeddings(input_ids=input_ids, token_type_ids=token_type_ids)
        for layer in bert.encoder.layer:
            out = layer(h, attention_mask=mask)
            h = out[0] if isinstance(out, tuple) else out
        return self.model.classifier(bert.pooler(h))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("checkpoint")
    parser.add_argument("output")
    parser.add_argument("--opset", type=int, default=14)
    args = parser.parse_args()

    os.makedirs(args.output, exist_ok=True)
    tokenizer = AutoTokenizer.from_pretrained(args.checkpoint)
    model = AutoModelForSequenceClassification.from_pretrained(
        args.checkpoint, attn_implementation="eager"
    ).eval()
    wrapped = Exportable(model).eval()

    sample = tokenizer("that lady is at the library", return_tensors="pt")
    if "token_type_ids" not in sample:
        sample["token_type_ids"] = torch.zeros_like(sample["input_ids"])
    inputs = (sample["input_ids"], sample["attention_mask"], sample["token_type_ids"])
    with torch.no_grad():
        expected = model(**sample).logits
        got = wrapped(*inputs)
    if not torch.allclose(expected, got, atol=1e-4):
        raise SystemExit("wrapped model disagrees with the original; refusing to export")

    names = ["input_ids", "attention_mask", "token_type_ids"]
    torch.onnx.export(
        wrapped,
        inputs,
        os.path.join(args.output, "model.onnx"),
        input_names=names,
        output_names=["logits"],
        dynamic_axes={**{n: {0: "batch", 1: "sequence"} for n in names}, "logits": {0: "batch"}},
        opset_version=args.opset,
        dynamo=False,
    )
    tokenizer.backend_tokenizer.save(os.path.join(args.output, "tokenizer.json"))
    print("labels:", [model.config.id2label[i] for i in range(model.config.num_labels)])


if __name__ == "__main__":
    main()
