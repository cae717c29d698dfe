//! Naive reimplementations used as test oracles. Nothing here calls into
//! the crate's metric or scoring code paths.

#![allow(dead_code)]

use dialect_audit_core::reference::ReferenceScorer;

fn insertion_sorted(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        let mut i = out.len();
        out.push(v);
        while i > 0 && out[i - 1] > v {
            out[i] = out[i - 1];
            i -= 1;
        }
        out[i] = v;
    }
    out
}

/// Quartile `k/4` by integer rank arithmetic plus linear interpolation.
pub fn quartile(values: &[f64], k: usize) -> f64 {
    let x = insertion_sorted(values);
    let num = (x.len() - 1) * k;
    let lo = num / 4;
    let rem = num % 4;
    if rem == 0 {
        x[lo]
    } else {
        x[lo] + (rem as f64 / 4.0) * (x[lo + 1] - x[lo])
    }
}

pub fn min_max(values: &[f64]) -> (f64, f64) {
    let x = insertion_sorted(values);
    (x[0], x[x.len() - 1])
}

/// Per-point scan over every bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    for &v in values {
        for (i, count) in counts.iter_mut().enumerate() {
            let lo = i as f64 / bins as f64;
            let hi = (i + 1) as f64 / bins as f64;
            let last = i + 1 == bins;
            if lo <= v && (v < hi || (last && v <= hi)) {
                *count += 1;
                break;
            }
        }
    }
    counts
}

pub fn mean(values: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in values {
        s += v;
    }
    s / values.len() as f64
}

/// Fraction of scores strictly above `t`.
pub fn fpr(scores: &[f64], t: f64) -> f64 {
    let mut flagged = 0usize;
    for &s in scores {
        if s > t {
            flagged += 1;
        }
    }
    flagged as f64 / scores.len() as f64
}

/// Closed-form reference score computed by counting each lexicon entry's
/// occurrences among the (truncated) tokens.
pub fn reference_scores(text: &str, bias: f64, max_tokens: usize) -> [f64; 6] {
    let folded: String = text.chars().map(|c| if c == '\u{2019}' { '\'' } else { c }).collect();
    let tokens: Vec<String> = folded
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .take(max_tokens)
        .map(|t| t.chars().flat_map(char::to_lowercase).collect())
        .collect();
    let mut out = [0.0; 6];
    for (label, slot) in out.iter_mut().enumerate() {
        let mut logit = bias;
        for (entry, weights) in ReferenceScorer::lexicon() {
            let hits = tokens.iter().filter(|t| t.as_str() == *entry).count();
            logit += hits as f64 * weights[label];
        }
        *slot = 1.0 / (1.0 + (-logit).exp());
    }
    out
}

/// Reference Fisher-Yates: for i from n-1 down to 1, swap i with a uniform
/// draw from 0..=i taken by rejection on ChaCha8 u64 output.
pub fn seeded_permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut i = n;
    while i > 1 {
        i -= 1;
        let bound = (i + 1) as u128;
        let zone = (1u128 << 64) - ((1u128 << 64) % bound);
        let j = loop {
            let x = rng.next_u64() as u128;
            if x < zone {
                break (x % bound) as usize;
            }
        };
        idx.swap(i, j);
    }
    idx
}
