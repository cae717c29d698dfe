mod support;

use dialect_audit_core::labels::PerLabel;
use dialect_audit_core::metrics::{self, means_of, ThresholdGrid};
use dialect_audit_core::reference::ReferenceScorer;
use dialect_audit_core::sample;
use dialect_audit_core::{
    box_stats, flip_interval, fpr_curve, group_means, histogram, DialectGroup, LabelScores, Post,
    ScoredPost, Scorer, ThresholdPolicy, Verdict,
};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracle;

const TOL: f64 = 1e-12;

/// Calls `f` on every non-decreasing sequence of grid indices `0..=20`
/// of length `1..=max_len`.
fn for_each_multiset(max_len: usize, mut f: impl FnMut(&[f64])) {
    fn rec(buf: &mut Vec<usize>, start: usize, max_len: usize, f: &mut dyn FnMut(&[f64])) {
        if !buf.is_empty() {
            let values: Vec<f64> = buf.iter().map(|&k| k as f64 * 0.05).collect();
            f(&values);
        }
        if buf.len() == max_len {
            return;
        }
        for k in start..=20 {
            buf.push(k);
            rec(buf, k, max_len, f);
            buf.pop();
        }
    }
    rec(&mut Vec::new(), 0, max_len, &mut f);
}

#[test]
fn quartiles_match_oracle_exhaustively() {
    let mut checked = 0usize;
    for_each_multiset(8, |values| {
        // feed descending order so the implementation's sort is exercised
        let reversed: Vec<f64> = values.iter().rev().copied().collect();
        let b = box_stats(&reversed).unwrap();
        assert!((b.q1 - oracle::quartile(values, 1)).abs() < TOL, "{values:?}");
        assert!((b.median - oracle::quartile(values, 2)).abs() < TOL, "{values:?}");
        assert!((b.q3 - oracle::quartile(values, 3)).abs() < TOL, "{values:?}");
        assert_eq!((b.min, b.max), oracle::min_max(values));
        checked += 1;
    });
    // C(28, 8) + ... + C(21, 1): all multisets of size 1..=8 over 21 values
    assert_eq!(checked, 4_292_144);
}

#[test]
fn histograms_and_means_match_oracle_exhaustively() {
    for_each_multiset(6, |values| {
        for bins in [1, 3, 7, 20] {
            let h = histogram(values, bins).unwrap();
            assert_eq!(h.counts, oracle::histogram(values, bins), "{values:?} bins={bins}");
        }
        let rows: Vec<LabelScores> = values.iter().map(|&v| PerLabel::from_fn(|_| v)).collect();
        let m = means_of(&rows, DialectGroup::Aae).unwrap();
        assert!((m.means.toxicity - oracle::mean(values)).abs() < TOL);
    });
}

#[test]
fn seven_random_values_quartiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let values: Vec<f64> = (0..7).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).collect();
    let b = box_stats(&values).unwrap();
    assert!((b.q1 - oracle::quartile(&values, 1)).abs() < TOL);
    assert!((b.median - oracle::quartile(&values, 2)).abs() < TOL);
    assert!((b.q3 - oracle::quartile(&values, 3)).abs() < TOL);
}

fn reference_corpus(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon = ReferenceScorer::lexicon();
    let filler = ["the", "a", "today", "we", "went", "out", "lol", "really", "it's", "so"];
    (0..n)
        .map(|_| {
            let len = 1 + (rng.next_u64() % 12) as usize;
            let words: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.next_u64() % 4 == 0 {
                        lexicon[(rng.next_u64() % lexicon.len() as u64) as usize].0
                    } else {
                        filler[(rng.next_u64() % filler.len() as u64) as usize]
                    }
                })
                .collect();
            words.join(" ")
        })
        .collect()
}

#[test]
fn reference_scorer_matches_closed_form() {
    let scorer = ReferenceScorer::default();
    let mut texts = reference_corpus(300, 11);
    texts.push("That Muslim guy is pointing a gun at that lady.".into());
    texts.push("IDIOT!!! you STUPID idiot\u{2019}s... 'gun'".into());
    for text in &texts {
        let got = scorer.score(text).unwrap().to_array();
        let want = oracle::reference_scores(text, -4.0, 512);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < TOL, "{text}: {got:?} vs {want:?}");
        }
    }
    let short = ReferenceScorer::new(-2.5, 3);
    let text = "gun gun gun gun kill";
    let got = short.score(text).unwrap().to_array();
    let want = oracle::reference_scores(text, -2.5, 3);
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < TOL);
    }
}

#[test]
fn fpr_on_reference_scores_matches_counting_loop() {
    let scorer = ReferenceScorer::default();
    let texts = reference_corpus(200, 5);
    let scores: Vec<f64> = texts.iter().map(|t| scorer.score(t).unwrap().toxicity).collect();
    let grid = ThresholdGrid::default().points();
    let curve = fpr_curve(&scores, &grid).unwrap();
    for (t, f) in curve.thresholds.iter().zip(&curve.fpr) {
        assert_eq!(*f, oracle::fpr(&scores, *t));
    }
}

#[test]
fn histogram_of_reference_scores_matches_naive_binning() {
    let scorer = ReferenceScorer::default();
    let texts = reference_corpus(1000, 9);
    let scores: Vec<f64> = texts.iter().map(|t| scorer.score(t).unwrap().toxicity).collect();
    let h = histogram(&scores, 50).unwrap();
    assert_eq!(h.counts.iter().sum::<u64>(), 1000);
    assert_eq!(h.counts, oracle::histogram(&scores, 50));
}

#[test]
fn four_post_means_equal_brute_force_sum() {
    let scorer = ReferenceScorer::default();
    let texts = [
        "I ain't bothering nobody.",
        "you idiot",
        "That Muslim guy is pointing a gun at that lady.",
        "She at the library studying.",
    ];
    let scored: Vec<ScoredPost> = texts
        .iter()
        .map(|t| ScoredPost {
            post: Post::new(t, 0.9, 0.05).unwrap(),
            scores: scorer.score(t).unwrap(),
        })
        .collect();
    let means = group_means(&scored, DialectGroup::Aae).unwrap();
    for label in dialect_audit_core::Label::ALL {
        let by_hand: f64 = texts
            .iter()
            .map(|t| oracle::reference_scores(t, -4.0, 512)[label.index()])
            .sum::<f64>()
            / 4.0;
        assert!((means.means.get(label) - by_hand).abs() < TOL, "{label}");
    }
}

#[test]
fn flip_interval_matches_randomized_verdict_pairs() {
    let interval = flip_interval(0.2, 0.9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut thresholds: Vec<f64> =
        (0..1000).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).collect();
    thresholds.extend([0.2, 0.9, 0.0, 1.0]);
    for t in thresholds {
        let policy = ThresholdPolicy::new(t).unwrap();
        let disagree = Verdict::for_score(0.2, policy) != Verdict::for_score(0.9, policy);
        assert_eq!(disagree, (0.2..0.9).contains(&t), "t={t}");
        assert_eq!(disagree, interval.contains(t));
    }
}

#[test]
fn shuffle_matches_reference_fisher_yates() {
    for (n, seed) in [(0, 1), (1, 1), (2, 9), (20, 42), (1000, 123456789)] {
        let mut items: Vec<usize> = (0..n).collect();
        sample::shuffle(&mut items, seed);
        assert_eq!(items, oracle::seeded_permutation(n, seed), "n={n} seed={seed}");
    }
}

#[test]
fn shuffle_output_is_frozen() {
    // Captured from the reference Fisher-Yates; guards against generator
    // or algorithm drift across platforms and dependency upgrades.
    let mut items: Vec<usize> = (0..7).collect();
    sample::shuffle(&mut items, 42);
    assert_eq!(items, FROZEN_SEED_42_OF_7);
}

const FROZEN_SEED_42_OF_7: [usize; 7] = [1, 6, 3, 2, 0, 4, 5];

#[test]
fn quantile_helper_agrees_with_box_stats() {
    let v = [0.9, 0.1, 0.5, 0.3];
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(metrics::quantile_sorted(&sorted, 0.5), box_stats(&v).unwrap().median);
}
