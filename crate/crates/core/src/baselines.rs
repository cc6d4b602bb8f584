//! Heuristic factuality scores over correct rate `c` and refusal rate `r`, and
//! AUROC of per-question answering frequency against correctness.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// Penalty on incorrect answers in the weighted score.
pub const DEFAULT_PENALTY: f64 = 0.2;
const RATE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineScores {
    pub correct: f64,
    pub refusal: f64,
    /// Correct among answered; `None` when every question was refused.
    pub c_over_a: Option<f64>,
    pub f_score: f64,
    pub weighted: f64,
    pub penalty_p: f64,
}

/// C/A, F-score and the weighted score `c − p·(1 − r)`.
pub fn compute_baselines(c: f64, r: f64, p: f64) -> Result<BaselineScores> {
    check_probability("c", c)?;
    check_probability("r", r)?;
    if !p.is_finite() {
        return Err(Error::Domain { what: "p", value: p, domain: "finite reals" });
    }
    if c > 1.0 - r + RATE_SLACK {
        return Err(Error::Inconsistent(format!(
            "correct rate {c} exceeds the answered share {}",
            1.0 - r
        )));
    }
    let c_over_a = (r < 1.0).then(|| (c / (1.0 - r)).min(1.0));
    Ok(BaselineScores {
        correct: c,
        refusal: r,
        c_over_a,
        f_score: 2.0 * c / (2.0 - r),
        weighted: c - p * (1.0 - r),
        penalty_p: p,
    })
}

/// `1 − N_refusal/N` for each question's `(N, N_refusal)` sample counts.
pub fn p_answering(samples: &[(u64, u64)]) -> Result<Vec<f64>> {
    samples
        .iter()
        .enumerate()
        .map(|(i, &(n, refused))| {
            if n == 0 || refused > n {
                return Err(Error::Inconsistent(format!(
                    "question {i}: {refused} refusals out of {n} samples"
                )));
            }
            Ok(1.0 - refused as f64 / n as f64)
        })
        .collect()
}

/// 1-based ranks with ties sharing their average rank.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Probability that a random (correct, incorrect) pair is ordered correctly by
/// `scores`, ties counting one half. Higher scores are taken to predict
/// correctness.
pub fn auroc(scores: &[f64], correct: &[bool]) -> Result<f64> {
    if scores.len() != correct.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: correct.len() });
    }
    if let Some(&bad) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::Domain { what: "score", value: bad, domain: "non-NaN reals" });
    }
    let positives = correct.iter().filter(|&&c| c).count();
    let negatives = correct.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass("AUROC needs both correct and incorrect questions"));
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(correct).filter(|(_, &c)| c).map(|(r, _)| r).sum();
    let (p, n) = (positives as f64, negatives as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}
