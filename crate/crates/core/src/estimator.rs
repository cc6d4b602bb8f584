//! Refusal Index estimation from two-pass evaluation outcomes.
//!
//! The pass-1 refusal indicator `R` and the aggregated incorrectness `Ŵ`
//! (second-pass grade where pass 1 refused, first-pass grade otherwise) are
//! modeled as thresholded coordinates of a bivariate normal vector. The
//! tetrachoric correlation `ρ̂` is the maximum-likelihood fit of a Gaussian
//! copula to the 2×2 table of `(R, Ŵ)`; the index itself is the implied
//! Spearman correlation `(6/π)·asin(ρ̂/2)`.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copulas::{fit_copula, ContingencyCounts, CopulaFamily, CopulaParams};
use crate::error::{check_probability, Error, Result};
use crate::ingest::JoinedOutcome;

/// Number of bootstrap replicates used when none is given.
pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Largest adjustment the refused-subset error rate may need before the
/// summary is rejected as contradictory.
pub const MAX_CLIP_ADJUSTMENT: f64 = 0.05;

/// Integer tallies behind a [`TwoPassSummary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TwoPassTally {
    pub n: u64,
    pub correct_first: u64,
    pub incorrect_first: u64,
    pub refused: u64,
    /// Refused in pass 1 and answered correctly in pass 2.
    pub refused_then_correct: u64,
    /// Refused in pass 1 and answered incorrectly in pass 2.
    pub refused_then_incorrect: u64,
}

impl TwoPassTally {
    pub(crate) fn add(&mut self, o: &JoinedOutcome) {
        self.n += 1;
        if o.refused() {
            self.refused += 1;
            if o.w_hat {
                self.refused_then_incorrect += 1;
            } else {
                self.refused_then_correct += 1;
            }
        } else if o.correct_first_pass() {
            self.correct_first += 1;
        } else {
            self.incorrect_first += 1;
        }
    }

    /// Direct cross-tabulation of `(R, Ŵ)`.
    pub fn contingency(&self) -> ContingencyCounts {
        ContingencyCounts::new(
            self.correct_first,
            self.incorrect_first,
            self.refused_then_correct,
            self.refused_then_incorrect,
        )
    }

    pub fn summary(&self) -> Result<TwoPassSummary> {
        if self.n == 0 {
            return Err(Error::Empty("no questions"));
        }
        let n = self.n as f64;
        TwoPassSummary::new(
            self.n,
            self.correct_first as f64 / n,
            self.refused as f64 / n,
            (self.correct_first + self.refused_then_correct) as f64 / n,
        )
    }
}

/// Aggregate two-pass statistics, the estimator's input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPassSummary {
    /// Number of questions.
    pub n: u64,
    /// First-pass correct rate over all questions.
    pub c1: f64,
    /// First-pass refusal rate.
    pub r: f64,
    /// Accuracy under the aggregated indicator: pass-1 grades where answered,
    /// pass-2 grades where refused.
    pub c2: f64,
}

impl TwoPassSummary {
    pub fn new(n: u64, c1: f64, r: f64, c2: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("summary over zero questions"));
        }
        check_probability("c1", c1)?;
        check_probability("r", r)?;
        check_probability("c2", c2)?;
        const SLACK: f64 = 1e-9;
        if c1 > 1.0 - r + SLACK {
            return Err(Error::Inconsistent(format!(
                "correct rate {c1} exceeds the answered share {}",
                1.0 - r
            )));
        }
        if c1 > c2 + r + SLACK {
            return Err(Error::Inconsistent(format!(
                "first-pass correct rate {c1} exceeds aggregated accuracy {c2} plus refusal rate {r}"
            )));
        }
        Ok(TwoPassSummary { n, c1, r, c2 })
    }

    /// Aggregated error rate `μ = 1 − c2`.
    pub fn error_rate(&self) -> f64 {
        1.0 - self.c2
    }
}

/// Tallies joined outcomes.
pub fn tally(outcomes: &[JoinedOutcome]) -> Result<TwoPassTally> {
    let mut seen = HashSet::with_capacity(outcomes.len());
    let mut missing = Vec::new();
    let mut t = TwoPassTally::default();
    for o in outcomes {
        if !seen.insert(o.question_id.as_str()) {
            return Err(Error::DuplicateQuestion(o.question_id.clone()));
        }
        if o.refused() && o.pass2.is_none() {
            missing.push(o.question_id.clone());
        }
        t.add(o);
    }
    if !missing.is_empty() {
        return Err(Error::MissingSecondPass(missing));
    }
    if t.n == 0 {
        return Err(Error::Empty("no questions"));
    }
    Ok(t)
}

/// Aggregates joined per-question outcomes into a [`TwoPassSummary`].
pub fn summarize_two_pass(outcomes: &[JoinedOutcome]) -> Result<TwoPassSummary> {
    tally(outcomes)?.summary()
}

fn round_half_even(x: f64) -> u64 {
    x.round_ties_even().max(0.0) as u64
}

/// Reconstructs the `(R, Ŵ)` table from aggregate rates.
///
/// The error rate among answered questions is `1 − c1/(1−r)`; the error rate
/// among refused questions follows from the aggregate `μ = 1 − c2`. The
/// refused count is rounded first, then each cell, half-to-even.
pub fn counts_from_summary(s: &TwoPassSummary) -> Result<ContingencyCounts> {
    if !(s.r > 0.0 && s.r < 1.0) {
        return Err(Error::DegenerateMargin(format!("refusal rate {} must lie in (0, 1)", s.r)));
    }
    let mu = s.error_rate();
    let acc_answered = (s.c1 / (1.0 - s.r).max(1e-12)).clamp(0.0, 1.0);
    let mu_answered = 1.0 - acc_answered;
    let raw = (mu - (1.0 - s.r) * mu_answered) / s.r;
    let mu_refused = raw.clamp(0.0, 1.0);
    if (raw - mu_refused).abs() > MAX_CLIP_ADJUSTMENT {
        return Err(Error::Inconsistent(format!(
            "implied error rate among refused questions is {raw:.4}, outside [0, 1]"
        )));
    }
    let n = s.n;
    let n_refused = round_half_even(n as f64 * s.r).min(n);
    let n_answered = n - n_refused;
    let n11 = round_half_even(n_refused as f64 * mu_refused).min(n_refused);
    let n01 = round_half_even(n_answered as f64 * mu_answered).min(n_answered);
    Ok(ContingencyCounts::new(n_answered - n01, n01, n_refused - n11, n11))
}

/// Spearman correlation implied by a Gaussian copula with correlation `rho`.
pub fn rho_to_spearman(rho: f64) -> Result<f64> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::Domain { what: "rho", value: rho, domain: "[-1, 1]" });
    }
    Ok((6.0 * (rho / 2.0).asin() / PI).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiEstimate {
    /// Tetrachoric correlation.
    pub rho: f64,
    /// Refusal Index.
    pub ri: f64,
    /// A margin was 0 or 1, so no association can be estimated; `ri` is 0.
    pub degenerate: bool,
    /// `rho` sits on the edge of the search interval.
    pub at_boundary: bool,
    pub ci: Option<ConfidenceInterval>,
}

impl RiEstimate {
    fn degenerate() -> Self {
        RiEstimate { rho: 0.0, ri: 0.0, degenerate: true, at_boundary: false, ci: None }
    }
}

/// Estimates the Refusal Index from a two-pass summary.
///
/// A refusal rate (or aggregated error rate) of exactly 0 or 1 leaves the
/// association unidentified; such summaries yield `ri = 0` with the
/// `degenerate` flag set.
pub fn estimate_ri(s: &TwoPassSummary) -> Result<RiEstimate> {
    let mu = s.error_rate();
    if s.r <= 0.0 || s.r >= 1.0 || mu <= 0.0 || mu >= 1.0 {
        return Ok(RiEstimate::degenerate());
    }
    let counts = counts_from_summary(s)?;
    estimate_from_counts(&counts)
}

/// Gaussian-copula fit on an explicit `(R, Ŵ)` table.
pub fn estimate_from_counts(counts: &ContingencyCounts) -> Result<RiEstimate> {
    let fit = match fit_copula(counts, CopulaFamily::Gaussian) {
        Ok(fit) => fit,
        Err(Error::DegenerateMargin(_)) => return Ok(RiEstimate::degenerate()),
        Err(e) => return Err(e),
    };
    let CopulaParams::Gaussian { rho } = fit.params else {
        unreachable!("gaussian fit returns gaussian parameters")
    };
    Ok(RiEstimate {
        rho,
        ri: rho_to_spearman(rho)?,
        degenerate: false,
        at_boundary: fit.at_boundary,
        ci: None,
    })
}

/// Summary and estimate from joined outcomes in one step.
pub fn estimate_from_outcomes(outcomes: &[JoinedOutcome]) -> Result<(TwoPassSummary, RiEstimate)> {
    let summary = summarize_two_pass(outcomes)?;
    Ok((summary, estimate_ri(&summary)?))
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// RNG for stream `index` of a seeded family; streams are independent of
/// evaluation order.
pub(crate) fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Percentile bootstrap interval for the Refusal Index.
///
/// Questions are resampled with replacement (both passes together), `b` times.
/// Degenerate resamples contribute `ri = 0`. Replicate `i` draws from its own
/// RNG stream derived from `(seed, i)`, so the result does not depend on
/// thread scheduling.
pub fn bootstrap_ci(
    outcomes: &[JoinedOutcome],
    b: usize,
    level: f64,
    seed: u64,
) -> Result<ConfidenceInterval> {
    if outcomes.is_empty() {
        return Err(Error::Empty("no outcomes to resample"));
    }
    if b == 0 {
        return Err(Error::Domain { what: "bootstrap replicates", value: 0.0, domain: "≥ 1" });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain { what: "level", value: level, domain: "(0, 1)" });
    }
    // validates duplicates and missing pass-2 outcomes once, up front
    tally(outcomes)?;
    let n = outcomes.len();
    let mut ris = (0..b as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let mut t = TwoPassTally::default();
            for _ in 0..n {
                t.add(&outcomes[rng.random_range(0..n)]);
            }
            let est = estimate_ri(&t.summary()?)?;
            Ok(est.ri)
        })
        .collect::<Result<Vec<f64>>>()?;
    ris.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    Ok(ConfidenceInterval {
        lo: sorted_quantile(&ris, alpha / 2.0),
        hi: sorted_quantile(&ris, 1.0 - alpha / 2.0),
        level,
    })
}
