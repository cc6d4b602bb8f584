//! Latent bivariate-normal generator of two-pass outcomes, plus the
//! refusal-rate sweep and subset coefficient-of-variation protocols built on
//! it.
//!
//! Question `i` draws `(z_r, z_w)` with correlation `ρ` from its own RNG
//! stream; it is refused in pass 1 when `z_r > τ_r` and wrong when `z_w > τ_w`.

use std::fmt;

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{compute_baselines, BaselineScores};
use crate::error::{check_correlation, Error, Result};
use crate::estimator::{estimate_ri, stream_rng, tally, RiEstimate, TwoPassSummary, TwoPassTally};
use crate::ingest::{GradeLabel, JoinedOutcome, QuestionRecord};
use crate::numerics::{std_normal_cdf, std_normal_quantile};

pub const SIM_MODEL: &str = "sim";
pub const SIM_SETTING: &str = "s0";
/// Metric means closer to zero than this make their CV unreliable.
pub const UNSTABLE_MEAN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentModel {
    pub rho: f64,
    pub tau_r: f64,
    pub tau_w: f64,
}

impl LatentModel {
    pub fn new(rho: f64, tau_r: f64, tau_w: f64) -> Result<Self> {
        check_correlation(rho)?;
        for (what, tau) in [("tau_r", tau_r), ("tau_w", tau_w)] {
            if !tau.is_finite() {
                return Err(Error::Domain { what, value: tau, domain: "finite reals" });
            }
        }
        Ok(LatentModel { rho, tau_r, tau_w })
    }

    /// Model with pass-1 refusal rate `refusal` and aggregated error rate `error`.
    pub fn from_rates(rho: f64, refusal: f64, error: f64) -> Result<Self> {
        for (what, p) in [("refusal rate", refusal), ("error rate", error)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Domain { what, value: p, domain: "(0, 1)" });
            }
        }
        LatentModel::new(rho, std_normal_quantile(1.0 - refusal)?, std_normal_quantile(1.0 - error)?)
    }

    pub fn refusal_rate(&self) -> f64 {
        1.0 - std_normal_cdf(self.tau_r)
    }

    pub fn error_rate(&self) -> f64 {
        1.0 - std_normal_cdf(self.tau_w)
    }

    fn draw(&self, seed: u64, i: u64) -> (bool, bool) {
        let mut rng = stream_rng(seed, i);
        let z_r: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        let z_w = self.rho * z_r + (1.0 - self.rho * self.rho).sqrt() * e;
        (z_r > self.tau_r, z_w > self.tau_w)
    }
}

fn question_id(i: usize) -> String {
    format!("q{i}")
}

/// Joined outcomes for `n` simulated questions, in question order.
pub fn sample_outcomes(model: &LatentModel, n: usize, seed: u64) -> Result<Vec<JoinedOutcome>> {
    if n == 0 {
        return Err(Error::Empty("simulate at least one question"));
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let (refused, wrong) = model.draw(seed, i as u64);
            let graded = if wrong { GradeLabel::Incorrect } else { GradeLabel::Correct };
            if refused {
                JoinedOutcome::new(question_id(i), GradeLabel::Refused, Some(graded))
            } else {
                JoinedOutcome::new(question_id(i), graded, None)
            }
        })
        .collect())
}

/// Records for both passes: each question's pass-1 record, followed by its
/// pass-2 record when pass 1 refused.
pub fn sample_two_pass(model: &LatentModel, n: usize, seed: u64) -> Result<Vec<QuestionRecord>> {
    let outcomes = sample_outcomes(model, n, seed)?;
    let record = |o: &JoinedOutcome, pass, label| QuestionRecord {
        question_id: o.question_id.clone(),
        model_id: SIM_MODEL.to_string(),
        setting_id: SIM_SETTING.to_string(),
        pass,
        label,
    };
    let mut records = Vec::with_capacity(n + n / 2);
    for o in &outcomes {
        records.push(record(o, 1, o.pass1));
        if let Some(label) = o.pass2 {
            records.push(record(o, 2, label));
        }
    }
    Ok(records)
}

/// Every metric tracked across settings or subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Ri,
    CorrectOverAttempted,
    FScore,
    Weighted,
    Correct,
    Refusal,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Ri,
        Metric::CorrectOverAttempted,
        Metric::FScore,
        Metric::Weighted,
        Metric::Correct,
        Metric::Refusal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ri => "ri",
            Metric::CorrectOverAttempted => "c-over-a",
            Metric::FScore => "f-score",
            Metric::Weighted => "weighted",
            Metric::Correct => "correct",
            Metric::Refusal => "refusal",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Summary, estimate and heuristic scores for one evaluated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub summary: TwoPassSummary,
    pub estimate: RiEstimate,
    pub baselines: BaselineScores,
}

impl Evaluation {
    pub fn from_tally(t: &TwoPassTally, p: f64) -> Result<Self> {
        let summary = t.summary()?;
        Ok(Evaluation {
            summary,
            estimate: estimate_ri(&summary)?,
            baselines: compute_baselines(summary.c1, summary.r, p)?,
        })
    }

    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Ri => Some(self.estimate.ri),
            Metric::CorrectOverAttempted => self.baselines.c_over_a,
            Metric::FScore => Some(self.baselines.f_score),
            Metric::Weighted => Some(self.baselines.weighted),
            Metric::Correct => Some(self.baselines.correct),
            Metric::Refusal => Some(self.baselines.refusal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCv {
    pub metric: Metric,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// `std / |mean|`; absent when the mean is zero with nonzero spread, or
    /// when the metric was undefined for some sample.
    pub cv: Option<f64>,
    /// The mean is too close to zero for the CV to be meaningful.
    pub unstable: bool,
}

fn metric_cv(metric: Metric, values: &[Option<f64>]) -> MetricCv {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.len() != values.len() || present.is_empty() {
        return MetricCv { metric, mean: f64::NAN, std: f64::NAN, cv: None, unstable: true };
    }
    let k = present.len() as f64;
    let mean = present.iter().sum::<f64>() / k;
    let std = (present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k).sqrt();
    let cv = if std == 0.0 {
        Some(0.0)
    } else if mean == 0.0 {
        None
    } else {
        Some(std / mean.abs())
    };
    MetricCv { metric, mean, std, cv, unstable: mean.abs() < UNSTABLE_MEAN }
}

/// CV of every metric across a set of evaluations.
pub fn metric_cvs(evaluations: &[Evaluation]) -> Vec<MetricCv> {
    Metric::ALL
        .iter()
        .map(|&m| metric_cv(m, &evaluations.iter().map(|e| e.metric(m)).collect::<Vec<_>>()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSetting {
    pub target_refusal: f64,
    #[serde(flatten)]
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rho: f64,
    pub error_rate: f64,
    pub n: usize,
    pub seed: u64,
    pub settings: Vec<SweepSetting>,
    pub cv: Vec<MetricCv>,
}

/// Simulates the same `n` questions at several refusal tendencies.
///
/// All settings share `ρ`, the error rate `mu` and the latent draws (the same
/// seed), so only the refusal threshold moves between settings.
pub fn refusal_sweep(rho: f64, mu: f64, rates: &[f64], n: usize, seed: u64, p: f64) -> Result<SweepReport> {
    if rates.is_empty() {
        return Err(Error::Empty("no refusal rates to sweep"));
    }
    let settings = rates
        .iter()
        .map(|&rate| {
            let model = LatentModel::from_rates(rho, rate, mu)?;
            let t = tally(&sample_outcomes(&model, n, seed)?)?;
            Ok(SweepSetting { target_refusal: rate, evaluation: Evaluation::from_tally(&t, p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let evaluations: Vec<Evaluation> = settings.iter().map(|s| s.evaluation.clone()).collect();
    Ok(SweepReport { rho, error_rate: mu, n, seed, cv: metric_cvs(&evaluations), settings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetCvRow {
    pub size: usize,
    pub subsets: usize,
    pub cv: Vec<MetricCv>,
}

impl SubsetCvRow {
    pub fn get(&self, m: Metric) -> Option<&MetricCv> {
        self.cv.iter().find(|c| c.metric == m)
    }
}

/// For each size, draws `k` subsets without replacement and reports each
/// metric's CV across them. Subset `j` of the `s`-th size uses RNG stream
/// `(s << 32) | j`.
pub fn subset_cv(
    outcomes: &[JoinedOutcome],
    sizes: &[usize],
    k: usize,
    seed: u64,
    p: f64,
) -> Result<Vec<SubsetCvRow>> {
    if k < 2 {
        return Err(Error::Domain { what: "subsets per size", value: k as f64, domain: "≥ 2" });
    }
    tally(outcomes)?;
    let available = outcomes.len();
    if let Some(&size) = sizes.iter().find(|&&s| s > available || s == 0) {
        return Err(Error::SizeTooLarge { size, available });
    }
    sizes
        .iter()
        .enumerate()
        .map(|(s, &size)| {
            let evaluations = (0..k as u64)
                .into_par_iter()
                .map(|j| {
                    let mut rng = stream_rng(seed, ((s as u64) << 32) | j);
                    let mut t = TwoPassTally::default();
                    for i in index::sample(&mut rng, available, size) {
                        t.add(&outcomes[i]);
                    }
                    Evaluation::from_tally(&t, p)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SubsetCvRow { size, subsets: k, cv: metric_cvs(&evaluations) })
        })
        .collect()
}
