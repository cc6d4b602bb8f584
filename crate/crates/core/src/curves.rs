//! Accuracy–refusal curves.
//!
//! Under the latent model the correct-and-answered rate at refusal rate `r` is
//! `a(r; ρ) = Φ₂(Φ⁻¹(1−r), Φ⁻¹(μ); ρ)` where `μ` is the accuracy when nothing
//! is refused. Iso-score curves instead trace the `(r, c)` pairs that keep a
//! heuristic score fixed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_correlation, check_probability, Error, Result};
use crate::numerics::{bvn_cdf, std_normal_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    pub a: f64,
    /// False when the implied accuracy falls outside `[0, 1 − r]`.
    pub feasible: bool,
}

/// `n` evenly spaced refusal rates on `[0, 1]`, endpoints exact.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| if i + 1 == n { 1.0 } else { i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Correct answer rate `a(r; ρ)` for a model with zero-refusal accuracy `mu`.
pub fn iso_ri_accuracy(rho: f64, mu: f64, r: f64) -> Result<f64> {
    check_correlation(rho)?;
    check_open_unit("mu", mu)?;
    check_probability("r", r)?;
    if r == 0.0 {
        return Ok(mu);
    }
    if r == 1.0 {
        return Ok(0.0);
    }
    let a = bvn_cdf(std_normal_quantile(1.0 - r)?, std_normal_quantile(mu)?, rho)?;
    // keep rounding error inside the Fréchet bounds
    Ok(a.clamp((mu - r).max(0.0), mu.min(1.0 - r)))
}

pub fn iso_ri_curve(rho: f64, mu: f64, r_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    r_grid
        .iter()
        .map(|&r| Ok(CurvePoint { r, a: iso_ri_accuracy(rho, mu, r)?, feasible: true }))
        .collect()
}

fn check_open_unit(what: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value: p, domain: "(0, 1)" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMetric {
    CorrectOverAttempted,
    FScore,
    Weighted,
}

impl ScoreMetric {
    pub fn name(self) -> &'static str {
        match self {
            ScoreMetric::CorrectOverAttempted => "c/a",
            ScoreMetric::FScore => "f-score",
            ScoreMetric::Weighted => "weighted",
        }
    }

    /// Correct rate `c` at refusal rate `r` that yields score `value`.
    pub fn solve_correct(self, value: f64, p: f64, r: f64) -> f64 {
        match self {
            ScoreMetric::CorrectOverAttempted => value * (1.0 - r),
            ScoreMetric::FScore => value * (2.0 - r) / 2.0,
            ScoreMetric::Weighted => value + p * (1.0 - r),
        }
    }
}

impl fmt::Display for ScoreMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoreMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c/a" | "ca" | "c-over-a" | "correct-over-attempted" => Ok(ScoreMetric::CorrectOverAttempted),
            "f" | "f-score" | "fscore" | "f1" => Ok(ScoreMetric::FScore),
            "w" | "weighted" => Ok(ScoreMetric::Weighted),
            _ => Err(Error::UnknownMetric(s.to_string())),
        }
    }
}

/// Points of constant `metric` score; the accuracy is reported unclamped and
/// flagged infeasible when it leaves `[0, 1 − r]`.
pub fn iso_score_curve(metric: ScoreMetric, value: f64, p: f64, r_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    if !value.is_finite() {
        return Err(Error::Domain { what: "value", value, domain: "finite reals" });
    }
    if !p.is_finite() {
        return Err(Error::Domain { what: "p", value: p, domain: "finite reals" });
    }
    r_grid
        .iter()
        .map(|&r| {
            check_probability("r", r)?;
            let a = metric.solve_correct(value, p, r);
            let feasible = (-1e-12..=1.0 - r + 1e-12).contains(&a);
            Ok(CurvePoint { r, a, feasible })
        })
        .collect()
}
