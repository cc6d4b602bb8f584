//! Ranking agreement across evaluation settings, with isotonic residualization
//! against correct-rate and refusal-rate covariates.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::average_ranks;
use crate::error::{Error, Result};
use crate::estimator::{sorted_quantile, stream_rng};

pub const DEFAULT_RANDOM_DRAWS: usize = 1000;
const BACKFIT_TOL: f64 = 1e-10;
const BACKFIT_MAX_ITER: usize = 200;

/// Metric values with models as rows and evaluation settings as columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub models: Vec<String>,
    pub settings: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(models: Vec<String>, settings: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != models.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} rows for {} models",
                values.len(),
                models.len()
            )));
        }
        for (model, row) in models.iter().zip(&values) {
            if row.len() != settings.len() {
                return Err(Error::ShapeMismatch(format!(
                    "model {model} has {} values for {} settings",
                    row.len(),
                    settings.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Domain { what: "score", value: bad, domain: "finite reals" });
            }
        }
        Ok(ScoreMatrix { models, settings, values })
    }

    /// Matrix with generated identifiers `m0..` and `s0..`.
    pub fn from_rows(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        let m = values.first().map_or(0, Vec::len);
        ScoreMatrix::new(
            (0..n).map(|i| format!("m{i}")).collect(),
            (0..m).map(|j| format!("s{j}")).collect(),
            values,
        )
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn n_settings(&self) -> usize {
        self.settings.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    fn check_aligned(&self, other: &ScoreMatrix) -> Result<()> {
        if self.models != other.models || self.settings != other.settings {
            return Err(Error::ShapeMismatch(
                "matrices differ in model or setting identifiers".to_string(),
            ));
        }
        Ok(())
    }

    fn with_values(&self, values: Vec<Vec<f64>>) -> ScoreMatrix {
        ScoreMatrix { models: self.models.clone(), settings: self.settings.clone(), values }
    }
}

/// Kendall's coefficient of concordance over settings, average ranks for ties.
pub fn kendalls_w(m: &ScoreMatrix) -> Result<f64> {
    let n = m.n_models();
    let k = m.n_settings();
    if n < 2 {
        return Err(Error::ShapeMismatch(format!("need at least two models, got {n}")));
    }
    if k == 0 {
        return Err(Error::Empty("no settings"));
    }
    let mut rank_sums = vec![0.0; n];
    for j in 0..k {
        for (sum, r) in rank_sums.iter_mut().zip(average_ranks(&m.column(j))) {
            *sum += r;
        }
    }
    let mean = rank_sums.iter().sum::<f64>() / n as f64;
    let s: f64 = rank_sums.iter().map(|r| (r - mean).powi(2)).sum();
    let (n, k) = (n as f64, k as f64);
    Ok((12.0 * s / (k * k * (n * n * n - n))).clamp(0.0, 1.0))
}

/// First-place counts per model; settings with tied leaders split their count.
pub fn winner_counts(m: &ScoreMatrix) -> Vec<f64> {
    let mut counts = vec![0.0; m.n_models()];
    for j in 0..m.n_settings() {
        let col = m.column(j);
        let best = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let leaders: Vec<usize> = (0..col.len()).filter(|&i| col[i] == best).collect();
        for &i in &leaders {
            counts[i] += 1.0 / leaders.len() as f64;
        }
    }
    counts
}

/// Entropy of the winner distribution in base `n` (the number of models).
pub fn winner_entropy(counts: &[f64]) -> Result<f64> {
    if let Some(&bad) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::Domain { what: "winner count", value: bad, domain: "[0, ∞)" });
    }
    let total: f64 = counts.iter().sum();
    if counts.is_empty() || total == 0.0 {
        return Err(Error::Empty("no winners to count"));
    }
    if counts.len() == 1 {
        return Ok(0.0);
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.ln()
        })
        .sum();
    // a single winner gives -0.0
    Ok(if h > 0.0 { (h / (counts.len() as f64).ln()).min(1.0) } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicFit {
    pub x: Vec<f64>,
    /// Fitted values in the input order.
    pub fitted: Vec<f64>,
    pub direction: Direction,
    pub sse: f64,
}

fn sse(y: &[f64], fitted: &[f64]) -> f64 {
    y.iter().zip(fitted).map(|(a, b)| (a - b).powi(2)).sum()
}

/// Weighted pool-adjacent-violators for a nondecreasing fit of `ys`.
fn pava(ys: &[f64], ws: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(ys.len());
    for (&y, &w) in ys.iter().zip(ws) {
        blocks.push((y, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, l2) = blocks[blocks.len() - 1];
            let (m1, w1, l1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = (m1 + (m2 - m1) * (w2 / w), w, l1 + l2);
        }
    }
    blocks.iter().flat_map(|&(m, _, l)| std::iter::repeat_n(m, l)).collect()
}

/// Least-squares monotone fit of `y` on `x`. Observations sharing an `x`
/// value receive the same fitted value.
pub fn isotonic_fit(x: &[f64], y: &[f64], direction: Direction) -> Result<IsotonicFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(Error::Empty("isotonic fit of no points"));
    }
    if let Some(&bad) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::Domain { what: "isotonic input", value: bad, domain: "finite reals" });
    }
    let sign = match direction {
        Direction::Increasing => 1.0,
        Direction::Decreasing => -1.0,
    };
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    // pool tied x values first
    let mut groups: Vec<(Vec<usize>, f64)> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some((members, mean)) if x[members[0]] == x[i] => {
                members.push(i);
                *mean += (sign * y[i] - *mean) / members.len() as f64;
            }
            _ => groups.push((vec![i], sign * y[i])),
        }
    }
    let means: Vec<f64> = groups.iter().map(|g| g.1).collect();
    let weights: Vec<f64> = groups.iter().map(|g| g.0.len() as f64).collect();
    let pooled = pava(&means, &weights);
    let mut fitted = vec![0.0; x.len()];
    for ((members, _), value) in groups.iter().zip(pooled) {
        for &i in members {
            fitted[i] = sign * value;
        }
    }
    Ok(IsotonicFit { x: x.to_vec(), sse: sse(y, &fitted), fitted, direction })
}

/// Isotonic fit in whichever direction leaves the smaller error; increasing
/// on ties.
pub fn isotonic_fit_best(x: &[f64], y: &[f64]) -> Result<IsotonicFit> {
    let up = isotonic_fit(x, y, Direction::Increasing)?;
    let down = isotonic_fit(x, y, Direction::Decreasing)?;
    Ok(if down.sse < up.sse { down } else { up })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveIsotonicFit {
    pub g1: IsotonicFit,
    /// Centered to mean zero.
    pub g2: IsotonicFit,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Residual sum of squares after each backfitting sweep.
    pub sse_history: Vec<f64>,
}

/// Fits `y ≈ g1(x1) + g2(x2)` with monotone `g1`, `g2` by backfitting.
///
/// Each component's direction is fixed on the first sweep. Sweeps stop once
/// the residual sum of squares improves by less than 1e-10, or after 200.
pub fn additive_isotonic_fit(x1: &[f64], x2: &[f64], y: &[f64]) -> Result<AdditiveIsotonicFit> {
    if x1.len() != y.len() {
        return Err(Error::LengthMismatch { left: x1.len(), right: y.len() });
    }
    if x2.len() != y.len() {
        return Err(Error::LengthMismatch { left: x2.len(), right: y.len() });
    }
    if y.len() < 2 {
        return Err(Error::Empty("additive fit needs at least two points"));
    }
    let partial = |other: &[f64]| -> Vec<f64> { y.iter().zip(other).map(|(a, b)| a - b).collect() };

    let mut g1 = isotonic_fit_best(x1, y)?;
    let d1 = g1.direction;
    let mut g2 = isotonic_fit_best(x2, &partial(&g1.fitted))?;
    let d2 = g2.direction;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > 1 {
            g1 = isotonic_fit(x1, &partial(&g2.fitted), d1)?;
            g2 = isotonic_fit(x2, &partial(&g1.fitted), d2)?;
        }
        // move g2's level into g1; both stay monotone and the sum is unchanged
        let shift = g2.fitted.iter().sum::<f64>() / y.len() as f64;
        g2.fitted.iter_mut().for_each(|v| *v -= shift);
        g1.fitted.iter_mut().for_each(|v| *v += shift);
        let current = g2.sse;
        if let Some(&prev) = history.last() {
            if prev - current < BACKFIT_TOL {
                history.push(current);
                converged = true;
                break;
            }
        }
        history.push(current);
        if iterations >= BACKFIT_MAX_ITER {
            break;
        }
    }
    let residuals: Vec<f64> =
        (0..y.len()).map(|i| y[i] - g1.fitted[i] - g2.fitted[i]).collect();
    g1.sse = sse(&partial(&g2.fitted), &g1.fitted);
    g2.sse = sse(&partial(&g1.fitted), &g2.fitted);
    Ok(AdditiveIsotonicFit { g1, g2, residuals, iterations, converged, sse_history: history })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualMode {
    Default,
    MinusCorrect,
    MinusRefusal,
    MinusBoth,
}

impl ResidualMode {
    pub const ALL: [ResidualMode; 4] = [
        ResidualMode::Default,
        ResidualMode::MinusCorrect,
        ResidualMode::MinusRefusal,
        ResidualMode::MinusBoth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResidualMode::Default => "default",
            ResidualMode::MinusCorrect => "minus-correct",
            ResidualMode::MinusRefusal => "minus-refusal",
            ResidualMode::MinusBoth => "minus-both",
        }
    }
}

impl fmt::Display for ResidualMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResidualMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ResidualMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMetric(format!("residual mode {s}")))
    }
}

/// Correct-rate and refusal-rate matrices aligned with the metric matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariates {
    pub correct: ScoreMatrix,
    pub refusal: ScoreMatrix,
}

/// Removes the monotone effect of the covariates from each model's row.
pub fn residualize(metric: &ScoreMatrix, covariates: &Covariates, mode: ResidualMode) -> Result<ScoreMatrix> {
    let rows: Result<Vec<Vec<f64>>> = match mode {
        ResidualMode::Default => return Ok(metric.clone()),
        ResidualMode::MinusCorrect | ResidualMode::MinusRefusal => {
            let cov = if mode == ResidualMode::MinusCorrect {
                &covariates.correct
            } else {
                &covariates.refusal
            };
            metric.check_aligned(cov)?;
            metric
                .values
                .par_iter()
                .zip(&cov.values)
                .map(|(y, x)| {
                    let fit = isotonic_fit_best(x, y)?;
                    Ok(y.iter().zip(&fit.fitted).map(|(a, b)| a - b).collect())
                })
                .collect()
        }
        ResidualMode::MinusBoth => {
            metric.check_aligned(&covariates.correct)?;
            metric.check_aligned(&covariates.refusal)?;
            metric
                .values
                .par_iter()
                .zip(&covariates.correct.values)
                .zip(&covariates.refusal.values)
                .map(|((y, c), r)| Ok(additive_isotonic_fit(c, r, y)?.residuals))
                .collect()
        }
    };
    Ok(metric.with_values(rows?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub metric: String,
    pub mode: ResidualMode,
    pub kendalls_w: f64,
    pub winner_entropy: f64,
}

/// Kendall's W and winner entropy of uniform-noise matrices of the same shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomBaseline {
    pub seed: u64,
    pub draws: usize,
    pub mean_w: f64,
    /// Central 95% of the simulated W values.
    pub w_band: (f64, f64),
    pub mean_entropy: f64,
    pub entropy_band: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub models: usize,
    pub settings: usize,
    pub random: RandomBaseline,
    pub rows: Vec<StabilityRow>,
}

/// Uniform-noise reference for an `n × m` matrix; draw `d` uses RNG stream `d`.
pub fn random_baseline(n: usize, m: usize, draws: usize, seed: u64) -> Result<RandomBaseline> {
    if draws == 0 {
        return Err(Error::Empty("random baseline with zero draws"));
    }
    let stats: Vec<(f64, f64)> = (0..draws as u64)
        .into_par_iter()
        .map(|d| {
            let mut rng = stream_rng(seed, d);
            let values = (0..n).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect();
            let noise = ScoreMatrix::from_rows(values)?;
            Ok((kendalls_w(&noise)?, winner_entropy(&winner_counts(&noise))?))
        })
        .collect::<Result<_>>()?;
    let summarize = |mut xs: Vec<f64>| {
        xs.sort_by(f64::total_cmp);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        (mean, (sorted_quantile(&xs, 0.025), sorted_quantile(&xs, 0.975)))
    };
    let (mean_w, w_band) = summarize(stats.iter().map(|s| s.0).collect());
    let (mean_entropy, entropy_band) = summarize(stats.iter().map(|s| s.1).collect());
    Ok(RandomBaseline { seed, draws, mean_w, w_band, mean_entropy, entropy_band })
}

/// Kendall's W and winner entropy for every metric under every residual mode,
/// plus a seeded uniform-noise baseline.
pub fn stability_report(
    metrics: &[(String, ScoreMatrix)],
    covariates: &Covariates,
    draws: usize,
    seed: u64,
) -> Result<StabilityReport> {
    covariates.correct.check_aligned(&covariates.refusal)?;
    let shape = &covariates.correct;
    let mut rows = Vec::with_capacity(metrics.len() * 4);
    for (name, metric) in metrics {
        metric.check_aligned(shape)?;
        for mode in ResidualMode::ALL {
            let resid = residualize(metric, covariates, mode)?;
            rows.push(StabilityRow {
                metric: name.clone(),
                mode,
                kendalls_w: kendalls_w(&resid)?,
                winner_entropy: winner_entropy(&winner_counts(&resid))?,
            });
        }
    }
    Ok(StabilityReport {
        models: shape.n_models(),
        settings: shape.n_settings(),
        random: random_baseline(shape.n_models(), shape.n_settings(), draws, seed)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn matrix(rows: &[&[f64]]) -> ScoreMatrix {
        ScoreMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn kendalls_w_examples() {
        let same = matrix(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]]);
        assert_eq!(kendalls_w(&same).unwrap(), 1.0);
        let reversed = matrix(&[&[1.0, 3.0], &[2.0, 2.0], &[3.0, 1.0]]);
        assert_eq!(kendalls_w(&reversed).unwrap(), 0.0);
        assert!(kendalls_w(&matrix(&[&[1.0, 2.0]])).is_err());
    }

    #[test]
    fn all_ties_give_zero_w_and_uniform_winners() {
        let flat = matrix(&[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(kendalls_w(&flat).unwrap(), 0.0);
        assert_abs_diff_eq!(winner_entropy(&winner_counts(&flat)).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn winner_entropy_examples() {
        assert!(winner_entropy(&[4.0, 0.0, 0.0]).unwrap().is_sign_positive());
        assert_eq!(winner_entropy(&[4.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(winner_entropy(&[1.0, 1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(winner_entropy(&[2.0, 1.0, 1.0]).unwrap(), 0.946_394_630_357_186, epsilon = 1e-12);
        assert!(winner_entropy(&[]).is_err());
        assert!(winner_entropy(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn winner_ties_split() {
        let m = matrix(&[&[1.0, 0.0], &[1.0, 2.0]]);
        assert_eq!(winner_counts(&m), vec![0.5, 1.5]);
    }

    #[test]
    fn isotonic_examples() {
        let fit = isotonic_fit(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0], Direction::Increasing).unwrap();
        assert_eq!(fit.fitted, vec![1.0, 2.5, 2.5]);
        let y = [0.1, 0.4, 0.9, 1.3];
        let fit = isotonic_fit(&[1.0, 2.0, 3.0, 4.0], &y, Direction::Increasing).unwrap();
        assert_eq!(fit.fitted, y.to_vec());
        let fit = isotonic_fit(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0], Direction::Decreasing).unwrap();
        assert_eq!(fit.fitted, vec![3.0, 1.5, 1.5]);
    }

    #[test]
    fn isotonic_pools_tied_x_and_handles_order() {
        let fit = isotonic_fit(&[2.0, 1.0, 2.0], &[5.0, 0.0, 1.0], Direction::Increasing).unwrap();
        assert_eq!(fit.fitted, vec![3.0, 0.0, 3.0]);
        let fit = isotonic_fit(&[3.0, 1.0, 2.0], &[1.0, 3.0, 2.0], Direction::Increasing).unwrap();
        assert_eq!(fit.fitted, vec![2.0, 2.0, 2.0]);
        assert!(isotonic_fit(&[1.0], &[1.0, 2.0], Direction::Increasing).is_err());
    }

    #[test]
    fn best_direction_picks_lower_sse() {
        let fit = isotonic_fit_best(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(fit.direction, Direction::Decreasing);
        assert_eq!(fit.sse, 0.0);
    }

    #[test]
    fn additive_fit_examples() {
        let x1 = [0.1, 0.5, 0.3, 0.9, 0.7];
        let x2 = [3.0, 1.0, 4.0, 1.5, 9.0];
        let fit = additive_isotonic_fit(&x1, &x2, &x1).unwrap();
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-8));
        let fit = additive_isotonic_fit(&x1, &x2, &[2.0; 5]).unwrap();
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
        assert!(fit.g2.fitted.iter().all(|v| v.abs() < 1e-12));
        assert!(fit.converged);
    }

    #[test]
    fn residualize_against_self_and_constant() {
        let metric = matrix(&[&[0.2, 0.5, 0.3], &[0.6, 0.1, 0.4]]);
        let constant = matrix(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        let cov = Covariates { correct: metric.clone(), refusal: constant };
        let r = residualize(&metric, &cov, ResidualMode::MinusCorrect).unwrap();
        assert!(r.values.iter().flatten().all(|v| *v == 0.0));
        let r = residualize(&metric, &cov, ResidualMode::MinusRefusal).unwrap();
        assert_abs_diff_eq!(r.values[0][1], 0.5 - 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.values[1][2], 0.4 - 1.1 / 3.0, epsilon = 1e-12);
        assert_eq!(residualize(&metric, &cov, ResidualMode::Default).unwrap(), metric);
    }

    #[test]
    fn residualize_rejects_misaligned() {
        let a = matrix(&[&[0.2, 0.5], &[0.6, 0.1]]);
        let mut b = a.clone();
        b.models[0] = "other".into();
        let cov = Covariates { correct: b, refusal: a.clone() };
        assert!(matches!(residualize(&a, &cov, ResidualMode::MinusCorrect), Err(Error::ShapeMismatch(_))));
        assert!(ScoreMatrix::new(vec!["a".into()], vec!["s".into()], vec![vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in ResidualMode::ALL {
            assert_eq!(mode.name().parse::<ResidualMode>().unwrap(), mode);
        }
    }
}
