//! Copula families over 2×2 tables with fixed margins.
//!
//! A table of refusal `R` against aggregated incorrectness `Ŵ` has margins
//! `r = P(R=1)` and `μ = P(Ŵ=1)`. A copula `C` fixes the remaining degree of
//! freedom through `p00 = C(1−r, 1−μ)`; the other cells follow from the
//! margins. Parameters are fitted by maximizing the multinomial likelihood of
//! the observed counts and compared by AIC/BIC.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{check_correlation, check_probability, Error, Result};
use crate::numerics::{bvn_cdf, bvn_survival, bvt_cdf, minimize_scalar_bounded, std_normal_quantile};

/// Probability floor/ceiling applied to cell probabilities inside the likelihood.
pub const CELL_EPS: f64 = 1e-12;
/// Correlation search interval for the elliptical families.
pub const RHO_BOUND: f64 = 0.999;
/// Optimizer tolerance on the (possibly log-transformed) parameter.
pub const FIT_TOL: f64 = 1e-7;
/// Degrees-of-freedom grid profiled for the Student-t family.
pub const T_DOF_GRID: [f64; 8] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
pub const CLAYTON_BOUNDS: (f64, f64) = (1e-6, 50.0);
pub const GUMBEL_BOUNDS: (f64, f64) = (1.0, 50.0);
/// Absolute difference below which two criteria values count as a tie.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopulaFamily {
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 4] = [
        CopulaFamily::Gaussian,
        CopulaFamily::StudentT,
        CopulaFamily::Clayton,
        CopulaFamily::Gumbel,
    ];

    /// Number of free parameters.
    pub fn arity(self) -> usize {
        match self {
            CopulaFamily::StudentT => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::StudentT => "student-t",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Gumbel => "gumbel",
        }
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A copula family together with its parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CopulaParams {
    Gaussian { rho: f64 },
    StudentT { rho: f64, nu: f64 },
    Clayton { theta: f64 },
    Gumbel { theta: f64 },
}

impl CopulaParams {
    pub fn family(&self) -> CopulaFamily {
        match self {
            CopulaParams::Gaussian { .. } => CopulaFamily::Gaussian,
            CopulaParams::StudentT { .. } => CopulaFamily::StudentT,
            CopulaParams::Clayton { .. } => CopulaFamily::Clayton,
            CopulaParams::Gumbel { .. } => CopulaFamily::Gumbel,
        }
    }

    /// Parameter vector in declaration order.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            CopulaParams::Gaussian { rho } => vec![rho],
            CopulaParams::StudentT { rho, nu } => vec![rho, nu],
            CopulaParams::Clayton { theta } | CopulaParams::Gumbel { theta } => vec![theta],
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CopulaParams::Gaussian { rho } => check_correlation(rho),
            CopulaParams::StudentT { rho, nu } => {
                check_correlation(rho)?;
                if nu > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain { what: "nu", value: nu, domain: "(0, ∞]" })
                }
            }
            CopulaParams::Clayton { theta } => {
                if theta > 0.0 && theta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain { what: "clayton theta", value: theta, domain: "(0, ∞)" })
                }
            }
            CopulaParams::Gumbel { theta } => {
                if theta >= 1.0 && theta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain { what: "gumbel theta", value: theta, domain: "[1, ∞)" })
                }
            }
        }
    }
}

/// Copula distribution function `C(u, v)`.
pub fn copula_cdf(params: &CopulaParams, u: f64, v: f64) -> Result<f64> {
    params.validate()?;
    check_probability("u", u)?;
    check_probability("v", v)?;
    if u == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    if u == 1.0 {
        return Ok(v);
    }
    if v == 1.0 {
        return Ok(u);
    }
    let value = match *params {
        CopulaParams::Gaussian { rho } => {
            bvn_cdf(std_normal_quantile(u)?, std_normal_quantile(v)?, rho)?
        }
        CopulaParams::StudentT { rho, nu } => {
            let (a, b) = t_quantiles(nu, u, v)?;
            bvt_cdf(a, b, rho, nu)?
        }
        CopulaParams::Clayton { theta } => clayton(theta, u, v),
        CopulaParams::Gumbel { theta } => gumbel(theta, u, v),
    };
    Ok(value.clamp(0.0, u.min(v)))
}

// (u^-θ + v^-θ - 1)^(-1/θ), written with expm1/ln_1p so θ → 0 stays accurate.
fn clayton(theta: f64, u: f64, v: f64) -> f64 {
    let a = (-theta * u.ln()).exp_m1();
    let b = (-theta * v.ln()).exp_m1();
    (-(a + b).ln_1p() / theta).exp()
}

fn gumbel(theta: f64, u: f64, v: f64) -> f64 {
    let s = (-u.ln()).powf(theta) + (-v.ln()).powf(theta);
    (-s.powf(1.0 / theta)).exp()
}

fn t_quantiles(nu: f64, u: f64, v: f64) -> Result<(f64, f64)> {
    if nu == f64::INFINITY {
        return Ok((std_normal_quantile(u)?, std_normal_quantile(v)?));
    }
    let dist = StudentsT::new(0.0, 1.0, nu)
        .map_err(|_| Error::Domain { what: "nu", value: nu, domain: "(0, ∞]" })?;
    Ok((dist.inverse_cdf(u), dist.inverse_cdf(v)))
}

/// Cell probabilities `p_ab = P(R=a, Ŵ=b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellProbs {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl CellProbs {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p00, self.p01, self.p10, self.p11]
    }

    /// Every cell clamped to `[CELL_EPS, 1 − CELL_EPS]`.
    pub fn clamped(&self) -> CellProbs {
        let c = |p: f64| p.clamp(CELL_EPS, 1.0 - CELL_EPS);
        CellProbs { p00: c(self.p00), p01: c(self.p01), p10: c(self.p10), p11: c(self.p11) }
    }
}

fn check_margins(r: f64, mu: f64) -> Result<()> {
    for (name, value) in [("refusal rate", r), ("error rate", mu)] {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::DegenerateMargin(format!("{name} = {value} must lie in (0, 1)")));
        }
    }
    Ok(())
}

/// Cell probabilities implied by a copula with refusal margin `r` and error
/// margin `mu`. The margins are reproduced exactly; no clamping is applied.
pub fn cell_probs(params: &CopulaParams, r: f64, mu: f64) -> Result<CellProbs> {
    check_margins(r, mu)?;
    params.validate()?;
    if let CopulaParams::Gaussian { rho } = *params {
        let tau_r = std_normal_quantile(1.0 - r)?;
        let tau_w = std_normal_quantile(1.0 - mu)?;
        let p11 = bvn_survival(tau_r, tau_w, rho)?;
        return Ok(CellProbs { p00: 1.0 - r - mu + p11, p01: mu - p11, p10: r - p11, p11 });
    }
    let p00 = copula_cdf(params, 1.0 - r, 1.0 - mu)?;
    Ok(CellProbs { p00, p01: (1.0 - r) - p00, p10: (1.0 - mu) - p00, p11: r + mu - 1.0 + p00 })
}

/// Counts of the 2×2 table of refusal (`a`) against aggregated incorrectness (`b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ContingencyCounts {
    pub n00: u64,
    pub n01: u64,
    pub n10: u64,
    pub n11: u64,
}

impl ContingencyCounts {
    pub fn new(n00: u64, n01: u64, n10: u64, n11: u64) -> Self {
        ContingencyCounts { n00, n01, n10, n11 }
    }

    pub fn total(&self) -> u64 {
        self.n00 + self.n01 + self.n10 + self.n11
    }

    pub fn refusal_rate(&self) -> f64 {
        (self.n10 + self.n11) as f64 / self.total() as f64
    }

    pub fn error_rate(&self) -> f64 {
        (self.n01 + self.n11) as f64 / self.total() as f64
    }

    /// Tallies `(refused, wrong)` indicator pairs.
    pub fn tally(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = ContingencyCounts::default();
        for (refused, wrong) in pairs {
            match (refused, wrong) {
                (false, false) => c.n00 += 1,
                (false, true) => c.n01 += 1,
                (true, false) => c.n10 += 1,
                (true, true) => c.n11 += 1,
            }
        }
        c
    }

    fn as_array(&self) -> [f64; 4] {
        [self.n00 as f64, self.n01 as f64, self.n10 as f64, self.n11 as f64]
    }

    fn margins(&self) -> Result<(f64, f64)> {
        if self.total() == 0 {
            return Err(Error::Empty("contingency table has no observations"));
        }
        let (r, mu) = (self.refusal_rate(), self.error_rate());
        check_margins(r, mu)?;
        Ok((r, mu))
    }
}

/// Multinomial log-likelihood `Σ n_ab log p_ab` with clamped cell probabilities.
pub fn log_likelihood(counts: &ContingencyCounts, probs: &CellProbs) -> f64 {
    counts
        .as_array()
        .iter()
        .zip(probs.clamped().as_array())
        .filter(|(n, _)| **n > 0.0)
        .map(|(n, p)| n * p.ln())
        .sum()
}

/// Maximum-likelihood fit of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaFit {
    pub family: CopulaFamily,
    pub params: CopulaParams,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n: u64,
    /// The estimate sits on the edge of the search domain.
    pub at_boundary: bool,
}

impl CopulaFit {
    fn new(params: CopulaParams, loglik: f64, n: u64, at_boundary: bool) -> Self {
        let family = params.family();
        let k = family.arity() as f64;
        CopulaFit {
            family,
            params,
            loglik,
            aic: 2.0 * k - 2.0 * loglik,
            bic: k * (n as f64).ln() - 2.0 * loglik,
            n,
            at_boundary,
        }
    }
}

struct Profile {
    x: f64,
    loglik: f64,
    at_boundary: bool,
}

// Maximizes `loglik(x)` on [lo, hi].
fn profile(loglik: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Profile> {
    let x = minimize_scalar_bounded(|x| -loglik(x), lo, hi, FIT_TOL)?;
    let edge = 10.0 * FIT_TOL;
    Ok(Profile { x, loglik: loglik(x), at_boundary: x - lo < edge || hi - x < edge })
}

/// Fits `family` to `counts` with margins fixed at the table's empirical rates.
pub fn fit_copula(counts: &ContingencyCounts, family: CopulaFamily) -> Result<CopulaFit> {
    let (r, mu) = counts.margins()?;
    let n = counts.total();
    let ll = |params: CopulaParams| -> f64 {
        match cell_probs(&params, r, mu) {
            Ok(p) => log_likelihood(counts, &p),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    match family {
        CopulaFamily::Gaussian => {
            let best = profile(|rho| ll(CopulaParams::Gaussian { rho }), -RHO_BOUND, RHO_BOUND)?;
            Ok(CopulaFit::new(CopulaParams::Gaussian { rho: best.x }, best.loglik, n, best.at_boundary))
        }
        CopulaFamily::StudentT => {
            let mut best: Option<(f64, Profile)> = None;
            for nu in T_DOF_GRID {
                let (qa, qb) = t_quantiles(nu, 1.0 - r, 1.0 - mu)?;
                let t_ll = |rho: f64| -> f64 {
                    let p00 = match bvt_cdf(qa, qb, rho, nu) {
                        Ok(v) => v.clamp(0.0, (1.0 - r).min(1.0 - mu)),
                        Err(_) => return f64::NEG_INFINITY,
                    };
                    let probs = CellProbs {
                        p00,
                        p01: (1.0 - r) - p00,
                        p10: (1.0 - mu) - p00,
                        p11: r + mu - 1.0 + p00,
                    };
                    log_likelihood(counts, &probs)
                };
                let candidate = profile(t_ll, -RHO_BOUND, RHO_BOUND)?;
                if best.as_ref().is_none_or(|(_, b)| candidate.loglik > b.loglik) {
                    best = Some((nu, candidate));
                }
            }
            let (nu, best) = best.expect("non-empty grid");
            let params = CopulaParams::StudentT { rho: best.x, nu };
            Ok(CopulaFit::new(params, best.loglik, n, best.at_boundary))
        }
        CopulaFamily::Clayton => {
            let (lo, hi) = CLAYTON_BOUNDS;
            let best = profile(|s| ll(CopulaParams::Clayton { theta: s.exp() }), lo.ln(), hi.ln())?;
            let params = CopulaParams::Clayton { theta: best.x.exp() };
            Ok(CopulaFit::new(params, best.loglik, n, best.at_boundary))
        }
        CopulaFamily::Gumbel => {
            let (lo, hi) = GUMBEL_BOUNDS;
            let best = profile(|s| ll(CopulaParams::Gumbel { theta: s.exp() }), lo.ln(), hi.ln())?;
            let params = CopulaParams::Gumbel { theta: best.x.exp() };
            Ok(CopulaFit::new(params, best.loglik, n, best.at_boundary))
        }
    }
}

/// All four families fitted to one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaComparison {
    /// Successful fits by ascending AIC, then arity, then family order.
    pub fits: Vec<CopulaFit>,
    /// Families whose fit failed, with the error message.
    pub failures: Vec<(CopulaFamily, String)>,
}

impl CopulaComparison {
    pub fn get(&self, family: CopulaFamily) -> Option<&CopulaFit> {
        self.fits.iter().find(|f| f.family == family)
    }
}

pub fn compare_copulas(counts: &ContingencyCounts) -> CopulaComparison {
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for family in CopulaFamily::ALL {
        match fit_copula(counts, family) {
            Ok(fit) => fits.push(fit),
            Err(e) => failures.push((family, e.to_string())),
        }
    }
    fits.sort_by(|a, b| {
        a.aic
            .total_cmp(&b.aic)
            .then(a.family.arity().cmp(&b.family.arity()))
            .then(a.family.cmp(&b.family))
    });
    CopulaComparison { fits, failures }
}

/// Gaussian-versus-alternative win fractions for one alternative family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRateRow {
    pub versus: CopulaFamily,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    /// Units where both fits succeeded.
    pub units: usize,
}

fn score(g: f64, alt: f64, higher_is_better: bool) -> f64 {
    if (g - alt).abs() < TIE_TOL {
        0.5
    } else if (g > alt) == higher_is_better {
        1.0
    } else {
        0.0
    }
}

/// Fraction of units in which the Gaussian copula beats each alternative under
/// log-likelihood, AIC and BIC; ties count 0.5.
pub fn win_rates(units: &[CopulaComparison]) -> Result<Vec<WinRateRow>> {
    if units.is_empty() {
        return Err(Error::Empty("no comparison units"));
    }
    let mut rows = Vec::new();
    for versus in [CopulaFamily::StudentT, CopulaFamily::Clayton, CopulaFamily::Gumbel] {
        let mut sums = [0.0; 3];
        let mut count = 0;
        for unit in units {
            let (Some(g), Some(alt)) = (unit.get(CopulaFamily::Gaussian), unit.get(versus)) else {
                continue;
            };
            count += 1;
            sums[0] += score(g.loglik, alt.loglik, true);
            sums[1] += score(g.aic, alt.aic, false);
            sums[2] += score(g.bic, alt.bic, false);
        }
        let frac = |s: f64| if count == 0 { f64::NAN } else { s / count as f64 };
        rows.push(WinRateRow {
            versus,
            loglik: frac(sums[0]),
            aic: frac(sums[1]),
            bic: frac(sums[2]),
            units: count,
        });
    }
    Ok(rows)
}

/// Mean log-likelihood, AIC and BIC per family over units.
pub fn mean_metrics(units: &[CopulaComparison]) -> Vec<(CopulaFamily, f64, f64, f64)> {
    CopulaFamily::ALL
        .iter()
        .filter_map(|&family| {
            let fits: Vec<&CopulaFit> = units.iter().filter_map(|u| u.get(family)).collect();
            if fits.is_empty() {
                return None;
            }
            let m = fits.len() as f64;
            let mean = |f: fn(&CopulaFit) -> f64| fits.iter().map(|x| f(x)).sum::<f64>() / m;
            Some((family, mean(|f| f.loglik), mean(|f| f.aic), mean(|f| f.bic)))
        })
        .collect()
}
