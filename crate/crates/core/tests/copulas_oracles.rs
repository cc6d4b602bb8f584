//! Copula fitting checked against an independent bivariate-normal evaluation
//! (Plackett's identity integrated by Simpson's rule) and against brute force.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refusal_index::copulas::{
    cell_probs, compare_copulas, copula_cdf, fit_copula, log_likelihood, win_rates,
    ContingencyCounts, CopulaFamily, CopulaParams,
};
use refusal_index::estimator::tally;
use refusal_index::numerics::{std_normal_cdf, std_normal_quantile};
use refusal_index::simulate::{sample_outcomes, LatentModel};

fn simulated_counts(rho: f64, r: f64, mu: f64, n: usize, seed: u64) -> ContingencyCounts {
    let model = LatentModel::from_rates(rho, r, mu).unwrap();
    tally(&sample_outcomes(&model, n, seed).unwrap()).unwrap().contingency()
}

/// Φ₂(x, y; ρ) = Φ(x)Φ(y) + ∫₀^ρ φ₂(x, y; t) dt, Simpson's rule.
fn plackett_bvn(x: f64, y: f64, rho: f64) -> f64 {
    let density = |t: f64| {
        let d = 1.0 - t * t;
        (-(x * x - 2.0 * t * x * y + y * y) / (2.0 * d)).exp() / (2.0 * PI * d.sqrt())
    };
    let steps = 2000;
    let h = rho / steps as f64;
    let mut s = density(0.0) + density(rho);
    for i in 1..steps {
        s += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    std_normal_cdf(x) * std_normal_cdf(y) + s * h / 3.0
}

/// With margins fixed the table has one free cell, so the Gaussian MLE makes
/// p00 equal the observed n00/n. Solve for ρ by bisection on the oracle.
fn saturating_rho(c: &ContingencyCounts) -> f64 {
    let n = c.total() as f64;
    let r = c.refusal_rate();
    let mu = c.error_rate();
    let (x, y) = (std_normal_quantile(1.0 - r).unwrap(), std_normal_quantile(1.0 - mu).unwrap());
    let target = c.n00 as f64 / n;
    let (mut lo, mut hi) = (-0.999, 0.999);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if plackett_bvn(x, y, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn plackett_oracle_is_sane() {
    assert_abs_diff_eq!(plackett_bvn(0.0, 0.0, 0.5), 0.25 + 0.5f64.asin() / (2.0 * PI), epsilon = 1e-10);
}

#[test]
fn gaussian_fit_matches_saturation_oracle() {
    for (rho, r, mu, seed) in [(0.5, 0.5, 0.3, 1), (-0.4, 0.2, 0.6, 2), (0.8, 0.7, 0.4, 3), (0.0, 0.35, 0.5, 4)] {
        let counts = simulated_counts(rho, r, mu, 20_000, seed);
        let fit = fit_copula(&counts, CopulaFamily::Gaussian).unwrap();
        let CopulaParams::Gaussian { rho: fitted } = fit.params else { unreachable!() };
        assert_abs_diff_eq!(fitted, saturating_rho(&counts), epsilon = 1e-4);
    }
}

#[test]
fn gaussian_recovery_and_t_nesting_at_scale() {
    let counts = simulated_counts(0.5, 0.5, 0.3, 200_000, 17);
    let g = fit_copula(&counts, CopulaFamily::Gaussian).unwrap();
    let CopulaParams::Gaussian { rho } = g.params else { unreachable!() };
    assert!((0.47..=0.53).contains(&rho), "rho {rho}");
    let t = fit_copula(&counts, CopulaFamily::StudentT).unwrap();
    assert!(t.loglik >= g.loglik - 1e-6);
    assert!(t.aic > g.aic);
    let cmp = compare_copulas(&counts);
    let pos = |f| cmp.fits.iter().position(|x| x.family == f).unwrap();
    assert!(pos(CopulaFamily::Gaussian) < pos(CopulaFamily::StudentT));
}

#[test]
fn information_criteria_identities() {
    let counts = simulated_counts(0.3, 0.4, 0.5, 5000, 8);
    for fit in compare_copulas(&counts).fits {
        let k = fit.family.arity() as f64;
        assert_eq!(fit.aic, 2.0 * k - 2.0 * fit.loglik);
        assert_eq!(fit.bic, k * (fit.n as f64).ln() - 2.0 * fit.loglik);
    }
}

#[test]
fn independence_table_families_agree() {
    let cmp = compare_copulas(&ContingencyCounts::new(420, 280, 180, 120));
    let ll: Vec<f64> = [CopulaFamily::Gaussian, CopulaFamily::Clayton, CopulaFamily::Gumbel]
        .iter()
        .map(|&f| cmp.get(f).unwrap().loglik)
        .collect();
    assert!(ll.iter().all(|l| (l - ll[0]).abs() < 2e-3));
    assert_eq!(cmp.fits[0].family, CopulaFamily::Gaussian);
}

#[test]
fn gaussian_units_beat_student_t_on_aic() {
    let units: Vec<_> = (0..10)
        .map(|i| compare_copulas(&simulated_counts(0.2 + 0.05 * i as f64, 0.4, 0.5, 5000, 100 + i)))
        .collect();
    let rates = win_rates(&units).unwrap();
    let t = rates.iter().find(|w| w.versus == CopulaFamily::StudentT).unwrap();
    assert_eq!(t.aic, 1.0);
    assert_eq!(t.bic, 1.0);
}

fn random_params(family: CopulaFamily, rng: &mut ChaCha8Rng) -> CopulaParams {
    match family {
        CopulaFamily::Gaussian => CopulaParams::Gaussian { rho: rng.random_range(-0.99..0.99) },
        CopulaFamily::StudentT => CopulaParams::StudentT {
            rho: rng.random_range(-0.99..0.99),
            nu: 2f64.powi(rng.random_range(1..=8)),
        },
        CopulaFamily::Clayton => CopulaParams::Clayton { theta: rng.random_range(1e-6..50.0) },
        CopulaFamily::Gumbel => CopulaParams::Gumbel { theta: rng.random_range(1.0..50.0) },
    }
}

#[test]
fn fitted_loglik_beats_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let counts = simulated_counts(0.45, 0.3, 0.4, 4000, 6);
    let (r, mu) = (counts.refusal_rate(), counts.error_rate());
    for family in CopulaFamily::ALL {
        let best = fit_copula(&counts, family).unwrap().loglik;
        let draws = if family == CopulaFamily::StudentT { 200 } else { 1000 };
        for _ in 0..draws {
            let params = random_params(family, &mut rng);
            let ll = log_likelihood(&counts, &cell_probs(&params, r, mu).unwrap());
            assert!(best >= ll - 1e-7, "{family}: fitted {best} < {ll} at {params:?}");
        }
    }
}

#[test]
fn clayton_closed_form_cells() {
    let p = cell_probs(&CopulaParams::Clayton { theta: 2.0 }, 0.5, 0.5).unwrap();
    let expected = 7f64.powf(-0.5);
    assert_abs_diff_eq!(p.p00, expected, epsilon = 1e-9);
    assert_abs_diff_eq!(p.p11, expected, epsilon = 1e-9);
}

fn family_params() -> impl Strategy<Value = CopulaParams> {
    prop_oneof![
        (-0.99..0.99f64).prop_map(|rho| CopulaParams::Gaussian { rho }),
        (-0.99..0.99f64, 1u32..8).prop_map(|(rho, k)| CopulaParams::StudentT { rho, nu: 2f64.powi(k as i32) }),
        (1e-3..30.0f64).prop_map(|theta| CopulaParams::Clayton { theta }),
        (1.0..30.0f64).prop_map(|theta| CopulaParams::Gumbel { theta }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cell_probabilities_reproduce_margins(params in family_params(), r in 0.01..0.99f64, mu in 0.01..0.99f64) {
        let p = cell_probs(&params, r, mu).unwrap();
        prop_assert!((p.p10 + p.p11 - r).abs() <= 1e-9);
        prop_assert!((p.p01 + p.p11 - mu).abs() <= 1e-9);
        prop_assert!((p.p00 + p.p01 + p.p10 + p.p11 - 1.0).abs() <= 1e-9);
        let c = p.clamped();
        prop_assert!(c.as_array().iter().all(|&q| (1e-12..=1.0 - 1e-12).contains(&q)));
    }

    #[test]
    fn copulas_are_two_increasing(
        params in family_params(),
        u1 in 0.0..1.0f64, du in 0.0..1.0f64, v1 in 0.0..1.0f64, dv in 0.0..1.0f64,
    ) {
        let u2 = u1 + (1.0 - u1) * du;
        let v2 = v1 + (1.0 - v1) * dv;
        let c = |u, v| copula_cdf(&params, u, v).unwrap();
        let volume = c(u2, v2) - c(u1, v2) - c(u2, v1) + c(u1, v1);
        prop_assert!(volume >= -1e-9, "volume {volume}");
    }

    #[test]
    fn copulas_are_grounded(params in family_params(), u in 0.0..1.0f64) {
        let c = |a, b| copula_cdf(&params, a, b).unwrap();
        prop_assert_eq!(c(u, 0.0), 0.0);
        prop_assert_eq!(c(0.0, u), 0.0);
        prop_assert!((c(u, 1.0) - u).abs() < 1e-12);
        prop_assert!((c(1.0, u) - u).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mle_is_optimal(n00 in 1u64..500, n01 in 1u64..500, n10 in 1u64..500, n11 in 1u64..500, rho in -0.999..0.999f64) {
        let counts = ContingencyCounts::new(n00, n01, n10, n11);
        let fit = fit_copula(&counts, CopulaFamily::Gaussian).unwrap();
        let other = cell_probs(&CopulaParams::Gaussian { rho }, counts.refusal_rate(), counts.error_rate()).unwrap();
        prop_assert!(fit.loglik >= log_likelihood(&counts, &other) - 1e-7);
    }
}
