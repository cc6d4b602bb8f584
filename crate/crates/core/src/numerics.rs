//! Special functions and scalar optimization.
//!
//! Univariate and bivariate normal distributions, the central bivariate
//! Student-t lower orthant probability and a bounded Brent minimizer. All
//! functions are pure and accept `±∞` where a marginal or limiting value is
//! well defined.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{check_correlation, Error, Result};

/// Standard normal CDF `Φ(x)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile `Φ⁻¹(p)` for `p ∈ (0, 1)`.
///
/// Wichura's AS241 rational approximations (relative accuracy about 1e-16).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "p",
            value: p,
            domain: "(0, 1)",
        });
    }
    Ok(quantile_unchecked(p))
}

fn quantile_unchecked(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_13) * r
            + 67265.770_927_008_7)
            * r
            + 45921.953_931_549_87)
            * r
            + 13731.693_765_509_461)
            * r
            + 1971.590_950_306_551_3)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((r * 5226.495_278_852_546 + 28729.085_735_721_943) * r
            + 39307.895_800_092_71)
            * r
            + 21213.794_301_586_596)
            * r
            + 5394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_6)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_6;
        let den = ((((((r * 1.050_750_071_644_416_8e-9 + 5.475_938_084_995_345e-4) * r
            + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_08)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((r * 2.010_334_399_292_288_1e-7 + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_887_9)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

// Gauss-Legendre half-rules on [-1, 1]: positive nodes and their weights.
const GL6: [(f64, f64); 3] = [
    (0.932_469_514_203_152_2, 0.171_324_492_379_170_5),
    (0.661_209_386_466_264_7, 0.360_761_573_048_138_4),
    (0.238_619_186_083_197, 0.467_913_934_572_690_4),
];
const GL12: [(f64, f64); 6] = [
    (0.981_560_634_246_719_1, 0.047_175_336_386_511_77),
    (0.904_117_256_370_475, 0.106_939_325_995_318_3),
    (0.769_902_674_194_305, 0.160_078_328_543_346_4),
    (0.587_317_954_286_617_1, 0.203_167_426_723_065_9),
    (0.367_831_498_998_180_2, 0.233_492_536_538_354_7),
    (0.125_233_408_511_469_2, 0.249_147_045_813_402_9),
];
const GL20: [(f64, f64); 10] = [
    (0.993_128_599_185_094_9, 0.017_614_007_139_152_12),
    (0.963_971_927_277_913_8, 0.040_601_429_800_386_94),
    (0.912_234_428_251_325_9, 0.062_672_048_334_109_06),
    (0.839_116_971_822_218_8, 0.083_276_741_576_704_75),
    (0.746_331_906_460_150_8, 0.101_930_119_817_240_4),
    (0.636_053_680_726_515, 0.118_194_531_961_518_4),
    (0.510_867_001_950_827_1, 0.131_688_638_449_176_6),
    (0.373_706_088_715_419_6, 0.142_096_109_318_382_1),
    (0.227_785_851_141_645_1, 0.149_172_986_472_603_7),
    (0.076_526_521_133_497_33, 0.152_753_387_130_725_9),
];

/// Bivariate standard normal CDF `P(Z₁ ≤ x, Z₂ ≤ y)` with correlation `rho`.
///
/// Drezner–Wesolowsky integration of the correlation-integral representation
/// as refined by Genz (6/12/20-point Gauss–Legendre depending on `|rho|`),
/// with the asymptotic expansion for `|rho| ≥ 0.925`.
pub fn bvn_cdf(x: f64, y: f64, rho: f64) -> Result<f64> {
    check_correlation(rho)?;
    Ok(upper_orthant(-x, -y, rho))
}

/// Bivariate normal upper orthant `P(Z₁ > x, Z₂ > y)`.
///
/// Evaluated as `1 − Φ(x) − Φ(y) + Φ₂(x, y; ρ)`, clamped to `[0, 1]`.
pub fn bvn_survival(x: f64, y: f64, rho: f64) -> Result<f64> {
    let joint = bvn_cdf(x, y, rho)?;
    Ok((1.0 - std_normal_cdf(x) - std_normal_cdf(y) + joint).clamp(0.0, 1.0))
}

// P(X > h, Y > k) for standard bivariate normal with correlation r, |r| < 1.
fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY {
            1.0
        } else {
            std_normal_cdf(-k)
        };
    }
    if k == f64::NEG_INFINITY {
        return std_normal_cdf(-h);
    }
    if r == 0.0 {
        return std_normal_cdf(-h) * std_normal_cdf(-k);
    }

    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let two_pi = 2.0 * PI;
    let mut hk = h * k;
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin() / 2.0;
        for &(node, weight) in rule {
            for t in [1.0 - node, 1.0 + node] {
                let sn = (asr * t).sin();
                bvn += weight * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / two_pi + std_normal_cdf(-h) * std_normal_cdf(-k);
    } else {
        let mut k = k;
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        let as_ = 1.0 - r * r;
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 80.0;
        let asr = -(bs / as_ + hk) / 2.0;
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_);
        }
        if hk > -100.0 {
            let b = bs.sqrt();
            let sp = two_pi.sqrt() * std_normal_cdf(-b / a);
            bvn -= (-hk / 2.0).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
        }
        a /= 2.0;
        let mut sum = 0.0;
        for &(node, weight) in rule {
            for t in [1.0 - node, 1.0 + node] {
                let xs = (a * t) * (a * t);
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    let rs = (1.0 - xs).sqrt();
                    let ep = (-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))).exp() / rs;
                    sum += weight * asr.exp() * (sp - ep);
                }
            }
        }
        bvn = (a * sum - bvn) / two_pi;
        if r > 0.0 {
            bvn += std_normal_cdf(-h.max(k));
        } else if h >= k {
            bvn = -bvn;
        } else {
            let l = if h < 0.0 {
                std_normal_cdf(k) - std_normal_cdf(h)
            } else {
                std_normal_cdf(-h) - std_normal_cdf(-k)
            };
            bvn = l - bvn;
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Central bivariate Student-t lower orthant probability with `nu` degrees of
/// freedom and correlation `rho`.
///
/// Uses the normal scale-mixture representation `T = Z / sqrt(W/ν)` with
/// `W ~ χ²_ν`: the probability is `E[Φ₂(x·S, y·S; ρ)]` for `S = sqrt(W/ν)`,
/// integrated over `log W` with adaptive Gauss–Kronrod on panels spanning
/// the effective support of the mixing density.
pub fn bvt_cdf(x: f64, y: f64, rho: f64, nu: f64) -> Result<f64> {
    check_correlation(rho)?;
    if !(nu > 0.0) {
        return Err(Error::Domain {
            what: "nu",
            value: nu,
            domain: "(0, ∞]",
        });
    }
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if nu == f64::INFINITY {
        return bvn_cdf(x, y, rho);
    }
    if x == 0.0 && y == 0.0 {
        return Ok(0.25 + rho.asin() / (2.0 * PI));
    }

    // log-density of log W relative to its mode at ln ν, written in a form
    // that stays accurate for very large ν
    let half = nu / 2.0;
    let mode = nu.ln();
    let log_density = |t: f64| {
        let d = t - mode;
        half * (d - d.exp_m1())
    };
    // log-density drop beyond which the mixing weight is negligible
    const CUTOFF: f64 = 42.0;
    let left = support_edge(|t| log_density(t) + CUTOFF, mode, -1.0);
    let right = support_edge(|t| log_density(t) + CUTOFF, mode, 1.0);

    let weight = |t: f64| log_density(t).exp();
    let integrand = |t: f64| {
        let scale = (0.5 * (t - mode)).exp();
        upper_orthant(-x * scale, -y * scale, rho) * weight(t)
    };
    const PANELS: usize = 24;
    let width = (right - left) / PANELS as f64;
    let panels = (0..PANELS).map(|i| left + width * i as f64);
    // normalizing by the quadrature of the density itself cancels both the
    // truncation and the discretization error of the mixing weight
    let mass: f64 = panels
        .clone()
        .map(|a| adaptive_gauss_kronrod(&weight, a, a + width, 1e-14, 12))
        .sum();
    let total: f64 = panels
        .map(|a| adaptive_gauss_kronrod(&integrand, a, a + width, 1e-14, 12))
        .sum::<f64>()
        / mass;
    Ok(total.clamp(0.0, 1.0))
}

// Finds a point beyond `start` in direction `dir` where `f` changes sign from
// positive to nonpositive; `f(start) > 0` is assumed.
fn support_edge(f: impl Fn(f64) -> f64, start: f64, dir: f64) -> f64 {
    let mut step = 1e-3;
    let mut inner = start;
    let mut outer = start + dir * step;
    while f(outer) > 0.0 {
        inner = outer;
        step *= 2.0;
        outer = start + dir * step;
    }
    for _ in 0..100 {
        let mid = 0.5 * (inner + outer);
        if f(mid) > 0.0 {
            inner = mid;
        } else {
            outer = mid;
        }
        if (outer - inner).abs() < 1e-12 * (1.0 + start.abs()) {
            break;
        }
    }
    outer
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * GK15_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for (j, (&node, &weight)) in GK15_NODES[..7].iter().zip(&GK15_WEIGHTS[..7]).enumerate() {
        let dx = half * node;
        let pair = f(center - dx) + f(center + dx);
        kronrod += weight * pair;
        if j % 2 == 1 {
            gauss += G7_WEIGHTS[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

pub(crate) fn adaptive_gauss_kronrod(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (value, err) = gauss_kronrod_15(f, a, b);
    if err <= tol.max(1e-15 * value.abs()) || depth == 0 {
        return value;
    }
    let mid = 0.5 * (a + b);
    let tol = (tol / 2.0).max(1e-16);
    adaptive_gauss_kronrod(f, a, mid, tol, depth - 1) + adaptive_gauss_kronrod(f, mid, b, tol, depth - 1)
}

/// Bounded scalar minimization by Brent's method (golden-section search with
/// parabolic interpolation).
///
/// Returns a point within `tol` of the minimizer of a unimodal objective on
/// `[lo, hi]`; the result always lies inside the bounds.
pub fn minimize_scalar_bounded(
    objective: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidBounds { lo, hi });
    }
    const MAX_ITER: usize = 500;
    let sqrt_eps = f64::EPSILON.sqrt();
    let golden = 0.5 * (3.0 - 5f64.sqrt());

    let (mut a, mut b) = (lo, hi);
    // best point, second best, previous second best
    let mut xf = a + golden * (b - a);
    let mut nfc = xf;
    let mut fulc = xf;
    let mut fx = objective(xf);
    let mut fnfc = fx;
    let mut ffulc = fx;
    let mut rat: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut xm = 0.5 * (a + b);
    let mut tol1 = sqrt_eps * xf.abs() + tol / 3.0;
    let mut tol2 = 2.0 * tol1;

    for _ in 0..MAX_ITER {
        if (xf - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            use_golden = false;
            let mut r = (xf - nfc) * (fx - ffulc);
            let mut q = (xf - fulc) * (fx - fnfc);
            let mut p = (xf - fulc) * q - (xf - nfc) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = rat;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - xf) && p < q * (b - xf) {
                rat = p / q;
                let x = xf + rat;
                if x - a < tol2 || b - x < tol2 {
                    rat = if xm >= xf { tol1 } else { -tol1 };
                }
            } else {
                use_golden = true;
            }
        }
        if use_golden {
            e = if xf >= xm { a - xf } else { b - xf };
            rat = golden * e;
        }
        let step = if rat >= 0.0 { 1.0 } else { -1.0 } * rat.abs().max(tol1);
        let x = (xf + step).clamp(lo, hi);
        let fu = objective(x);
        if fu <= fx {
            if x >= xf {
                a = xf;
            } else {
                b = xf;
            }
            fulc = nfc;
            ffulc = fnfc;
            nfc = xf;
            fnfc = fx;
            xf = x;
            fx = fu;
        } else {
            if x < xf {
                a = x;
            } else {
                b = x;
            }
            if fu <= fnfc || nfc == xf {
                fulc = nfc;
                ffulc = fnfc;
                nfc = x;
                fnfc = fu;
            } else if fu <= ffulc || fulc == xf || fulc == nfc {
                fulc = x;
                ffulc = fu;
            }
        }
        xm = 0.5 * (a + b);
        tol1 = sqrt_eps * xf.abs() + tol / 3.0;
        tol2 = 2.0 * tol1;
    }
    Ok(xf.clamp(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_cdf_limits_and_symmetry() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert_eq!(std_normal_cdf(f64::INFINITY), 1.0);
        assert_eq!(std_normal_cdf(f64::NEG_INFINITY), 0.0);
        for x in [0.1, 0.7, 1.3, 2.9, 5.5] {
            assert_abs_diff_eq!(std_normal_cdf(-x), 1.0 - std_normal_cdf(x), epsilon = 1e-15);
        }
    }

    #[test]
    fn quantile_domain() {
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
        assert!(std_normal_quantile(f64::NAN).is_err());
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn quantile_round_trip_examples() {
        for x in [-3.0, -1.0, 0.7, 2.5] {
            let back = std_normal_quantile(std_normal_cdf(x)).unwrap();
            assert_abs_diff_eq!(back, x, epsilon = 1e-9);
        }
        for p in [1e-300, 1e-20, 1e-5, 0.02, 0.3, 0.6, 0.97, 1.0 - 1e-12] {
            let x = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(x) - p).abs() <= 1e-10 * p.max(1e-6), "p = {p}");
        }
    }

    #[test]
    fn bvn_quadrant_and_margins() {
        assert_abs_diff_eq!(bvn_cdf(0.0, 0.0, 0.5).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        for rho in [-0.95, -0.5, 0.2, 0.93, 0.999] {
            for x in [-2.0, 0.3, 1.7] {
                assert_abs_diff_eq!(
                    bvn_cdf(x, f64::INFINITY, rho).unwrap(),
                    std_normal_cdf(x),
                    epsilon = 1e-15
                );
                assert_eq!(bvn_cdf(f64::NEG_INFINITY, x, rho).unwrap(), 0.0);
            }
        }
        assert!(bvn_cdf(0.0, 0.0, 1.0).is_err());
        assert!(bvn_cdf(0.0, 0.0, -1.5).is_err());
    }

    #[test]
    fn bvn_symmetric_in_arguments() {
        for &(x, y, rho) in &[(0.4, -1.1, 0.3), (2.0, 0.5, -0.8), (-0.2, 1.4, 0.96)] {
            assert_abs_diff_eq!(
                bvn_cdf(x, y, rho).unwrap(),
                bvn_cdf(y, x, rho).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn survival_examples() {
        assert_abs_diff_eq!(bvn_survival(0.0, 0.0, 0.0).unwrap(), 0.25, epsilon = 1e-15);
        for y in [-1.0, 0.0, 0.8] {
            assert_abs_diff_eq!(
                bvn_survival(f64::NEG_INFINITY, y, 0.4).unwrap(),
                1.0 - std_normal_cdf(y),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn bvt_quadrant_identity_for_any_nu() {
        for nu in [0.5, 2.0, 5.0, 30.0] {
            for rho in [-0.6, 0.0, 0.45] {
                assert_abs_diff_eq!(
                    bvt_cdf(0.0, 0.0, rho, nu).unwrap(),
                    0.25 + rho.asin() / (2.0 * PI),
                    epsilon = 1e-12
                );
            }
        }
        assert!(bvt_cdf(0.0, 0.0, 0.2, 0.0).is_err());
        assert!(bvt_cdf(0.0, 0.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn bvt_gaussian_limit() {
        let t = bvt_cdf(1.0, 1.0, 0.3, 1e7).unwrap();
        assert_abs_diff_eq!(t, bvn_cdf(1.0, 1.0, 0.3).unwrap(), epsilon = 1e-6);
        let t = bvt_cdf(0.4, -0.9, -0.5, f64::INFINITY).unwrap();
        assert_abs_diff_eq!(t, bvn_cdf(0.4, -0.9, -0.5).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn minimizer_examples() {
        let x = minimize_scalar_bounded(|x| (x - 0.3).powi(2), -1.0, 1.0, 1e-8).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-8);
        let x = minimize_scalar_bounded(f64::abs, -1.0, 1.0, 1e-8).unwrap();
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-8);
        // minimum on the boundary stays inside the bounds
        let x = minimize_scalar_bounded(|x| x, -1.0, 1.0, 1e-7).unwrap();
        assert!((-1.0..=-1.0 + 1e-6).contains(&x));
        assert!(minimize_scalar_bounded(|x| x, 1.0, 1.0, 1e-7).is_err());
        assert!(minimize_scalar_bounded(|x| x, 2.0, 1.0, 1e-7).is_err());
    }
}
