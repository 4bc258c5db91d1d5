//! Limit-theory utilities for the local Whittle estimator: the regime
//! catalogue, the constant J(d0), the mixed-normal variance function and its
//! Gaussian average, theoretical standard errors, and samplers for the
//! normalized limit distributions.
//!
//! Regimes by the true memory parameter d0:
//!
//! * (1/2, 3/4)  normal:        m^{1/2}(d_hat - d0) -> (1/2) U
//! * = 3/4       boundary:      m^{1/2}(d_hat - d0) -> (1/2) U + J(3/4) W^2
//! * (3/4, 1)    nonnormal:     m^{2-2 d0}(d_hat - d0) -> J(d0) W^2
//! * = 1         mixed-normal:  m^{1/2}(d_hat - 1) -> MN(0, sigma^2(W))
//! * > 1         degenerate:    d_hat -> 1 in probability (no rate)
//!
//! with U, W independent standard normals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Limit regime labels. Also used by estimation results, where the label is
/// assigned from the point estimate by reporting cutoffs rather than from the
/// unknown true d0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Normal,
    Boundary,
    Nonnormal,
    MixedNormal,
    Degenerate,
}

/// Normalization applied to d_hat - d0 in the limit statement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "exponent")]
pub enum Rate {
    /// m^{1/2}
    SqrtM,
    /// m^{e} with e = 2 - 2 d0 (slower than m^{1/2} in the nonnormal regime)
    PowM(f64),
    /// No normalization: the degenerate regime has convergence in
    /// probability only.
    Unnormalized,
}

impl Rate {
    pub fn describe(&self) -> String {
        match self {
            Rate::SqrtM => "m^(1/2)".to_string(),
            Rate::PowM(e) => format!("m^({e})"),
            Rate::Unnormalized => "none".to_string(),
        }
    }
}

/// Regime-specific constants of the limit distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LimitParams {
    /// (1/2) U: half a standard normal.
    Normal,
    /// (1/2) U + J(3/4) W^2.
    Boundary { j: f64 },
    /// J(d0) W^2: scaled chi-square(1).
    Nonnormal { j: f64 },
    /// Normal with random variance sigma^2(W); unconditional variance
    /// sigma_d2.
    MixedNormal { sigma_d2: f64 },
    /// Point mass at 1 - d0: the estimator collapses to unity.
    Degenerate { shift: f64 },
}

/// Description of the limiting distribution of the normalized estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitLaw {
    pub regime: Regime,
    pub rate: Rate,
    pub params: LimitParams,
}

/// Catalogue lookup by the true memory parameter. Defined for d0 > 1/2; the
/// comparisons with 3/4 and 1 are exact.
pub fn limit_law(d0: f64) -> Result<LimitLaw> {
    if !d0.is_finite() || d0 <= 0.5 {
        return Err(Error::Domain(format!("limit regimes are catalogued for d0 > 1/2, got {d0}")));
    }
    let law = if d0 < 0.75 {
        LimitLaw { regime: Regime::Normal, rate: Rate::SqrtM, params: LimitParams::Normal }
    } else if d0 == 0.75 {
        LimitLaw {
            regime: Regime::Boundary,
            rate: Rate::SqrtM,
            params: LimitParams::Boundary { j: j_const(0.75)? },
        }
    } else if d0 < 1.0 {
        LimitLaw {
            regime: Regime::Nonnormal,
            rate: Rate::PowM(2.0 - 2.0 * d0),
            params: LimitParams::Nonnormal { j: j_const(d0)? },
        }
    } else if d0 == 1.0 {
        LimitLaw {
            regime: Regime::MixedNormal,
            rate: Rate::SqrtM,
            params: LimitParams::MixedNormal { sigma_d2: sigma_d2() },
        }
    } else {
        LimitLaw {
            regime: Regime::Degenerate,
            rate: Rate::Unnormalized,
            params: LimitParams::Degenerate { shift: 1.0 - d0 },
        }
    };
    Ok(law)
}

/// J(d0) = (2 pi)^{2 d0 - 2} Gamma(d0)^{-2} (2 d0 - 1)^{-3} (1 - d0),
/// the scale of the W^2 component for d0 in (1/2, 1).
pub fn j_const(d0: f64) -> Result<f64> {
    if !(d0 > 0.5 && d0 < 1.0) {
        return Err(Error::Domain(format!("j_const needs d0 in (1/2, 1), got {d0}")));
    }
    let g = gamma(d0);
    Ok((2.0 * std::f64::consts::PI).powf(2.0 * d0 - 2.0)
        * g.powi(-2)
        * (2.0 * d0 - 1.0).powi(-3)
        * (1.0 - d0))
}

/// Conditional variance of the mixed-normal limit:
/// sigma^2(h) = (1/4) (1 + 2 h^2) / (1 + 2 h^2 + h^4). Symmetric, bounded by
/// 1/4, and vanishing as |h| grows.
pub fn sigma2_mixed(h: f64) -> f64 {
    if h.is_infinite() {
        return 0.0;
    }
    let h2 = h * h;
    0.25 * (1.0 + 2.0 * h2) / (1.0 + 2.0 * h2 + h2 * h2)
}

// Adaptive Simpson quadrature with the standard 15-fold error estimate.
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    adaptive_step(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Unconditional variance of the mixed-normal limit:
/// integral of sigma2_mixed against the standard normal density, by adaptive
/// quadrature over [-10, 10] to absolute tolerance 1e-7. The truncated tails
/// contribute less than 1e-20. Evaluates to 0.2028 (4 decimals).
pub fn sigma_d2() -> f64 {
    let integrand = |h: f64| {
        sigma2_mixed(h) * (-0.5 * h * h).exp() / (2.0 * std::f64::consts::PI).sqrt()
    };
    adaptive_simpson(integrand, -10.0, 10.0, 1e-7)
}

/// Asymptotic standard deviation of d_hat implied by the limit law, when that
/// law is a fixed-variance (mixed) normal: 1/(2 sqrt m) for d0 in (1/2, 3/4)
/// and sqrt(sigma_d2)/sqrt(m) at d0 = 1. None in the other regimes, where the
/// LimitLaw carries the description instead.
pub fn theoretical_sd(d0: f64, m: usize) -> Option<f64> {
    if m == 0 {
        return None;
    }
    let sqrt_m = (m as f64).sqrt();
    if d0 > 0.5 && d0 < 0.75 {
        Some(0.5 / sqrt_m)
    } else if d0 == 1.0 {
        Some(sigma_d2().sqrt() / sqrt_m)
    } else {
        None
    }
}

/// Draws `reps` iid samples from the normalized limit distribution of the
/// regime selected by d0. Deterministic in the seed; the per-draw order of
/// the underlying standard normals is fixed.
pub fn sample_limit_law(d0: f64, reps: usize, seed: u64) -> Result<Vec<f64>> {
    let law = limit_law(d0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(reps);
    for _ in 0..reps {
        let draw = match law.params {
            LimitParams::Normal => 0.5 * rng.sample::<f64, _>(StandardNormal),
            LimitParams::Boundary { j } => {
                let u: f64 = rng.sample(StandardNormal);
                let w: f64 = rng.sample(StandardNormal);
                0.5 * u + j * w * w
            }
            LimitParams::Nonnormal { j } => {
                let w: f64 = rng.sample(StandardNormal);
                j * w * w
            }
            LimitParams::MixedNormal { .. } => {
                let w: f64 = rng.sample(StandardNormal);
                let z: f64 = rng.sample(StandardNormal);
                sigma2_mixed(w).sqrt() * z
            }
            LimitParams::Degenerate { shift } => shift,
        };
        out.push(draw);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Frozen with 30-digit arbitrary-precision arithmetic (independent gamma
    // and quadrature implementations).
    const J_075: f64 = 0.531339949958421826;
    const J_08: f64 = 0.327511790018102486;
    const J_09: f64 = 0.118424182677234373;
    const SIGMA_D2: f64 = 0.20283977120939923577;

    #[test]
    fn j_const_frozen_values() {
        assert_abs_diff_eq!(j_const(0.75).unwrap(), J_075, epsilon = 1e-12);
        assert_abs_diff_eq!(j_const(0.8).unwrap(), J_08, epsilon = 1e-12);
        assert_abs_diff_eq!(j_const(0.9).unwrap(), J_09, epsilon = 1e-12);
    }

    #[test]
    fn j_const_vanishes_at_the_right_edge() {
        assert!(j_const(1.0 - 1e-9).unwrap() < 1e-6);
        assert!(j_const(0.5).is_err());
        assert!(j_const(1.0).is_err());
    }

    #[test]
    fn j_const_positive_and_strictly_decreasing_inside() {
        // (2 d0 - 1)^{-3} gives a pole at 1/2 and (1 - d0) a zero at 1; in
        // between the function falls monotonically.
        assert!(j_const(0.5001).unwrap() > 1e9);
        let mut prev = f64::INFINITY;
        let mut d = 0.505;
        while d < 0.9995 {
            let cur = j_const(d).unwrap();
            assert!(cur > 0.0);
            assert!(cur < prev, "not decreasing at {d}");
            prev = cur;
            d += 0.005;
        }
    }

    #[test]
    fn sigma2_mixed_spot_values_and_bounds() {
        assert_abs_diff_eq!(sigma2_mixed(0.0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(sigma2_mixed(1.0), 0.1875, epsilon = 1e-15);
        assert_abs_diff_eq!(sigma2_mixed(2.0), 0.09, epsilon = 1e-15);
        assert!(sigma2_mixed(1e6) < 1e-11);
        assert_eq!(sigma2_mixed(f64::INFINITY), 0.0);
        for i in 0..100 {
            let h = -5.0 + 0.1 * i as f64;
            let v = sigma2_mixed(h);
            assert!(v > 0.0 && v <= 0.25);
            assert_eq!(v, sigma2_mixed(-h));
        }
    }

    #[test]
    fn sigma_d2_matches_high_precision_reference() {
        // The quadrature promises 1e-7 absolute; it lands within ~2e-8 of the
        // 30-digit reference value.
        assert_abs_diff_eq!(sigma_d2(), SIGMA_D2, epsilon = 1e-7);
        assert!((sigma_d2() - SIGMA_D2).abs() < 5e-8);
    }

    #[test]
    fn quadrature_self_consistency_at_tighter_tolerance() {
        let integrand = |h: f64| {
            sigma2_mixed(h) * (-0.5 * h * h).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        let loose = adaptive_simpson(integrand, -10.0, 10.0, 1e-7);
        let tight = adaptive_simpson(integrand, -10.0, 10.0, 5e-8);
        assert!((loose - tight).abs() < 1e-6);
    }

    #[test]
    fn integrand_spot_value_at_zero() {
        let at_zero = sigma2_mixed(0.0) / (2.0 * std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(at_zero, 0.09974, epsilon = 5e-6);
    }

    #[test]
    fn theoretical_sd_reference_column() {
        // (d0, m, expected to 4 decimals)
        let cases = [
            (0.7, 14, 0.1336),
            (0.7, 22, 0.1066),
            (0.7, 31, 0.0898),
            (1.0, 14, 0.1204),
            (1.0, 22, 0.0960),
            (1.0, 31, 0.0809),
        ];
        for (d0, m, want) in cases {
            let got = theoretical_sd(d0, m).unwrap();
            assert!((got - want).abs() < 5e-5, "d0={d0} m={m} got={got}");
        }
        assert_eq!(theoretical_sd(0.7, 14).unwrap(), 0.5 / 14f64.sqrt());
    }

    #[test]
    fn theoretical_sd_absent_outside_fixed_variance_regimes() {
        assert!(theoretical_sd(0.75, 14).is_none());
        assert!(theoretical_sd(0.85, 14).is_none());
        assert!(theoretical_sd(1.5, 14).is_none());
        assert!(theoretical_sd(0.3, 14).is_none());
        assert!(theoretical_sd(0.7, 0).is_none());
    }

    #[test]
    fn regime_catalogue_by_true_parameter() {
        assert!(limit_law(0.5).is_err());
        assert_eq!(limit_law(0.6).unwrap().regime, Regime::Normal);
        assert_eq!(limit_law(0.75).unwrap().regime, Regime::Boundary);
        assert_eq!(limit_law(0.9).unwrap().regime, Regime::Nonnormal);
        assert_eq!(limit_law(1.0).unwrap().regime, Regime::MixedNormal);
        assert_eq!(limit_law(1.5).unwrap().regime, Regime::Degenerate);
        match limit_law(0.9).unwrap().rate {
            Rate::PowM(e) => assert_abs_diff_eq!(e, 0.2, epsilon = 1e-15),
            other => panic!("unexpected rate {other:?}"),
        }
    }

    #[test]
    fn normal_regime_sample_sd_approaches_half() {
        let draws = sample_limit_law(0.6, 200_000, 11).unwrap();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var =
            draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!((var.sqrt() - 0.5).abs() < 0.005);
    }

    #[test]
    fn nonnormal_regime_is_nonnegative_with_mean_j() {
        let draws = sample_limit_law(0.85, 200_000, 12).unwrap();
        assert!(draws.iter().all(|&x| x >= 0.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let j = j_const(0.85).unwrap();
        assert!((mean - j).abs() < 0.01, "mean={mean} j={j}");
    }

    #[test]
    fn mixed_normal_variance_below_quarter() {
        let draws = sample_limit_law(1.0, 200_000, 13).unwrap();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var =
            draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!(var < 0.25);
        assert!((var - SIGMA_D2).abs() < 0.005);
    }

    #[test]
    fn degenerate_regime_is_a_point_mass() {
        let draws = sample_limit_law(1.5, 10, 14).unwrap();
        assert!(draws.iter().all(|&x| x == -0.5));
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let a = sample_limit_law(0.8, 100, 7).unwrap();
        let b = sample_limit_law(0.8, 100, 7).unwrap();
        assert_eq!(a, b);
    }
}
