//! Exact cross-checks tying the simulator, the DFT, and the binomial
//! coefficients together.
//!
//! The central fact: if X_t is built from u_t by the truncated expansion with
//! X_0 = 0 and theta = 1 - d, then for every lambda
//!
//! ```text
//! w_x(lambda)(1 - e^{i lambda}) = D_n(e^{i lambda}; theta) w_u(lambda)
//!     - (2 pi n)^{-1/2} e^{i n lambda} Utilde_{lambda n}(theta)
//!     - (2 pi n)^{-1/2} e^{i lambda} (e^{i n lambda} X_n - X_0)
//! ```
//!
//! holds as an algebraic identity, with D_n the degree-n truncation of the
//! binomial series of (1 - z)^theta and Utilde a weighted tail sum of the
//! innovations. The identity has zero modelling content, so its residual
//! measures implementation error only: any bug in the simulator, the DFT
//! convention, or the coefficient recursion shows up here at full size.
//! For d = 1 the filter is exact (theta = 0) and the identity collapses to
//! w_x(lambda)(1 - e^{i lambda}) = w_u(lambda) - (2 pi n)^{-1/2} e^{i lambda}
//! (e^{i n lambda} X_n - X_0), which must hold to near machine precision.
//!
//! Everything here favours transparency over speed: per-term phase factors,
//! direct sums, no FFT.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fracsim::{frac_integrate, pochhammer_coeffs, Series};
use crate::spectral::dft;

// Residual normalization floor to keep rel_residual finite for degenerate lhs.
const REL_FLOOR: f64 = 1e-300;

/// Both sides of the difference identity at one frequency, with the three
/// right-hand contributions broken out.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub dn_term: Complex64,
    pub utilde_term: Complex64,
    pub endpoint_term: Complex64,
}

/// D_n(e^{i lambda}; theta) = sum_{k=0}^{n} (-theta)_k / k! e^{i k lambda},
/// the degree-n truncation of the binomial series of (1 - z)^theta evaluated
/// on the unit circle. Phase factors are computed per term so the truncation
/// is the only error source.
pub fn dn_poly(lambda: f64, theta: f64, n: usize) -> Complex64 {
    let coeffs = pochhammer_coeffs(-theta, n + 1);
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| c * Complex64::from_polar(1.0, lambda * k as f64))
        .sum()
}

/// (1 - e^{i lambda})^theta on the principal branch, written in polar form
/// |2 sin(lambda/2)|^theta exp[i theta (lambda - pi)/2]. This is the
/// frequency response of theta-fold differencing; using modulus and argument
/// explicitly avoids branch ambiguity of a generic complex power near
/// lambda = 0.
pub fn frac_filter_response(lambda: f64, theta: f64) -> Complex64 {
    let modulus = (2.0 * (lambda / 2.0).sin()).abs();
    Complex64::from_polar(modulus.powf(theta), theta * (lambda - PI) / 2.0)
}

/// Utilde_{lambda n}(theta) = sum_{p=0}^{n-1} thetatilde_{lambda p}
/// e^{-i p lambda} u_{n-p}, where thetatilde_{lambda p} =
/// sum_{k=p+1}^{n} (-theta)_k / k! e^{i k lambda}. The tail coefficients
/// come from one backward cumulative sum, O(n) after coefficient generation.
pub fn u_tilde(lambda: f64, theta: f64, u: &Series) -> Complex64 {
    let n = u.len();
    let coeffs = pochhammer_coeffs(-theta, n + 1);
    // tail[p] = sum_{k=p}^{n} c_k e^{i k lambda}; thetatilde_p = tail[p+1].
    let mut tail = vec![Complex64::new(0.0, 0.0); n + 2];
    for k in (0..=n).rev() {
        tail[k] = tail[k + 1] + coeffs[k] * Complex64::from_polar(1.0, lambda * k as f64);
    }
    let vals = u.values();
    (0..n)
        .map(|p| tail[p + 1] * Complex64::from_polar(1.0, -lambda * p as f64) * vals[n - 1 - p])
        .sum()
}

/// Builds X = frac_integrate(u, d) with X_0 = 0 and evaluates both sides of
/// the difference identity at lambda_s. For d = 1 the exact two-term form is
/// used (the filter polynomial is 1 and the tail sum vanishes identically).
/// Valid for 1 <= s <= n-1; s = n duplicates frequency zero and is rejected.
pub fn dft_identity_residual(u: &Series, d: f64, s: usize) -> Result<IdentityReport> {
    let n = u.len();
    if s < 1 || s > n - 1 {
        return Err(Error::FrequencyIndex { s, max: n - 1 });
    }
    let x = frac_integrate(u, d);
    let lambda = 2.0 * PI * s as f64 / n as f64;
    let w_x = dft(&x, s)?;
    let w_u = dft(u, s)?;
    let ei_l = Complex64::from_polar(1.0, lambda);
    let ei_nl = Complex64::from_polar(1.0, lambda * n as f64);
    let root = (2.0 * PI * n as f64).sqrt();
    let x_n = x.values()[n - 1];

    let lhs = w_x * (Complex64::new(1.0, 0.0) - ei_l);
    let (dn_term, utilde_term) = if d == 1.0 {
        (w_u, Complex64::new(0.0, 0.0))
    } else {
        let theta = 1.0 - d;
        (dn_poly(lambda, theta, n) * w_u, -ei_nl / root * u_tilde(lambda, theta, u))
    };
    let endpoint_term = -ei_l / root * (ei_nl * x_n);
    let rhs = dn_term + utilde_term + endpoint_term;
    let abs_residual = (lhs - rhs).norm();
    let rel_residual = abs_residual / lhs.norm().max(REL_FLOOR);
    Ok(IdentityReport { lhs, rhs, abs_residual, rel_residual, dn_term, utilde_term, endpoint_term })
}

/// |D_n(e^{i lambda_s}; theta) - (1 - e^{i lambda_s})^theta|. The truncation
/// error decays like n^{-theta} s^{-1}, which the rate tests verify by
/// doubling n and s. Meaningful for 1 <= s <= n/4.
pub fn dn_approx_error(n: usize, s: usize, theta: f64) -> f64 {
    debug_assert!(s >= 1 && 4 * s <= n);
    let lambda = 2.0 * PI * s as f64 / n as f64;
    (dn_poly(lambda, theta, n) - frac_filter_response(lambda, theta)).norm()
}

/// Relative deviation |w_{t^alpha}(lambda_s) / L - 1| of the exact DFT of the
/// power trend t^alpha from its leading term
/// L = -(1 - e^{i lambda_s})^{-1} n^alpha / sqrt(2 pi n).
/// The deviation is O(s^{-min(alpha,1)}) + O(n^{-1} s): it first shrinks in s
/// and then grows once the second term takes over.
pub fn trend_dft_check(alpha: f64, n: usize, s: usize) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("trend exponent must be positive, got {alpha}")));
    }
    let trend = Series::new((1..=n).map(|t| (t as f64).powf(alpha)).collect())?;
    let exact = dft(&trend, s)?;
    let lambda = 2.0 * PI * s as f64 / n as f64;
    let ei_l = Complex64::from_polar(1.0, lambda);
    let leading = -(Complex64::new(1.0, 0.0) - ei_l).inv() * (n as f64).powf(alpha)
        / (2.0 * PI * n as f64).sqrt();
    Ok((exact / leading - Complex64::new(1.0, 0.0)).norm())
}

/// O(n^2) reference form of the truncated expansion,
/// X_t = sum_{k=0}^{t-1} (d)_k / k! u_{t-k}. The production path convolves
/// via FFT; this one sums term by term and exists to catch it lying.
pub fn frac_integrate_direct(u: &Series, d: f64) -> Series {
    let n = u.len();
    let coeffs = pochhammer_coeffs(d, n);
    let vals = u.values();
    let x: Vec<f64> =
        (1..=n).map(|t| (0..t).map(|k| coeffs[k] * vals[t - 1 - k]).sum()).collect();
    Series::new(x).expect("output length equals input length")
}
