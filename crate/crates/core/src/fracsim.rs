//! Simulation of fractionally integrated processes.
//!
//! A process with memory parameter `d` is built by applying the truncated
//! fractional integration operator to an innovation sequence that vanishes
//! for t <= 0:
//!
//! ```text
//! X_t = sum_{k=0}^{t-1} (d)_k / k! * u_{t-k} + X_0,        t = 1..n,
//! ```
//!
//! where `(d)_k` is the forward factorial (Pochhammer symbol). The
//! representation is valid for every real `d`, including the unit-root case
//! `d = 1` (partial sums) and `d > 1`. An optional deterministic trend
//! `mu * t^alpha` can be superimposed.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// A finite real-valued time series indexed t = 1..n. Entries are finite and
/// the length is at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort { len: values.len(), min: 2 });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Series { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor enforces len >= 2
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// First differences x_2 - x_1, ..., x_n - x_{n-1}; input length must be
    /// at least 3 so the result is a valid series.
    pub fn difference(&self) -> Result<Series> {
        if self.len() < 3 {
            return Err(Error::SeriesTooShort { len: self.len(), min: 3 });
        }
        Series::new(self.values.windows(2).map(|w| w[1] - w[0]).collect())
    }

    /// Single-column CSV with header `x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x\n");
        for v in &self.values {
            out.push_str(&format!("{v}\n"));
        }
        out
    }
}

/// Innovation model for the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum Innovation {
    /// u_t = sigma * eps_t with eps_t iid standard Gaussian.
    IidGaussian { sigma: f64 },
    /// u_t = sum_{j=0}^{q} coeffs[j] * eps_{t-j}, a finite moving average of
    /// iid standard Gaussians. The q warm-up draws eps_{1-q}..eps_0 are taken
    /// first so u_t is stationary from t = 1.
    LinearFilter { coeffs: Vec<f64> },
}

/// Deterministic trend mu * t^alpha added to the simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trend {
    pub mu: f64,
    pub alpha: f64,
}

/// Full recipe for one simulated path. Identical configs (including seed)
/// produce bit-identical series.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub d: f64,
    pub n: usize,
    pub x0: f64,
    pub innovation: Innovation,
    pub trend: Option<Trend>,
    pub seed: u64,
}

impl SimConfig {
    /// Gaussian innovations with unit variance, no trend, X_0 = 0.
    pub fn gaussian(d: f64, n: usize, seed: u64) -> Self {
        SimConfig {
            d,
            n,
            x0: 0.0,
            innovation: Innovation::IidGaussian { sigma: 1.0 },
            trend: None,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::SeriesTooShort { len: self.n, min: 2 });
        }
        if !self.d.is_finite() {
            return Err(Error::InvalidConfig(format!("d = {} not finite", self.d)));
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidConfig(format!("x0 = {} not finite", self.x0)));
        }
        match &self.innovation {
            Innovation::IidGaussian { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidConfig(format!("sigma = {sigma} must be positive")));
                }
            }
            Innovation::LinearFilter { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::InvalidConfig("empty filter coefficients".into()));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidConfig("non-finite filter coefficient".into()));
                }
            }
        }
        if let Some(Trend { mu, alpha }) = self.trend {
            if !(mu.is_finite() && mu != 0.0) {
                return Err(Error::InvalidConfig(format!("trend mu = {mu} must be nonzero")));
            }
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(Error::InvalidConfig(format!("trend alpha = {alpha} must be positive")));
            }
        }
        Ok(())
    }
}

/// Coefficients a_k = (d)_k / k! for k = 0..count-1, by the recursion
/// a_0 = 1, a_k = a_{k-1} (d + k - 1) / k. Defined for every real d.
pub fn pochhammer_coeffs(d: f64, count: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(count);
    if count == 0 {
        return a;
    }
    a.push(1.0);
    for k in 1..count {
        let prev = a[k - 1];
        a.push(prev * (d + (k as f64 - 1.0)) / k as f64);
    }
    a
}

thread_local! {
    // rustfft caches plans per length inside the planner, so repeated
    // simulations of the same n pay the planning cost once per thread.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

// Prefix of the linear convolution a * u, computed by FFT. Correctness is
// defined by the direct sum x_t = sum_{k<t} a_k u_{t-k}; the cross-check
// against that sum lives in the oracle tests.
fn convolve_prefix(a: &[f64], u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let len = (2 * n - 1).next_power_of_two();
    let mut fa: Vec<Complex<f64>> = Vec::with_capacity(len);
    fa.extend(a.iter().map(|&v| Complex::new(v, 0.0)));
    fa.resize(len, Complex::new(0.0, 0.0));
    let mut fu: Vec<Complex<f64>> = Vec::with_capacity(len);
    fu.extend(u.iter().map(|&v| Complex::new(v, 0.0)));
    fu.resize(len, Complex::new(0.0, 0.0));

    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let forward = planner.plan_fft_forward(len);
        forward.process(&mut fa);
        forward.process(&mut fu);
        for (va, vu) in fa.iter_mut().zip(&fu) {
            *va *= vu;
        }
        planner.plan_fft_inverse(len).process(&mut fa);
    });
    let scale = 1.0 / len as f64;
    fa[..n].iter().map(|v| v.re * scale).collect()
}

/// Truncated fractional integration: output_t = sum_{k=0}^{t-1} a_k u_{t-k}
/// with a = pochhammer_coeffs(d, n). d = 0 is the identity, d = 1 the
/// cumulative sum, and negative d differences fractionally.
pub fn frac_integrate(u: &Series, d: f64) -> Series {
    if d == 0.0 {
        // Identity filter; skipping the FFT keeps it exact to the bit.
        return u.clone();
    }
    let n = u.len();
    let a = pochhammer_coeffs(d, n);
    let values = convolve_prefix(&a, u.values());
    // The convolution of finite inputs is finite; Series::new cannot fail here.
    Series::new(values).expect("convolution of a valid series is a valid series")
}

/// Deterministic fractional trend: the d = alpha fractional integral of the
/// unit step, with closed form (alpha + 1)_{t-1} / (t-1)!. alpha = 1 gives
/// 1, 2, 3, ... and alpha = 2 the triangular numbers.
pub fn frac_trend(alpha: f64, n: usize) -> Result<Series> {
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, min: 2 });
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!("alpha = {alpha} not finite")));
    }
    Series::new(pochhammer_coeffs(alpha + 1.0, n))
}

/// Generates one path from the config: draw innovations (fixed order
/// t = 1..n), fractionally integrate, then add x0 and any trend.
pub fn simulate(config: &SimConfig) -> Result<Series> {
    config.validate()?;
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let u = match &config.innovation {
        Innovation::IidGaussian { sigma } => {
            (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>()
        }
        Innovation::LinearFilter { coeffs } => {
            let q = coeffs.len() - 1;
            let eps: Vec<f64> =
                (0..n + q).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            // eps[i] holds eps_{i+1-q}, so u_t = sum_j c_j eps_{t-j} reads
            // eps[t-1+q-j].
            (1..=n)
                .map(|t| coeffs.iter().enumerate().map(|(j, c)| c * eps[t - 1 + q - j]).sum())
                .collect()
        }
    };

    let u = Series::new(u)?;
    let x = frac_integrate(&u, config.d);
    let mut values = x.into_values();
    for v in &mut values {
        *v += config.x0;
    }
    if let Some(Trend { mu, alpha }) = config.trend {
        for (t, v) in values.iter_mut().enumerate() {
            // t^alpha via exp(alpha ln t); t >= 1 so no singularity.
            *v += mu * ((t + 1) as f64).powf(alpha);
        }
    }
    Series::new(values)
}
