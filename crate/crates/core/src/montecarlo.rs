//! Replicated simulation-estimation experiments.
//!
//! Every replication derives its own RNG seed from (base_seed, d, n, rep)
//! through a splitmix64 chain, so no two replications share state and the
//! result of a run is a pure function of its MCSpec: the same MCSpec gives
//! the same MCResult bit for bit whether it runs on one thread or sixty-four.
//! Replications execute in parallel through rayon; summaries are reduced
//! sequentially in replication order.

use rayon::prelude::*;

use crate::asymptotics::theoretical_sd;
use crate::error::{Error, Result};
use crate::fracsim::{simulate, Innovation, SimConfig, Trend};
use crate::whittle::{bandwidth, estimate, estimate_differenced, DEFAULT_BOUNDS};

/// Which estimator each replication applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Raw,
    Differenced,
}

/// One experiment: the cross product of d_values and n_values, `reps`
/// replications per cell, Gaussian innovations, optional deterministic trend.
#[derive(Debug, Clone, PartialEq)]
pub struct MCSpec {
    pub d_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub reps: usize,
    pub bandwidth_exponent: f64,
    pub estimator: Estimator,
    pub trend: Option<Trend>,
    pub base_seed: u64,
    /// Keep the per-replication estimates in each cell. Off by default;
    /// density plots need them, summary tables do not, and 10^4+ reps per
    /// cell add up.
    pub retain_estimates: bool,
}

impl MCSpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 8) {
            return Err(Error::InvalidConfig(format!("n = {n} too small, need n >= 8")));
        }
        if !(self.bandwidth_exponent > 0.0 && self.bandwidth_exponent < 1.0) {
            return Err(Error::BandwidthExponent(self.bandwidth_exponent));
        }
        if let Some(d) = self.d_values.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite d = {d}")));
        }
        Ok(())
    }
}

/// Summary of one (d, n) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MCCell {
    pub d: f64,
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    pub bias: f64,
    pub sd: f64,
    pub tsd: Option<f64>,
    pub estimates: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCResult {
    pub cells: Vec<MCCell>,
}

impl MCResult {
    /// CSV with columns `d,n,m,reps,bias,sd,tsd`; tsd is empty where no
    /// closed-form value exists.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,n,m,reps,bias,sd,tsd\n");
        for c in &self.cells {
            let tsd = c.tsd.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{tsd}\n",
                c.d, c.n, c.m, c.reps, c.bias, c.sd
            ));
        }
        out
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `rep` of cell (d, n): a splitmix64 chain over the
/// base seed, the bit pattern of d, n and the replication index. Stable
/// across versions; changing it invalidates recorded experiment output.
pub fn rep_seed(base_seed: u64, d: f64, n: usize, rep: u64) -> u64 {
    let mut h = splitmix64(base_seed);
    h = splitmix64(h ^ d.to_bits());
    h = splitmix64(h ^ n as u64);
    h = splitmix64(h ^ rep);
    h
}

fn run_cell(spec: &MCSpec, d: f64, n: usize) -> Result<MCCell> {
    let m = match spec.estimator {
        Estimator::Raw => bandwidth(n, spec.bandwidth_exponent)?,
        // The estimator sees the differenced series, one observation shorter.
        Estimator::Differenced => bandwidth(n - 1, spec.bandwidth_exponent)?,
    };
    let estimates: Vec<f64> = (1..=spec.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let cfg = SimConfig {
                d,
                n,
                x0: 0.0,
                innovation: Innovation::IidGaussian { sigma: 1.0 },
                trend: spec.trend,
                seed: rep_seed(spec.base_seed, d, n, rep),
            };
            let wrap = |source: Error| Error::Replication { d, n, rep, source: Box::new(source) };
            let x = simulate(&cfg).map_err(wrap)?;
            let fit = match spec.estimator {
                Estimator::Raw => estimate(&x, m, DEFAULT_BOUNDS),
                Estimator::Differenced => estimate_differenced(&x, m, DEFAULT_BOUNDS),
            }
            .map_err(wrap)?;
            Ok(fit.d_hat)
        })
        .collect::<Result<_>>()?;

    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let var = estimates.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / estimates.len() as f64;
    Ok(MCCell {
        d,
        n,
        m,
        reps: spec.reps,
        bias: mean - d,
        sd: var.sqrt(),
        tsd: theoretical_sd(d, m),
        estimates: spec.retain_estimates.then_some(estimates),
    })
}

/// Runs the experiment on the current rayon pool. Cells appear in the output
/// in (d, n) iteration order; any failed replication aborts the whole run
/// with the cell and replication index in the error.
pub fn run_mc(spec: &MCSpec) -> Result<MCResult> {
    spec.validate()?;
    let mut cells = Vec::with_capacity(spec.d_values.len() * spec.n_values.len());
    for &d in &spec.d_values {
        for &n in &spec.n_values {
            cells.push(run_cell(spec, d, n)?);
        }
    }
    Ok(MCResult { cells })
}

/// Same as run_mc but on a dedicated pool with exactly `threads` workers.
/// Exists so determinism under different degrees of parallelism is testable;
/// the result must be bit-identical to run_mc's.
pub fn run_mc_with_threads(spec: &MCSpec, threads: usize) -> Result<MCResult> {
    if threads < 1 {
        return Err(Error::InvalidConfig("thread count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_mc(spec))
}

/// Silverman's bandwidth 0.9 min(sd, iqr/1.34) N^{-1/5}, floored at 1e-12 so
/// degenerate samples still yield a usable (if absurdly spiky) kernel.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::SeriesTooShort { len: samples.len(), min: 2 });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = sd.min(iqr / 1.34);
    Ok((0.9 * spread * n.powf(-0.2)).max(1e-12))
}

// Linear-interpolation quantile on a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Gaussian-kernel density estimate evaluated on `grid`. With no explicit
/// bandwidth, Silverman's rule applies. Needs at least two samples.
pub fn kde(samples: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<Vec<f64>> {
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::Domain(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(samples)?,
    };
    if samples.len() < 2 {
        return Err(Error::SeriesTooShort { len: samples.len(), min: 2 });
    }
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    Ok(grid
        .iter()
        .map(|&g| {
            norm * samples
                .iter()
                .map(|&x| {
                    let z = (g - x) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect())
}

/// Evenly spaced grid covering the sample range plus four bandwidths on each
/// side, on which the kernel density integrates to 1 up to edge leakage.
pub fn density_grid(samples: &[f64], bandwidth: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "grid needs at least two points");
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min) - 4.0 * bandwidth;
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 4.0 * bandwidth;
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}
