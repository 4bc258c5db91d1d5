//! Acceptance gate. Each test covers one numbered criterion and prints a
//! single PASS/FAIL line with the measured quantities, then asserts.
//!
//! The base seed was fixed before any experiment ran and is never tuned to
//! outcomes; all replication results are bit-reproducible functions of it.

use std::sync::LazyLock;

use longmem::asymptotics::{sample_limit_law, sigma_d2, theoretical_sd};
use longmem::fracsim::{frac_integrate, simulate, SimConfig, Trend};
use longmem::montecarlo::{
    density_grid, kde, run_mc, run_mc_with_threads, silverman_bandwidth, Estimator, MCCell,
    MCResult, MCSpec,
};
use longmem::oracle::{dft_identity_residual, dn_approx_error};
use longmem::spectral::{periodogram, periodogram_full};
use longmem::whittle::{bandwidth, estimate, objective_r, DEFAULT_BOUNDS};
use longmem::Series;

const BASE_SEED: u64 = 123_456_789;

// Reference summary values at 10^4 replications, m = floor(n^0.5):
// (d, n, bias, sd, theoretical sd).
const REFERENCE: [(f64, usize, f64, f64, f64); 6] = [
    (0.7, 200, 0.0002, 0.1977, 0.1336),
    (0.7, 500, 0.0093, 0.1451, 0.1066),
    (0.7, 1000, 0.0101, 0.1162, 0.0898),
    (1.0, 200, -0.0235, 0.1779, 0.1204),
    (1.0, 500, -0.0129, 0.1280, 0.0960),
    (1.0, 1000, -0.0102, 0.1019, 0.0809),
];

// The six-cell experiment shared by criteria 1 and 4.
static TABLE: LazyLock<MCResult> = LazyLock::new(|| {
    run_mc(&MCSpec {
        d_values: vec![0.7, 1.0],
        n_values: vec![200, 500, 1000],
        reps: 10_000,
        bandwidth_exponent: 0.5,
        estimator: Estimator::Raw,
        trend: None,
        base_seed: BASE_SEED,
        retain_estimates: false,
    })
    .expect("summary experiment runs")
});

fn table_cell(d: f64, n: usize) -> &'static MCCell {
    TABLE.cells.iter().find(|c| c.d == d && c.n == n).expect("cell present")
}

fn report(criterion: u32, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("acceptance criterion {criterion} ({name}): {verdict} [{detail}]");
}

#[test]
fn criterion_01_bias_and_sd_replication() {
    let mut worst_bias = 0.0f64;
    let mut worst_sd = 0.0f64;
    for &(d, n, bias, sd, _) in &REFERENCE {
        let cell = table_cell(d, n);
        worst_bias = worst_bias.max((cell.bias - bias).abs());
        worst_sd = worst_sd.max((cell.sd - sd).abs());
    }
    let ok = worst_bias <= 0.010 && worst_sd <= 0.010;
    report(
        1,
        "bias and sd replication at 10^4 reps",
        ok,
        &format!("worst |bias diff| = {worst_bias:.4}, worst |sd diff| = {worst_sd:.4}"),
    );
    assert!(ok);
}

#[test]
fn criterion_02_theoretical_sd_to_four_decimals() {
    let mut worst = 0.0f64;
    for &(d, n, _, _, tsd) in &REFERENCE {
        let m = bandwidth(n, 0.5).unwrap();
        let got = theoretical_sd(d, m).expect("closed form exists for these d");
        worst = worst.max((got - tsd).abs());
    }
    let ok = worst <= 5e-5;
    report(
        2,
        "theoretical sd column to 4 decimals",
        ok,
        &format!("worst deviation = {worst:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_03_mixed_normal_variance() {
    let s = sigma_d2();
    let quadrature_ok = (s - 0.2028).abs() <= 5e-4;
    let draws = sample_limit_law(1.0, 1_000_000, BASE_SEED).unwrap();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let var =
        draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / draws.len() as f64;
    let sampling_ok = (var - s).abs() <= 0.002;
    let ok = quadrature_ok && sampling_ok;
    report(
        3,
        "mixed-normal variance constant",
        ok,
        &format!("sigma_d2 = {s:.6}, sampled variance at 10^6 draws = {var:.6}"),
    );
    assert!(ok);
}

#[test]
fn criterion_04_dispersion_ordering() {
    let mut ok = true;
    let mut detail = String::new();
    for &n in &[200usize, 500, 1000] {
        let tight = table_cell(1.0, n).sd;
        let wide = table_cell(0.7, n).sd;
        ok &= tight < wide;
        detail.push_str(&format!("n={n}: {tight:.4} < {wide:.4}; "));
    }
    report(4, "unit root estimates disperse less", ok, detail.trim_end_matches("; "));
    assert!(ok);
}

#[test]
fn criterion_05_estimates_collapse_to_unity_above_one() {
    let long = run_mc(&MCSpec {
        d_values: vec![1.5],
        n_values: vec![2048],
        reps: 1000,
        bandwidth_exponent: 0.5,
        estimator: Estimator::Raw,
        trend: None,
        base_seed: BASE_SEED,
        retain_estimates: false,
    })
    .unwrap();
    let mean = 1.5 + long.cells[0].bias;
    let mean_ok = (0.90..=1.10).contains(&mean);

    let short = run_mc(&MCSpec {
        d_values: vec![1.5],
        n_values: vec![500],
        reps: 1000,
        bandwidth_exponent: 0.5,
        estimator: Estimator::Raw,
        trend: None,
        base_seed: BASE_SEED,
        retain_estimates: true,
    })
    .unwrap();
    let samples = short.cells[0].estimates.as_ref().unwrap();
    let h = silverman_bandwidth(samples).unwrap();
    let grid = density_grid(samples, h, 512);
    let dens = kde(samples, &grid, Some(h)).unwrap();
    let mode = grid[dens
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0];
    let mode_ok = (mode - 1.0).abs() < 0.1;

    let ok = mean_ok && mode_ok;
    report(
        5,
        "d = 1.5 estimates cluster at unity",
        ok,
        &format!("mean at n=2048 (m=45) = {mean:.4}, density mode at n=500 = {mode:.4}"),
    );
    assert!(ok, "mean={mean}, mode={mode}");
}

#[test]
fn criterion_06_linear_trend_pulls_estimate_to_unity() {
    let run = run_mc(&MCSpec {
        d_values: vec![0.7],
        n_values: vec![2048],
        reps: 1000,
        bandwidth_exponent: 0.5,
        estimator: Estimator::Raw,
        trend: Some(Trend { mu: 1.0, alpha: 1.0 }),
        base_seed: BASE_SEED,
        retain_estimates: false,
    })
    .unwrap();
    let mean = 0.7 + run.cells[0].bias;
    let ok = (0.90..=1.10).contains(&mean);
    report(
        6,
        "linear trend pulls d = 0.7 estimates to unity",
        ok,
        &format!("mean = {mean:.4}"),
    );
    assert!(ok, "mean={mean}");
}

#[test]
fn criterion_07_exact_identity_grid() {
    let mut worst_general = 0.0f64;
    let mut worst_unit = 0.0f64;
    for &n in &[64usize, 256, 1024] {
        for &s in &[1usize, 2, 5, n / 8] {
            for k in 0..20u64 {
                let seed = 900_000 + n as u64 * 100 + s as u64 * 25 + k;
                let u = simulate(&SimConfig::gaussian(0.0, n, seed)).unwrap();
                for &d in &[-0.3, 0.3, 0.7, 1.4] {
                    let rep = dft_identity_residual(&u, d, s).unwrap();
                    worst_general = worst_general.max(rep.rel_residual);
                }
                let rep = dft_identity_residual(&u, 1.0, s).unwrap();
                worst_unit = worst_unit.max(rep.rel_residual);
            }
        }
    }
    let ok = worst_general <= 1e-8 && worst_unit <= 1e-10;
    report(
        7,
        "exact difference-identity grid",
        ok,
        &format!(
            "worst relative residual = {worst_general:.2e}, unit-root form = {worst_unit:.2e}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_truncation_error_rates() {
    let mut ok = true;
    let mut detail = String::new();
    for &theta in &[0.3f64, 0.5] {
        let mut ratio_n = 0.0;
        let mut ratio_s = 0.0;
        let count = 7.0;
        for s in 2usize..=8 {
            ratio_n += dn_approx_error(1024, s, theta) / dn_approx_error(512, s, theta);
            ratio_s += dn_approx_error(1024, 2 * s, theta) / dn_approx_error(1024, s, theta);
        }
        ratio_n /= count;
        ratio_s /= count;
        let target_n = 2f64.powf(-theta);
        ok &= ratio_n >= 0.5 * target_n && ratio_n <= 2.0 * target_n;
        ok &= (0.25..=1.0).contains(&ratio_s);
        detail.push_str(&format!(
            "theta={theta}: n-doubling {ratio_n:.3} (target {target_n:.3}), s-doubling {ratio_s:.3} (target 0.5); "
        ));
    }
    report(8, "truncation error rate checks", ok, detail.trim_end_matches("; "));
    assert!(ok);
}

#[test]
fn criterion_09_property_suite() {
    // Parseval, 1e-12 relative.
    let x = simulate(&SimConfig::gaussian(0.4, 333, BASE_SEED)).unwrap();
    let p = periodogram_full(&x);
    let spectral_sum: f64 = p.ordinates().iter().sum();
    let time_sum =
        x.values().iter().map(|v| v * v).sum::<f64>() / (2.0 * std::f64::consts::PI);
    let parseval_ok = (spectral_sum - time_sum).abs() / time_sum <= 1e-12;

    // Scale and location invariance of the argmin, 1e-10.
    let y = simulate(&SimConfig::gaussian(0.7, 400, BASE_SEED + 1)).unwrap();
    let m = bandwidth(400, 0.5).unwrap();
    let base_fit = estimate(&y, m, DEFAULT_BOUNDS).unwrap();
    let scaled =
        Series::new(y.values().iter().map(|v| 7.3 * v).collect()).unwrap();
    let shifted =
        Series::new(y.values().iter().map(|v| v + 11.0).collect()).unwrap();
    let scale_ok = (estimate(&scaled, m, DEFAULT_BOUNDS).unwrap().d_hat - base_fit.d_hat)
        .abs()
        <= 1e-10;
    let location_ok = (estimate(&shifted, m, DEFAULT_BOUNDS).unwrap().d_hat
        - base_fit.d_hat)
        .abs()
        <= 1e-10;

    // Operator composition, 1e-10 relative to the path scale.
    let u = simulate(&SimConfig::gaussian(0.0, 256, BASE_SEED + 2)).unwrap();
    let twice = frac_integrate(&frac_integrate(&u, 0.4), 0.35);
    let once = frac_integrate(&u, 0.75);
    let scale = once.values().iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let composition_ok = twice
        .values()
        .iter()
        .zip(once.values())
        .all(|(a, b)| (a - b).abs() / scale <= 1e-10);

    // Fine-grid oracle for the minimizer, 1e-3, 50 seeded series.
    let mut grid_ok = true;
    let d0s = [0.3, 0.7, 1.0, 1.2];
    for k in 0..50u64 {
        let d0 = d0s[k as usize % d0s.len()];
        let series = simulate(&SimConfig::gaussian(d0, 256, 40_000 + k)).unwrap();
        let mg = bandwidth(256, 0.5).unwrap();
        let fit = estimate(&series, mg, DEFAULT_BOUNDS).unwrap();
        let pg = periodogram(&series, mg).unwrap();
        let mut best_d = DEFAULT_BOUNDS.0;
        let mut best_r = f64::INFINITY;
        let mut dd = DEFAULT_BOUNDS.0;
        while dd <= DEFAULT_BOUNDS.1 {
            let r = objective_r(&pg, dd, mg).unwrap();
            if r < best_r {
                best_r = r;
                best_d = dd;
            }
            dd += 0.0005;
        }
        grid_ok &= (fit.d_hat - best_d).abs() <= 1e-3;
    }

    // Bit-reproducibility across worker counts.
    let spec = MCSpec {
        d_values: vec![0.7, 1.2],
        n_values: vec![64],
        reps: 16,
        bandwidth_exponent: 0.5,
        estimator: Estimator::Raw,
        trend: None,
        base_seed: BASE_SEED,
        retain_estimates: true,
    };
    let fingerprint = |r: &MCResult| -> Vec<u64> {
        r.cells
            .iter()
            .flat_map(|c| {
                let mut v = vec![c.bias.to_bits(), c.sd.to_bits()];
                v.extend(c.estimates.as_ref().unwrap().iter().map(|e| e.to_bits()));
                v
            })
            .collect()
    };
    let runs = [
        fingerprint(&run_mc_with_threads(&spec, 1).unwrap()),
        fingerprint(&run_mc_with_threads(&spec, 2).unwrap()),
        fingerprint(&run_mc_with_threads(
            &spec,
            std::thread::available_parallelism().map(|v| v.get()).unwrap_or(4).max(2),
        )
        .unwrap()),
    ];
    let repro_ok = runs[0] == runs[1] && runs[0] == runs[2];

    let ok = parseval_ok && scale_ok && location_ok && composition_ok && grid_ok && repro_ok;
    report(
        9,
        "property suite",
        ok,
        &format!(
            "parseval={parseval_ok}, scale={scale_ok}, location={location_ok}, \
             composition={composition_ok}, fine-grid={grid_ok}, reproducible={repro_ok}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_10_excluded_targets_documented() {
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md"))
        .expect("README.md at the workspace root");
    let ok = readme.contains("external historical dataset")
        && readme.contains("infinite-sample limit distributions");
    report(
        10,
        "out-of-scope targets documented",
        ok,
        "README lists the external-data estimates and the infinite-sample limits as non-targets",
    );
    assert!(ok);
}
