//! Command-line front end: simulation, estimation, replicated experiments,
//! density plot data, limit-law lookups, and the exact-identity self check.
//!
//! The exit codes are a stable contract: 0 success, 2 usage error, 3 I/O
//! error, 4 numeric or degenerate-input error. Every subcommand is
//! deterministic given fixed flags and seeds, so outputs are byte-identical
//! across runs. All CSV output is comma-separated with a header row.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use longmem::montecarlo::{density_grid, silverman_bandwidth};
use longmem::oracle::dft_identity_residual;
use longmem::{
    bandwidth, estimate, estimate_differenced, kde, limit_law, run_mc, run_mc_with_threads,
    sample_limit_law, simulate, theoretical_sd, Error, Estimator, Innovation, LimitLaw, MCSpec,
    Series, SimConfig, Trend, WhittleFit, DEFAULT_BOUNDS, DEFAULT_EXPONENT,
};

#[derive(Parser)]
#[command(
    name = "longmem",
    version,
    about = "Local Whittle estimation of the memory parameter of long-range dependent series"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a fractionally integrated path and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate the memory parameter from a CSV file and write the fit as JSON.
    Estimate(EstimateArgs),
    /// Run a replicated simulation experiment and write per-cell summaries as CSV.
    Montecarlo(MontecarloArgs),
    /// Kernel density of replicated estimates, as CSV plot data.
    Density(DensityArgs),
    /// Limit law and theoretical standard error for a true memory parameter.
    Asymptotics(AsymptoticsArgs),
    /// Check the exact DFT difference identities over a seeded grid.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Memory parameter of the generated path.
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
    /// Series length.
    #[arg(long)]
    n: usize,
    /// RNG seed; identical seeds give identical files.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial condition added to every observation.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
    /// Innovation standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Trend scale mu in mu * t^alpha.
    #[arg(long, requires = "trend_alpha", allow_hyphen_values = true)]
    trend_mu: Option<f64>,
    /// Trend exponent alpha in mu * t^alpha.
    #[arg(long, requires = "trend_mu")]
    trend_alpha: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input CSV with a column named x, or long format with columns series,x.
    #[arg(long)]
    input: PathBuf,
    /// Bandwidth: number of low frequencies entering the objective.
    #[arg(long, conflicts_with = "m_exponent")]
    m: Option<usize>,
    /// Bandwidth rule m = floor(n^e) used when --m is not given.
    #[arg(long)]
    m_exponent: Option<f64>,
    /// Search interval lo:hi for the memory parameter.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    range: Option<(f64, f64)>,
    /// Difference the series, estimate d - 1, add one back.
    #[arg(long)]
    diff: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MontecarloArgs {
    /// Comma-separated true memory parameters.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    d: Vec<f64>,
    /// Comma-separated series lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Replications per (d, n) cell.
    #[arg(long)]
    reps: usize,
    /// Bandwidth rule m = floor(n^e).
    #[arg(long, default_value_t = DEFAULT_EXPONENT)]
    m_exponent: f64,
    /// Use the differenced estimator.
    #[arg(long)]
    diff: bool,
    /// Trend scale mu in mu * t^alpha added to every simulated path.
    #[arg(long, requires = "trend_alpha", allow_hyphen_values = true)]
    trend_mu: Option<f64>,
    /// Trend exponent alpha in mu * t^alpha.
    #[arg(long, requires = "trend_mu")]
    trend_alpha: Option<f64>,
    /// Base seed; per-replication seeds derive from it, d, n and the index.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    /// True memory parameter of the simulated cell.
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
    /// Series length.
    #[arg(long)]
    n: usize,
    /// Number of replicated estimates behind the density.
    #[arg(long)]
    reps: usize,
    /// Bandwidth rule m = floor(n^e).
    #[arg(long, default_value_t = DEFAULT_EXPONENT)]
    m_exponent: f64,
    /// Use the differenced estimator.
    #[arg(long)]
    diff: bool,
    /// Base seed for the replicated experiment.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of grid points.
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Kernel bandwidth; Silverman's rule when omitted.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AsymptoticsArgs {
    /// True memory parameter, must exceed 1/2.
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
    /// Bandwidth at which to evaluate the theoretical standard deviation.
    #[arg(long)]
    m: Option<usize>,
    /// Draw this many samples from the limit law and write them as CSV
    /// instead of the JSON description.
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed for --samples.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed run: message plus the exit code class it belongs to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: String) -> Self {
        Failure { code: 2, message }
    }

    fn io(message: String) -> Self {
        Failure { code: 3, message }
    }

    fn numeric(message: String) -> Self {
        Failure { code: 4, message }
    }
}

// Data-content problems (degenerate spectra, non-finite values, numeric
// domain violations) are class 4; everything else a library call can reject
// is a bad parameter, class 2. Flags the library cannot see are validated
// before work begins.
fn exit_class(err: &Error) -> u8 {
    match err {
        Error::Degenerate(_) | Error::Domain(_) | Error::NonFiniteValue { .. } => 4,
        Error::Replication { source, .. } => exit_class(source),
        _ => 2,
    }
}

fn core_failure(err: Error) -> Failure {
    Failure { code: exit_class(&err), message: err.to_string() }
}

fn csv_failure(err: csv::Error, path: &Path) -> Failure {
    match err.kind() {
        csv::ErrorKind::Io(_) => Failure::io(format!("{}: {err}", path.display())),
        _ => Failure::usage(format!("{}: {err}", path.display())),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("lower bound {lo:?} is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("upper bound {hi:?} is not a number"))?;
    Ok((lo, hi))
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, contents)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| Failure::io(format!("cannot write to stdout: {e}"))),
    }
}

/// Worker cap for the replicated experiments; unset means the rayon default
/// (machine cores).
fn mc_threads() -> Result<Option<usize>, Failure> {
    match std::env::var("LONGMEM_THREADS") {
        Ok(raw) => {
            let t: usize = raw
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("LONGMEM_THREADS = {raw:?} is not a positive integer")))?;
            if t == 0 {
                return Err(Failure::usage("LONGMEM_THREADS must be at least 1".into()));
            }
            Ok(Some(t))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::usage(format!("LONGMEM_THREADS: {e}"))),
    }
}

fn run_spec(spec: &MCSpec) -> Result<longmem::MCResult, Failure> {
    let result = match mc_threads()? {
        Some(t) => run_mc_with_threads(spec, t),
        None => run_mc(spec),
    };
    result.map_err(core_failure)
}

fn trend_from(mu: Option<f64>, alpha: Option<f64>) -> Option<Trend> {
    match (mu, alpha) {
        (Some(mu), Some(alpha)) => Some(Trend { mu, alpha }),
        _ => None,
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let config = SimConfig {
        d: args.d,
        n: args.n,
        x0: args.x0,
        innovation: Innovation::IidGaussian { sigma: args.sigma },
        trend: trend_from(args.trend_mu, args.trend_alpha),
        seed: args.seed,
    };
    let x = simulate(&config).map_err(core_failure)?;
    write_output(args.out.as_deref(), &x.to_csv())
}

/// Input rows grouped by the optional series column, in first-appearance
/// order. A file without a series column is one unlabeled series.
fn read_series(path: &Path) -> Result<Vec<(Option<String>, Vec<f64>)>, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_failure(e, path))?;
    let headers = rdr.headers().map_err(|e| csv_failure(e, path))?.clone();
    let x_idx = headers
        .iter()
        .position(|h| h == "x")
        .ok_or_else(|| Failure::usage(format!("{}: no column named x", path.display())))?;
    let series_idx = headers.iter().position(|h| h == "series");

    let mut order: Vec<Option<String>> = Vec::new();
    let mut groups: HashMap<Option<String>, Vec<f64>> = HashMap::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_failure(e, path))?;
        let line = row + 2;
        let raw = record
            .get(x_idx)
            .ok_or_else(|| Failure::usage(format!("{}: line {line} has no x field", path.display())))?;
        let value: f64 = raw.parse().map_err(|_| {
            Failure::usage(format!("{}: line {line}: {raw:?} is not a number", path.display()))
        })?;
        let label = match series_idx {
            Some(idx) => Some(
                record
                    .get(idx)
                    .ok_or_else(|| {
                        Failure::usage(format!("{}: line {line} has no series field", path.display()))
                    })?
                    .to_string(),
            ),
            None => None,
        };
        if !groups.contains_key(&label) {
            order.push(label.clone());
        }
        groups.entry(label).or_default().push(value);
    }
    if order.is_empty() {
        return Err(Failure::usage(format!("{}: no data rows", path.display())));
    }
    Ok(order
        .into_iter()
        .map(|label| {
            let values = groups.remove(&label).expect("label collected above");
            (label, values)
        })
        .collect())
}

#[derive(Serialize)]
struct LabeledFit<'a> {
    series: &'a str,
    fit: &'a WhittleFit,
}

fn fit_one(args: &EstimateArgs, values: Vec<f64>) -> Result<WhittleFit, Failure> {
    let x = Series::new(values).map_err(core_failure)?;
    // The differenced estimator sees one observation fewer, so the bandwidth
    // rule applies to n - 1.
    let effective_n = if args.diff { x.len() - 1 } else { x.len() };
    let m = match args.m {
        Some(m) => m,
        None => bandwidth(effective_n, args.m_exponent.unwrap_or(DEFAULT_EXPONENT))
            .map_err(core_failure)?,
    };
    let bounds = args.range.unwrap_or(DEFAULT_BOUNDS);
    let fit = if args.diff {
        estimate_differenced(&x, m, bounds)
    } else {
        estimate(&x, m, bounds)
    };
    fit.map_err(core_failure)
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let series = read_series(&args.input)?;
    let single_unlabeled = series.len() == 1 && series[0].0.is_none();
    let mut fits = Vec::with_capacity(series.len());
    for (label, values) in series {
        fits.push((label, fit_one(&args, values)?));
    }
    let json = if single_unlabeled {
        fits[0].1.to_json()
    } else {
        let labeled: Vec<LabeledFit> = fits
            .iter()
            .map(|(label, fit)| LabeledFit { series: label.as_deref().unwrap_or(""), fit })
            .collect();
        serde_json::to_string(&labeled).expect("fits serialize")
    };
    write_output(args.out.as_deref(), &format!("{json}\n"))
}

fn cmd_montecarlo(args: MontecarloArgs) -> Result<(), Failure> {
    let spec = MCSpec {
        d_values: args.d,
        n_values: args.n,
        reps: args.reps,
        bandwidth_exponent: args.m_exponent,
        estimator: if args.diff { Estimator::Differenced } else { Estimator::Raw },
        trend: trend_from(args.trend_mu, args.trend_alpha),
        base_seed: args.seed,
        retain_estimates: false,
    };
    let result = run_spec(&spec)?;
    write_output(args.out.as_deref(), &result.to_csv())
}

fn cmd_density(args: DensityArgs) -> Result<(), Failure> {
    if args.points < 2 {
        return Err(Failure::usage(format!("--points {} too small, need at least 2", args.points)));
    }
    if args.reps < 2 {
        return Err(Failure::usage(format!("--reps {} too small, a density needs at least 2", args.reps)));
    }
    if let Some(h) = args.bandwidth {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Failure::usage(format!("--bandwidth {h} must be positive")));
        }
    }
    let spec = MCSpec {
        d_values: vec![args.d],
        n_values: vec![args.n],
        reps: args.reps,
        bandwidth_exponent: args.m_exponent,
        estimator: if args.diff { Estimator::Differenced } else { Estimator::Raw },
        trend: None,
        base_seed: args.seed,
        retain_estimates: true,
    };
    let result = run_spec(&spec)?;
    let estimates = result.cells[0].estimates.as_ref().expect("retained above");
    let h = match args.bandwidth {
        Some(h) => h,
        None => silverman_bandwidth(estimates).map_err(core_failure)?,
    };
    let grid = density_grid(estimates, h, args.points);
    let density = kde(estimates, &grid, Some(h)).map_err(core_failure)?;
    let mut out = String::from("x,density\n");
    for (g, f) in grid.iter().zip(&density) {
        writeln!(out, "{g},{f}").expect("string write");
    }
    write_output(args.out.as_deref(), &out)
}

#[derive(Serialize)]
struct AsymptoticsReport {
    d0: f64,
    law: LimitLaw,
    m: Option<usize>,
    theoretical_sd: Option<f64>,
}

fn cmd_asymptotics(args: AsymptoticsArgs) -> Result<(), Failure> {
    if !(args.d > 0.5) {
        return Err(Failure::usage(format!("--d {} out of range, the limit laws need d > 1/2", args.d)));
    }
    if let Some(count) = args.samples {
        let draws = sample_limit_law(args.d, count, args.seed).map_err(core_failure)?;
        let mut out = String::from("draw\n");
        for v in draws {
            writeln!(out, "{v}").expect("string write");
        }
        return write_output(args.out.as_deref(), &out);
    }
    let report = AsymptoticsReport {
        d0: args.d,
        law: limit_law(args.d).map_err(core_failure)?,
        m: args.m,
        theoretical_sd: args.m.and_then(|m| theoretical_sd(args.d, m)),
    };
    let json = serde_json::to_string(&report).expect("report serializes");
    write_output(args.out.as_deref(), &format!("{json}\n"))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let mut out = String::from("d,n,s,max_rel_residual,tolerance,pass\n");
    let mut all_pass = true;
    for &d in &[-0.3f64, 0.3, 0.7, 1.0, 1.4] {
        // The unit-root case short-circuits to an exact rearrangement, so it
        // is held to a tighter tolerance.
        let tol = if d == 1.0 { 1e-10 } else { 1e-8 };
        for &n in &[64usize, 256, 1024] {
            for &s in &[1usize, 2, 5, n / 8] {
                let mut worst = 0.0f64;
                for k in 0..5u64 {
                    let seed = 900_000 + n as u64 * 100 + s as u64 * 25 + k;
                    let u = simulate(&SimConfig::gaussian(0.0, n, seed)).map_err(core_failure)?;
                    let rep = dft_identity_residual(&u, d, s).map_err(core_failure)?;
                    worst = worst.max(rep.rel_residual);
                }
                let pass = worst <= tol;
                all_pass &= pass;
                writeln!(out, "{d},{n},{s},{worst:e},{tol:e},{pass}").expect("string write");
            }
        }
    }
    write_output(args.out.as_deref(), &out)?;
    if !all_pass {
        return Err(Failure::numeric("identity residuals exceed tolerance".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Estimate(args) => cmd_estimate(args),
        Cmd::Montecarlo(args) => cmd_montecarlo(args),
        Cmd::Density(args) => cmd_density(args),
        Cmd::Asymptotics(args) => cmd_asymptotics(args),
        Cmd::Verify(args) => cmd_verify(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed; real
            // parse errors go to stderr with the usage exit code.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
