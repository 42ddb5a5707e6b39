//! The `stfreq` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 rejection (`test-indep`
//! only), 4 numerical failure.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use stfreq_core::dft::dft_all;
use stfreq_core::fv::{nugget_scan, FrequencyVariogram, Kernel, KernelKind};
use stfreq_core::indeptest::independence_test;
use stfreq_core::moments::{matheron_variogram, sample_covariance, SpaceTimeLag};
use stfreq_core::simulate::{simulate_separable, simulate_white, simulate_whittle_periodograms};
use stfreq_core::specmodel::{Normalization, ParamName, SpectrumParams};
use stfreq_core::whittle::{fit, FitOptions, ModelSpec, Optimizer, WhittleProblem};
use stfreq_core::{build_lag_pairs, Panel};

use crate::io;
use crate::oracle;
use crate::schema::{FitReport, FvSummary, NuggetSummaryRow, SimKind, SimSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REJECT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

const SUBCOMMANDS: [&str; 6] = [
    "variogram",
    "fv",
    "fit",
    "test-indep",
    "simulate",
    "oracle-check",
];

#[derive(Debug, Parser)]
#[command(
    name = "stfreq",
    version,
    about = "Frequency-domain analysis of spatio-temporal panels"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "STFREQ_THREADS")]
    pub threads: Option<usize>,

    /// Use the literal temporal-spectrum constants for comparison output.
    #[arg(long, global = true)]
    pub paper_constants: bool,

    /// JSON file whose keys mirror the command-line flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Matheron variogram and covariance at space-time lags.
    Variogram(VariogramArgs),
    /// Frequency variogram per spatial lag, with a nugget summary.
    Fv(FvArgs),
    /// Pooled Whittle fit of the Laplacian-model spectrum.
    Fit(FitArgs),
    /// Likelihood-ratio test of spatial independence.
    TestIndep(IndepArgs),
    /// Simulate a panel or periodograms from a JSON specification.
    Simulate(SimulateArgs),
    /// Cross-check the closed-form spectra against quadrature.
    OracleCheck,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Panel CSV (`t,<id1>,...`).
    #[arg(long)]
    pub panel: PathBuf,
    /// Stations CSV (`station_id,x1,...`).
    #[arg(long)]
    pub stations: PathBuf,
}

#[derive(Debug, Args)]
pub struct LagArgs {
    /// Spatial lag, comma separated; repeat for several lags.
    #[arg(long = "h", value_parser = parse_vector, allow_hyphen_values = true, required = true)]
    pub h: Vec<Vec<f64>>,
    /// Lag-matching tolerance.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct VariogramArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub lags: LagArgs,
    /// Time lags, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0"
    )]
    pub u: Vec<i64>,
    #[arg(long, default_value = "variogram.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Daniell,
    ModifiedDaniell,
    BartlettWindow,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Daniell => KernelKind::Daniell,
            KernelArg::ModifiedDaniell => KernelKind::ModifiedDaniell,
            KernelArg::BartlettWindow => KernelKind::BartlettWindow,
        }
    }
}

#[derive(Debug, Args)]
pub struct FvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub lags: LagArgs,
    #[arg(long, value_enum, default_value = "modified-daniell")]
    pub kernel: KernelArg,
    /// Kernel half-width in Fourier ordinates (default: ceil(n^0.4)).
    #[arg(long)]
    pub bandwidth: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptimizerArg {
    NelderMead,
    Bfgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Panel CSV; requires --stations and at least one --h.
    #[arg(long, requires = "stations", conflicts_with = "periodograms")]
    pub panel: Option<PathBuf>,
    #[arg(long)]
    pub stations: Option<PathBuf>,
    /// Periodogram CSV as written by `simulate` (instead of a panel).
    #[arg(long)]
    pub periodograms: Option<PathBuf>,
    /// Spatial lag, comma separated; repeat for several lags.
    #[arg(long = "h", value_parser = parse_vector, allow_hyphen_values = true)]
    pub h: Vec<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Model template JSON; also the starting point.
    #[arg(long)]
    pub model: PathBuf,
    /// Free parameters, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "sigma_eta2,a1,c1")]
    pub free: Vec<String>,
    #[arg(long, value_enum, default_value = "nelder-mead")]
    pub optimizer: OptimizerArg,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, default_value = "fit.json")]
    pub out: PathBuf,
    /// Convergence trace CSV (default: next to --out).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IndepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Smoothing half-width; each block averages 2k+1 ordinates.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the simulated stations as CSV.
    #[arg(long)]
    pub stations_out: Option<PathBuf>,
}

fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{c}` is not a number"))
        })
        .collect()
}

/// Output file name of a lag: components joined by `.`, e.g. `fv_h1.0.csv`.
pub fn fv_file_name(h: &[f64]) -> String {
    let parts: Vec<String> = h.iter().map(|v| v.to_string()).collect();
    format!("fv_h{}.csv", parts.join("."))
}

fn config_value(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Array(items) => {
            let parts: Option<Vec<String>> = items.iter().map(config_value).collect();
            parts.map(|p| p.join(","))
        }
        _ => None,
    }
}

/// Splices the flags of a `--config` JSON file into `args`. Flags given on
/// the command line take precedence over the file.
fn expand_config(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let strs: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let Some(pos) = strs
        .iter()
        .position(|a| a == "--config" || a.starts_with("--config="))
    else {
        return Ok(args);
    };
    let (path, remove) = match strs[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => (
            strs.get(pos + 1)
                .cloned()
                .ok_or_else(|| anyhow!("--config needs a file"))?,
            2,
        ),
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let json: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?;
    let obj = json
        .as_object()
        .ok_or_else(|| anyhow!("{path}: config must be a JSON object"))?;

    let mut rest: Vec<String> = strs[1..].to_vec();
    rest.drain(pos - 1..pos - 1 + remove);
    let user_flags: HashSet<String> = rest
        .iter()
        .filter(|a| a.starts_with("--"))
        .map(|a| a.split('=').next().unwrap_or_default().to_string())
        .collect();
    let command = match rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) {
        Some(i) => rest.remove(i),
        None => obj
            .get("command")
            .and_then(|c| c.as_str())
            .ok_or_else(|| {
                anyhow!("{path}: no subcommand given on the command line or as \"command\"")
            })?
            .to_string(),
    };

    let mut out: Vec<String> = vec![strs[0].clone(), command];
    for (key, value) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        if user_flags.contains(&flag) {
            continue;
        }
        match value {
            serde_json::Value::Bool(true) => out.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) if key == "h" => {
                for item in items {
                    let v =
                        config_value(item).ok_or_else(|| anyhow!("{path}: bad value for `h`"))?;
                    out.push(flag.clone());
                    out.push(v);
                }
            }
            other => {
                let v =
                    config_value(other).ok_or_else(|| anyhow!("{path}: bad value for `{key}`"))?;
                out.push(flag);
                out.push(v);
            }
        }
    }
    out.extend(rest);
    Ok(out.into_iter().map(OsString::from).collect())
}

/// Runs the tool on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<stfreq_core::Error>() {
                Some(core) => exit_code_for(core),
                None => EXIT_USAGE,
            }
        }
    }
}

/// Bad input maps to the usage code; failures of the numerics themselves to 4.
pub fn exit_code_for(e: &stfreq_core::Error) -> i32 {
    use stfreq_core::Error as E;
    match e {
        E::EmptyLagSet
        | E::InsufficientLags { .. }
        | E::DomainError(_)
        | E::GridTooCoarse { .. }
        | E::SingularHessian
        | E::SingularMatrix { .. }
        | E::NotPositiveDefinite => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Variogram(a) => variogram(a),
        Command::Fv(a) => fv(a),
        Command::Fit(a) => fit_cmd(a, cli.paper_constants),
        Command::TestIndep(a) => test_indep(a),
        Command::Simulate(a) => simulate(a),
        Command::OracleCheck => oracle_check(cli.paper_constants),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load(data: &DataArgs) -> anyhow::Result<Panel> {
    Ok(io::load_panel(&data.stations, &data.panel)?)
}

fn variogram(a: &VariogramArgs) -> anyhow::Result<i32> {
    let panel = load(&a.data)?;
    let jobs: Vec<(Vec<f64>, i64)> = a
        .lags
        .h
        .iter()
        .flat_map(|h| a.u.iter().map(move |&u| (h.clone(), u)))
        .collect();
    let rows: Vec<Option<String>> = jobs
        .par_iter()
        .map(|(h, u)| -> anyhow::Result<Option<String>> {
            let lag = SpaceTimeLag::new(h.clone(), *u, a.lags.delta);
            let gamma = match matheron_variogram(&panel, &lag) {
                Ok(g) => g,
                Err(stfreq_core::Error::EmptyLagSet) => {
                    log::warn!("no pairs at h = {h:?}, u = {u}; row skipped");
                    return Ok(None);
                }
                Err(e) => return Err(e.into()),
            };
            let cov = sample_covariance(&panel, &lag)?;
            let h_norm = h.iter().map(|x| x * x).sum::<f64>().sqrt();
            Ok(Some(format!(
                "{h_norm},{u},{},{},{}",
                gamma.count, gamma.value, cov.value
            )))
        })
        .collect::<anyhow::Result<_>>()?;
    let rows: Vec<String> = rows.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(stfreq_core::Error::EmptyLagSet.into());
    }
    let mut w = create(&a.out)?;
    writeln!(w, "h_norm,u,count,gamma_hat,c_hat")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn fv(a: &FvArgs) -> anyhow::Result<i32> {
    let panel = load(&a.data)?;
    let spec = dft_all(&panel)?;
    let default = Kernel::default_for(panel.n());
    let kernel = Kernel::new(a.kernel.into(), a.bandwidth.unwrap_or(default.half_width));
    let estimates: Vec<Option<FrequencyVariogram>> = a
        .lags
        .h
        .par_iter()
        .map(|h| -> anyhow::Result<Option<FrequencyVariogram>> {
            let pairs = build_lag_pairs(panel.stations(), h, a.lags.delta)?;
            match FrequencyVariogram::estimate(&spec, &pairs, kernel) {
                Ok(fv) => Ok(Some(fv)),
                Err(stfreq_core::Error::EmptyLagSet) => {
                    log::warn!("no station pairs at h = {h:?}; lag skipped");
                    Ok(None)
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect::<anyhow::Result<_>>()?;
    let estimates: Vec<FrequencyVariogram> = estimates.into_iter().flatten().collect();
    if estimates.is_empty() {
        return Err(stfreq_core::Error::EmptyLagSet.into());
    }
    for est in &estimates {
        let path = a.out_dir.join(fv_file_name(&est.lag));
        let mut w = create(&path)?;
        writeln!(w, "omega,raw,smoothed,var")?;
        for k in 0..est.freqs.len() {
            writeln!(
                w,
                "{},{},{},{}",
                est.freqs[k], est.raw[k], est.smoothed[k], est.variance[k]
            )?;
        }
        w.flush()?;
    }

    let mut norms: Vec<f64> = estimates
        .iter()
        .map(|e| e.lag.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    norms.sort_by(f64::total_cmp);
    norms.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * (1.0 + y.abs()));
    if norms.len() >= 2 {
        let scan = nugget_scan(&panel, &a.lags.h, a.lags.delta, kernel)?;
        let summary = FvSummary {
            kernel: format!("{:?}", kernel.kind),
            half_width: kernel.half_width,
            rows: scan
                .rows
                .iter()
                .map(|r| NuggetSummaryRow {
                    h: r.lag.clone(),
                    h_norm: r.h_norm,
                    count: r.count,
                    integrated_fv: r.integrated_fv,
                    integrated_fv_excl_zero: r.integrated_fv_excl_zero,
                })
                .collect(),
            skipped: scan.skipped.clone(),
            nugget_intercept: scan.intercept,
        };
        let mut w = create(&a.out_dir.join("fv_summary.json"))?;
        serde_json::to_writer_pretty(&mut w, &summary)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(EXIT_OK)
}

fn fit_cmd(a: &FitArgs, paper_constants: bool) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(&a.model)
        .with_context(|| format!("reading {}", a.model.display()))?;
    let template: SpectrumParams =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", a.model.display()))?;
    let names = a
        .free
        .iter()
        .map(|s| ParamName::parse(s.trim()).ok_or_else(|| anyhow!("unknown parameter `{s}`")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut model = ModelSpec::new(template, &names);
    if paper_constants {
        model.normalization = Normalization::Literal;
    }
    let init = model.initial();
    let problem = match (&a.periodograms, &a.panel, &a.stations) {
        (Some(p), _, _) => WhittleProblem::from_simulated(&io::load_periodograms(p)?, model)?,
        (None, Some(panel), Some(stations)) => {
            if a.h.is_empty() {
                return Err(anyhow!("fitting a panel needs at least one --h"));
            }
            let panel = io::load_panel(stations, panel)?;
            let spec = dft_all(&panel)?;
            let sets =
                a.h.iter()
                    .map(|h| build_lag_pairs(panel.stations(), h, a.delta))
                    .collect::<stfreq_core::Result<Vec<_>>>()?;
            if let Some(empty) = sets.iter().find(|s| s.is_empty()) {
                log::warn!("no station pairs at h = {:?}", empty.lag);
                return Err(stfreq_core::Error::EmptyLagSet.into());
            }
            WhittleProblem::from_spectral(&spec, &sets, model)?
        }
        _ => {
            return Err(anyhow!(
                "give either --periodograms or --panel with --stations"
            ))
        }
    };
    let mut options = FitOptions {
        optimizer: match a.optimizer {
            OptimizerArg::NelderMead => Optimizer::NelderMead,
            OptimizerArg::Bfgs => Optimizer::Bfgs,
        },
        ..FitOptions::default()
    };
    if let Some(m) = a.max_iter {
        options.nelder_mead.max_iter = m;
        options.bfgs.max_iter = m;
    }
    let result = fit(&problem, &init, &options)?;

    let trace_path = a
        .trace
        .clone()
        .unwrap_or_else(|| a.out.with_extension("trace.csv"));
    let mut w = create(&trace_path)?;
    writeln!(w, "iteration,criterion")?;
    for (i, v) in result.trace.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, v)?;
    }
    w.flush()?;

    let report = FitReport::new(&result, paper_constants, trace_path);
    let mut w = create(&a.out)?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !result.converged {
        eprintln!("error: optimizer did not converge; best point written");
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn test_indep(a: &IndepArgs) -> anyhow::Result<i32> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(anyhow!("--alpha must lie in (0, 1)"));
    }
    let panel = load(&a.data)?;
    let report = independence_test(&panel, a.k, a.alpha)?;
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(out) = &a.out {
        let mut w = create(out)?;
        writeln!(w, "{json}")?;
        w.flush()?;
    }
    Ok(if report.reject { EXIT_REJECT } else { EXIT_OK })
}

fn simulate(a: &SimulateArgs) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(&a.spec)
        .with_context(|| format!("reading {}", a.spec.display()))?;
    let spec: SimSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", a.spec.display()))?;
    let stations = || -> anyhow::Result<_> {
        spec.stations
            .as_ref()
            .ok_or_else(|| anyhow!("{}: `stations` is required for this kind", a.spec.display()))?
            .resolve()
    };
    let panel = match &spec.kind {
        SimKind::White { sigmas, sigma } => {
            let set = stations()?;
            let sigmas = match (sigmas, sigma) {
                (Some(s), _) => s.clone(),
                (None, s) => vec![s.unwrap_or(1.0); set.len()],
            };
            Some(simulate_white(&set, spec.n, &sigmas, spec.seed)?)
        }
        SimKind::Separable(sep) => Some(simulate_separable(&stations()?, spec.n, sep, spec.seed)?),
        SimKind::WhittlePeriodogram {
            psi,
            lags,
            pairs_per_lag,
        } => {
            let sim = simulate_whittle_periodograms(psi, lags, *pairs_per_lag, spec.n, spec.seed)?;
            let mut w = create(&a.out)?;
            io::write_periodograms(&sim, &mut w, &a.out)?;
            None
        }
    };
    if let Some(panel) = panel {
        let mut w = create(&a.out)?;
        io::write_panel(&panel, &mut w, &a.out)?;
        if let Some(path) = &a.stations_out {
            let mut w = create(path)?;
            io::write_stations(panel.stations(), &mut w, path)?;
        }
    }
    Ok(EXIT_OK)
}

fn oracle_check(paper_constants: bool) -> anyhow::Result<i32> {
    let mut checks = oracle::consistency_triangle()?;
    checks.extend(oracle::fourier_pair_checks()?);
    let mut all = true;
    for c in &checks {
        all &= c.passed();
        println!(
            "{} {}: value {:.10e}, reference {:.10e}, rel err {:.2e} (tol {:.0e})",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.reference,
            c.rel_err(),
            c.tolerance
        );
    }
    if paper_constants {
        println!(
            "INFO literal temporal-spectrum constant is {:.6} x 2 pi times the consistent one at d = 2",
            oracle::literal_constant_ratio()?
        );
    }
    Ok(if all { EXIT_OK } else { EXIT_NUMERICAL })
}
