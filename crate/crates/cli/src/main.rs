//! `mfmix`: generate traffic streams, estimate generalized Hurst spectra, mix
//! signal with noise at a fixed SNR, and run SNR sweeps.
//!
//! Every run echoes its fully resolved arguments to stderr as a `resolved:`
//! line; replaying that line reproduces the outputs byte for byte.
//!
//! Exit status: 0 on success (warnings allowed), 2 for usage and parameter
//! errors, 1 for failures while running.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mfmix_core::analysis::{
    mfdfa, moment_spectrum, HurstSpectrum, Method, QGrid, ScalePlan, DEFAULT_DETREND_ORDER,
    DEFAULT_MIN_SCALE, DEFAULT_SCALE_COUNT, POOR_FIT_R2,
};
use mfmix_core::experiment::{
    emit_results, run_sweep, run_sweep_with_threads, ExperimentConfig, ResultsTable,
};
use mfmix_core::io::{read_trace, write_spectrum, write_trace};
use mfmix_core::mixer::{mix, MixSpec};
use mfmix_core::stats::{mean, sample_variance};
use mfmix_core::traffic::{cascade_theoretical_h, generate};
use mfmix_core::{Error, ModelDescriptor, ModelSpec, Provenance};

/// Shipped sweep configuration used when `experiment` gets no `--config`.
const DEFAULT_CONFIG: &str = include_str!("../examples/paper-sweep.cfg");
const THREADS_ENV: &str = "MFMIX_THREADS";

#[derive(Parser)]
#[command(
    name = "mfmix",
    version,
    about = "Multifractal traffic mixing and Hurst spectrum analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace.
    Generate(GenerateArgs),
    /// Estimate h(q) of a trace.
    Analyze(AnalyzeArgs),
    /// Add scaled noise to a signal at a target variance ratio.
    Mix(MixArgs),
    /// Closed-form h(q) of a model.
    Oracle {
        #[command(subcommand)]
        model: OracleModel,
    },
    /// Run a noise x SNR x replicate sweep.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// fgn, fbm, exp-fgn, cascade, ar1 or iid
    #[arg(long)]
    model: String,
    /// Length; cascades default to 2^depth
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_negative_numbers = true)]
    hurst: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    depth: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<String>,
    /// AR(1) innovation std or lognormal sigma
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<String>,
    /// iid marginal: uniform, normal or lognormal
    #[arg(long)]
    dist: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    low: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    high: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    mean: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    std: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Mfdfa,
    Moments,
}

#[derive(Args)]
struct QArgs {
    /// Explicit comma-separated orders; overrides the range flags
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["q_min", "q_max", "q_step"])]
    q: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    q_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    q_max: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    q_step: f64,
}

impl QArgs {
    fn grid(&self) -> mfmix_core::Result<QGrid> {
        match &self.q {
            Some(values) => QGrid::new(values.clone()),
            None => QGrid::range(self.q_min, self.q_max, self.q_step),
        }
    }

    fn echo(&self) -> Vec<String> {
        match &self.q {
            Some(values) => flag("--q", join(values, ",")),
            None => [
                flag("--q-min", self.q_min),
                flag("--q-max", self.q_max),
                flag("--q-step", self.q_step),
            ]
            .concat(),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Estimator::Mfdfa)]
    method: Estimator,
    #[command(flatten)]
    q: QArgs,
    /// Explicit comma-separated window sizes; overrides the log-spaced default
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["min_scale", "scale_count"])]
    scales: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_MIN_SCALE)]
    min_scale: usize,
    #[arg(long, default_value_t = DEFAULT_SCALE_COUNT)]
    scale_count: usize,
    /// Polynomial order of MFDFA detrending
    #[arg(long, default_value_t = DEFAULT_DETREND_ORDER)]
    detrend_order: usize,
}

#[derive(Args)]
struct MixArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    noise: PathBuf,
    /// Target Var[signal] / Var[scaled noise]
    #[arg(long, allow_negative_numbers = true)]
    snr: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum OracleModel {
    /// Binomial cascade with Beta(alpha, alpha) weights
    Cascade {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[command(flatten)]
        q: QArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Sweep configuration; the shipped default sweep when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Overrides the configured base seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "mfmix-results")]
    out: PathBuf,
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = match &e {
            Error::Parameter { name, reason } => format!("invalid --{name}: {reason}"),
            _ => e.to_string(),
        };
        Failure {
            code: if e.is_usage() { 2 } else { 1 },
            message,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Mix(a) => cmd_mix(a),
        Command::Oracle { model } => cmd_oracle(model),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn flag(name: &str, value: impl Display) -> Vec<String> {
    vec![name.to_string(), value.to_string()]
}

fn join<T: Display>(values: &[T], sep: &str) -> String {
    values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

fn quote(arg: &str) -> String {
    let safe = !arg.is_empty()
        && arg
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "-_./=,:+".contains(c));
    if safe {
        arg.to_string()
    } else {
        format!("'{}'", arg.replace('\'', "'\\''"))
    }
}

fn echo(subcommand: &str, args: &[String]) {
    let line: Vec<String> = args.iter().map(|a| quote(a)).collect();
    eprintln!("resolved: mfmix {subcommand} {}", line.join(" "));
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Failure> {
    let mut params = BTreeMap::new();
    params.insert("model".to_string(), a.model.clone());
    let optional = [
        ("hurst", &a.hurst),
        ("depth", &a.depth),
        ("alpha", &a.alpha),
        ("phi", &a.phi),
        ("sigma", &a.sigma),
        ("dist", &a.dist),
        ("low", &a.low),
        ("high", &a.high),
        ("mean", &a.mean),
        ("std", &a.std),
        ("mu", &a.mu),
    ];
    for (key, value) in optional {
        if let Some(v) = value {
            params.insert(key.to_string(), v.clone());
        }
    }
    let spec = ModelSpec::from_params(&params)?;
    let desc = match a.n {
        Some(n) => ModelDescriptor::new(spec, n, a.seed)?,
        None => ModelDescriptor::with_implied_len(spec, a.seed)?,
    };

    let mut args = Vec::new();
    for (k, v) in desc.to_params() {
        args.extend(flag(&format!("--{k}"), v));
    }
    args.extend(flag("--out", path_str(&a.out)));
    echo("generate", &args);

    let series = generate(&desc)?;
    write_trace(&series, &a.out)?;
    println!("length: {}", series.len());
    println!("mean: {}", mean(series.values()));
    println!("variance: {}", sample_variance(series.values()));
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let q = a.q.grid()?;
    let trace = read_trace(&a.input)?;
    let plan = match &a.scales {
        Some(scales) => ScalePlan::new(scales.clone(), a.detrend_order)?,
        None => ScalePlan::log_spaced(trace.len(), a.min_scale, a.scale_count, a.detrend_order)?,
    };

    let mut args = flag("--in", path_str(&a.input));
    args.extend(flag("--out", path_str(&a.out)));
    let method = match a.method {
        Estimator::Mfdfa => Method::Mfdfa,
        Estimator::Moments => Method::Moments,
    };
    args.extend(flag("--method", method));
    args.extend(a.q.echo());
    args.extend(flag("--scales", join(plan.scales(), ",")));
    args.extend(flag("--detrend-order", plan.detrend_order()));
    echo("analyze", &args);

    let spectrum = match method {
        Method::Moments => {
            plan.validate_for(trace.len())?;
            moment_spectrum(&trace, &q, plan.scales())?
        }
        _ => mfdfa(&trace, &q, &plan)?,
    };
    write_spectrum(&spectrum, trace.provenance(), &[], &a.out)?;
    report_spectrum(&spectrum);
    Ok(())
}

fn report_spectrum(s: &HurstSpectrum) {
    let h2 = match s.q.values().iter().position(|&q| q == 2.0) {
        None => "not on the q grid".to_string(),
        Some(i) => s.h[i].map_or("undefined".to_string(), |h| h.to_string()),
    };
    println!("h(2): {h2}");
    match s.spread(1e-9, f64::INFINITY) {
        Some(spread) => println!("spread over q > 0: {spread}"),
        None => println!("spread over q > 0: undefined"),
    }
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    let undefined: Vec<f64> = (0..s.q.len())
        .filter(|&i| !s.is_defined(i))
        .map(|i| s.q.values()[i])
        .collect();
    if !undefined.is_empty() {
        eprintln!("warning: h(q) undefined at q = {}", join(&undefined, ", "));
    }
    let poor = s.poor_fits();
    if !poor.is_empty() {
        eprintln!(
            "warning: r2 below {POOR_FIT_R2} at q = {}",
            join(&poor, ", ")
        );
    }
}

fn cmd_mix(a: MixArgs) -> Result<(), Failure> {
    let spec = MixSpec::new(a.snr)?;
    let mut args = flag("--signal", path_str(&a.signal));
    args.extend(flag("--noise", path_str(&a.noise)));
    args.extend(flag("--snr", a.snr));
    args.extend(flag("--out", path_str(&a.out)));
    echo("mix", &args);

    let signal = read_trace(&a.signal)?;
    let noise = read_trace(&a.noise)?;
    let out = mix(&signal, &noise, spec)?;
    write_trace(&out.sum, &a.out)?;
    println!("noise_scale: {}", out.noise_scale);
    println!("achieved_snr: {}", out.achieved_snr);
    Ok(())
}

fn cmd_oracle(model: OracleModel) -> Result<(), Failure> {
    let OracleModel::Cascade { alpha, q, out } = model;
    let grid = q.grid()?;
    let mut args = flag("--alpha", alpha);
    args.extend(q.echo());
    if let Some(p) = &out {
        args.extend(flag("--out", path_str(p)));
    }
    echo("oracle cascade", &args);

    let h = grid
        .values()
        .iter()
        .map(|&qv| cascade_theoretical_h(qv, alpha).map(Some))
        .collect::<mfmix_core::Result<Vec<_>>>()?;
    let n = grid.len();
    // on the unit interval E[mu(I)^q] = |I|^{q h(q)} exactly, so ln c(q) = 0
    let spectrum = HurstSpectrum {
        method: Method::CascadeOracle,
        q: grid,
        h,
        intercept: vec![Some(0.0); n],
        r2: vec![Some(1.0); n],
        scales: Vec::new(),
        detrend_order: None,
        warnings: Vec::new(),
    };
    for (qv, hv) in spectrum.q.values().iter().zip(&spectrum.h) {
        println!("h({qv}) = {}", hv.unwrap_or(f64::NAN));
    }
    if let Some(p) = out {
        let extra = [
            ("model".to_string(), "cascade".to_string()),
            ("alpha".to_string(), alpha.to_string()),
        ];
        write_spectrum(&spectrum, &Provenance::External, &extra, &p)?;
    }
    Ok(())
}

fn thread_override() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure {
                code: 2,
                message: format!("{THREADS_ENV} must be a positive integer, got `{raw}`"),
            }),
        },
    }
}

fn cmd_experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_path(path).map_err(|e| match e {
            // an unreadable config is a usage problem, not a runtime one
            Error::Io { .. } => Failure {
                code: 2,
                message: e.to_string(),
            },
            other => other.into(),
        })?,
        None => ExperimentConfig::from_toml_str(DEFAULT_CONFIG)?,
    };
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(s) = a.seed {
        cfg.base_seed = s;
    }
    cfg.validate()?;
    let threads = thread_override()?;

    let mut args = Vec::new();
    if let Some(p) = &a.config {
        args.extend(flag("--config", path_str(p)));
    }
    args.extend(flag("--replicates", cfg.replicates));
    args.extend(flag("--seed", cfg.base_seed));
    args.extend(flag("--out", path_str(&a.out)));
    echo("experiment", &args);

    let table = match threads {
        Some(n) => run_sweep_with_threads(&cfg, n)?,
        None => run_sweep(&cfg)?,
    };
    let written = emit_results(&table, &a.out)?;
    print_summary(&table);
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn print_summary(t: &ResultsTable) {
    let width = t
        .noise_labels
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(5)
        .max(5);
    println!(
        "{:<width$}  {:>10}  {:>14}  {:>13}  {:>4}  {:>6}",
        "noise", "snr", "deviation_mean", "deviation_std", "ok", "failed"
    );
    for s in &t.summary {
        println!(
            "{:<width$}  {:>10}  {:>14.6}  {:>13.6}  {:>4}  {:>6}",
            s.noise_label,
            s.snr,
            s.deviation_mean,
            s.deviation_std,
            s.replicates_ok,
            s.replicates_failed
        );
    }
    println!(
        "noise floor (independent signal pair): {:.6} +- {:.6} over {} replicates",
        t.noise_floor.mean, t.noise_floor.std, t.noise_floor.count
    );
    if !t.failures.is_empty() {
        println!("{} failed cells; see summary.csv", t.failures.len());
    }
}
