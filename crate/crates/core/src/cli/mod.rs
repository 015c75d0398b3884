//! Command-line front end: `run`, `curves` and `analyze`.
//!
//! Exit codes: 0 success (including a fit that did not converge), 2 invalid
//! configuration, 3 I/O failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{apply_overrides, device_preset, Experiment, GridSpec, OutputFormat, RunConfig};
pub use output::{read_columns, sidecar_path, write_curve_csv, write_sweep_csv, SWEEP_HEADER};

use crate::analytics::{default_free_params, evaluate_model, fit_curve, initial_guess, CurveModel, DataPoint, ModelId};
use crate::experiments::{
    run_bell, run_encoding, run_multi_round_qec, run_natural_dephasing, run_single_round_qec, ConventionChoice,
    RunOptions, SweepPoint, SweepResult,
};
use crate::parallel::{with_threads, Execution};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "PHASEQEC_OUTPUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "phaseqec", version, about = "Three-qubit phase-flip code: simulation sweeps, model curves and fits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment sweep and write CSV plus a JSON sidecar.
    Run(Box<RunArgs>),
    /// Evaluate a closed-form model on a grid.
    Curves(CurvesArgs),
    /// Fit a model to a CSV produced by `run` or `curves`.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config or sidecar; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// bell, single_round_qec, multi_round_qec, natural_dephasing or encoding.
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long)]
    pub variant: Option<String>,
    /// Error-probability grid, start:stop:count.
    #[arg(long, value_name = "START:STOP:COUNT", conflicts_with = "times")]
    pub pe: Option<String>,
    /// Storage-time grid in ms, start:stop:count.
    #[arg(long, value_name = "START:STOP:COUNT")]
    pub times: Option<String>,
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Data qubits for the entanglement experiment, e.g. `0,1`.
    #[arg(long, value_name = "I,J")]
    pub pair: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// exact or monte_carlo.
    #[arg(long)]
    pub mode: Option<String>,
    /// Two-bit convention such as `11`, or `symmetrized`.
    #[arg(long)]
    pub convention: Option<String>,
    /// Logical readout: `mean` or a data-qubit index.
    #[arg(long)]
    pub readout: Option<String>,
    /// Device preset: calibrated, ideal or natural_dephasing.
    #[arg(long)]
    pub device: Option<String>,
    /// Device-parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run trials on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, value_name = "START:STOP:COUNT")]
    pub grid: String,
    /// Model parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated free parameters; defaults depend on the model.
    #[arg(long, value_delimiter = ',')]
    pub free: Vec<String>,
    /// Fixed parameter or starting value, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Column holding y values; `fidelity` or `y` by default.
    #[arg(long)]
    pub y_column: Option<String>,
    /// Weight points by the `stderr` column.
    #[arg(long)]
    pub weighted: bool,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => run_command(&a),
        Command::Curves(a) => curves_command(&a),
        Command::Analyze(a) => analyze_command(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phaseqec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn cfg_err(field: &str) -> impl Fn(String) -> CliError + '_ {
    move |m| CliError::Config(format!("{field}: {m}"))
}

/// Merges a config file (if any) with flags; flags win.
pub fn build_config(a: &RunArgs) -> Result<RunConfig, CliError> {
    let mut c = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => {
            let name = a.experiment.as_deref().ok_or_else(|| CliError::Config("experiment: required".into()))?;
            RunConfig::new(name.parse().map_err(cfg_err("experiment"))?)
        }
    };
    if let Some(name) = &a.experiment {
        let exp: Experiment = name.parse().map_err(cfg_err("experiment"))?;
        if exp != c.experiment {
            // A different experiment invalidates the file's experiment-specific fields.
            c = RunConfig { experiment: exp, variant: None, grid: None, rounds: None, pair: None, output: None, ..c };
        }
    }
    if let Some(v) = &a.variant {
        c.variant = Some(v.clone());
    }
    if let Some(g) = a.pe.as_ref().or(a.times.as_ref()) {
        let field = if a.pe.is_some() { "pe" } else { "times" };
        c.grid = Some(g.parse().map_err(cfg_err(field))?);
    }
    if let Some(r) = a.rounds {
        c.rounds = Some(r);
    }
    if let Some(p) = &a.pair {
        c.pair = Some(config::parse_pair(p)?);
    }
    if let Some(t) = a.trials {
        c.trials = t;
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(m) = &a.mode {
        c.mode = Some(m.parse().map_err(|e: crate::Error| CliError::Config(format!("mode: {e}")))?);
    }
    if let Some(conv) = &a.convention {
        c.convention = conv.parse().map_err(|e: crate::Error| CliError::Config(format!("convention: {e}")))?;
    }
    if let Some(r) = &a.readout {
        c.readout = config::parse_readout(r)?;
    }
    if a.sequential {
        c.execution = Execution::Sequential;
    }
    if let Some(d) = &a.device {
        c.params = Some(device_preset(d)?);
    }
    if !a.params.is_empty() {
        let base = c.params.clone().unwrap_or_else(|| match c.experiment {
            Experiment::NaturalDephasing => crate::noise::DeviceParams::natural_dephasing(),
            _ => crate::noise::DeviceParams::calibrated(),
        });
        c.params = Some(apply_overrides(&base, &a.params)?);
    }
    if let Some(o) = &a.output {
        c.output = Some(o.clone());
    }
    if let Some(f) = &a.format {
        c.format = match f.as_str() {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            _ => return Err(CliError::Config(format!("format: {f:?} is not csv or json"))),
        };
    }
    c.resolve(std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
}

/// Result of one resolved run: sweep rows plus an optional experiment report.
#[derive(Debug, Serialize)]
pub struct RunOutput {
    pub sweep: SweepResult,
    pub report: Option<serde_json::Value>,
}

/// Executes a resolved config without writing anything.
pub fn execute(c: &RunConfig) -> Result<RunOutput, CliError> {
    let params = c.params.as_ref().expect("resolved config has params");
    let opts = RunOptions {
        mode: c.mode.expect("resolved config has a mode"),
        trials: c.trials,
        seed: c.seed,
        execution: c.execution,
        readout: c.readout,
        keep_records: false,
    };
    let grid = c.grid.map(|g| g.values()).unwrap_or_default();
    let variant = c.variant.as_deref().unwrap_or_default();
    let fixed_convention = || match c.convention {
        ConventionChoice::Fixed(conv) => Ok(conv),
        ConventionChoice::Symmetrized => {
            Err(CliError::Config(format!("convention: {} needs a single convention", c.experiment.name())))
        }
    };
    let single = |x: f64, fidelity: f64, stderr: f64, trials: u64, variant: String| SweepResult {
        experiment: c.experiment.name().to_string(),
        variant,
        mode: opts.mode,
        seed: c.seed,
        points: vec![SweepPoint {
            x,
            fidelity,
            stderr,
            syndrome: None,
            true_syndrome: None,
            round_no_error: Vec::new(),
            trials,
        }],
        records: Vec::new(),
    };
    let out = match c.experiment {
        Experiment::SingleRoundQec => {
            let v = variant.parse().map_err(|e: crate::Error| CliError::Config(format!("variant: {e}")))?;
            RunOutput { sweep: run_single_round_qec(&grid, params, c.convention, v, &opts)?, report: None }
        }
        Experiment::MultiRoundQec => {
            let n = c.rounds.expect("resolved config has rounds");
            RunOutput { sweep: run_multi_round_qec(n, &grid, params, c.convention, &opts)?, report: None }
        }
        Experiment::NaturalDephasing => {
            let v = variant.parse().map_err(|e: crate::Error| CliError::Config(format!("variant: {e}")))?;
            RunOutput { sweep: run_natural_dephasing(&grid, params, v, fixed_convention()?, &opts)?, report: None }
        }
        Experiment::Bell => {
            let pair = c.pair.expect("resolved config has a pair");
            let r = run_bell(pair, params, fixed_convention()?, &opts)?;
            let label = format!("pair={},{}", pair[0], pair[1]);
            RunOutput {
                sweep: single(0.0, r.fidelity, r.stderr, r.trials, label),
                report: Some(serde_json::to_value(&r).expect("bell result serializes")),
            }
        }
        Experiment::Encoding => {
            let r = run_encoding(params, c.readout)?;
            RunOutput {
                sweep: single(0.0, r.process_fidelity, 0.0, 0, "process".into()),
                report: Some(serde_json::to_value(&r).expect("encoding report serializes")),
            }
        }
    };
    Ok(out)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    version: &'static str,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a serde_json::Value>,
}

fn run_command(a: &RunArgs) -> Result<(), CliError> {
    let config = build_config(a)?;
    let out = with_threads(a.threads, || execute(&config))?;
    let path = config.output.clone().expect("resolved config has an output path");
    match config.format {
        OutputFormat::Csv => write_sweep_csv(&path, &out.sweep)?,
        OutputFormat::Json => output::write_json(&path, &out)?,
    }
    let sidecar = Sidecar { version: env!("CARGO_PKG_VERSION"), config: &config, report: out.report.as_ref() };
    let side = sidecar_path(&path);
    output::write_json(&side, &sidecar)?;
    eprintln!("wrote {} and {}", path.display(), side.display());
    Ok(())
}

fn parse_model(name: &str, params: &[String]) -> Result<CurveModel, CliError> {
    let id: ModelId = name.parse().map_err(|e: crate::Error| CliError::Config(format!("model: {e}")))?;
    let mut m = CurveModel::new(id);
    for item in params {
        let (k, v) = config::parse_assignment(item)?;
        let v: f64 = v.parse().map_err(|_| CliError::Config(format!("param: `{k}` value {v:?} is not a number")))?;
        m.set(k, v);
    }
    Ok(m)
}

fn curves_command(a: &CurvesArgs) -> Result<(), CliError> {
    let model = parse_model(&a.model, &a.params)?;
    let grid: GridSpec = a.grid.parse().map_err(cfg_err("grid"))?;
    let rows = grid
        .values()
        .into_iter()
        .map(|x| Ok((x, evaluate_model(&model, x)?)))
        .collect::<Result<Vec<_>, crate::Error>>()?;
    write_curve_csv(a.output.as_deref(), &rows)
}

fn analyze_command(a: &AnalyzeArgs) -> Result<(), CliError> {
    let fixed = parse_model(&a.model, &a.params)?;
    let columns = read_columns(&a.input)?;
    let y_name = match &a.y_column {
        Some(n) => n.as_str(),
        None if columns.contains_key("fidelity") => "fidelity",
        None => "y",
    };
    let column = |name: &str| {
        columns
            .get(name)
            .ok_or_else(|| CliError::Config(format!("input: column `{name}` missing from {}", a.input.display())))
    };
    let (xs, ys) = (column("x")?, column(y_name)?);
    let sigmas = if a.weighted { Some(column("stderr")?) } else { None };
    let mut data = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        let (Some(x), Some(y)) = (xs[i], ys[i]) else {
            return Err(CliError::Config(format!("input: row {} has an empty x or {y_name}", i + 1)));
        };
        data.push(match sigmas {
            Some(s) => DataPoint::with_sigma(x, y, s[i].unwrap_or(0.0)),
            None => DataPoint::new(x, y),
        });
    }
    let mut start = initial_guess(fixed.model, &data);
    for (k, v) in &fixed.params {
        start.set(k, *v);
    }
    let free: Vec<&str> = if a.free.is_empty() {
        default_free_params(fixed.model).to_vec()
    } else {
        a.free.iter().map(String::as_str).collect()
    };
    let fit = fit_curve(&start, &free, &data)?;
    for (name, v) in &fit.params {
        eprintln!("{name} = {v:.6} ± {:.6}", fit.sigmas[name]);
    }
    if !fit.converged {
        eprintln!("warning: fit did not converge after {} iterations", fit.iterations);
    }
    match &a.output {
        Some(p) => output::write_json(p, &fit),
        None => {
            println!("{}", serde_json::to_string_pretty(&fit).expect("fit result serializes"));
            Ok(())
        }
    }
}
