//! Command-line front end: argument definitions, subcommand handlers and the
//! machine-readable output lines.
//!
//! Exit codes: 0 success, 1 diagnostic warning (some R̂ above 1.01),
//! 2 usage or validation error.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::diagnostics::{self, Diagnostics, DiagnosticsError};
use crate::draws::{Draws, DrawsError};
use crate::exec::Backend;
use crate::ingest::{self, IngestError};
use crate::regress::{
    self, simulate_experiment, simulate_matched_experiment, ExperimentPreset, ModelSpec,
    RegressError,
};
use crate::render::{self, PlotConfig, RenderError};
use crate::summary::{self, PosteriorSummary, SummaryError};

/// R̂ above this value makes `fit` and `diagnose` exit with a warning.
pub const RHAT_WARNING: f64 = 1.01;

#[derive(Debug, Parser)]
#[command(name = "effprob", version, about = "Probabilities of different effect sizes from posterior draws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the treatment-effect regression and write its draws.
    Fit(FitArgs),
    /// Mean, credible interval and one-sided probabilities of one parameter.
    Summarize(SummarizeArgs),
    /// Write the complementary cumulative (exceedance) plot of one parameter.
    Ccdf(PlotArgs),
    /// Write the kernel density plot of one parameter.
    Density(PlotArgs),
    /// Split R-hat and effective sample size for every parameter.
    Diagnose(DiagnoseArgs),
    /// Generate example draws or a synthetic experiment dataset.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset file (CSV with a header row).
    pub data: PathBuf,
    #[arg(long)]
    pub outcome: Option<String>,
    #[arg(long)]
    pub treatment: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub chains: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: Option<u64>,
    #[arg(long)]
    pub warmup: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Prior override such as `beta1_sd=2.5`; repeatable.
    #[arg(long = "prior", value_name = "KEY=VALUE")]
    pub priors: Vec<String>,
    /// Model configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output draws file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Run chains on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    pub draws: PathBuf,
    #[arg(long)]
    pub param: String,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub draws: PathBuf,
    #[arg(long)]
    pub param: String,
    /// Grid points per CCDF branch, or density grid points.
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u64).range(2..))]
    pub points: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub title: Option<String>,
    /// Posterior support is bounded: label the probability axis 0%/100%
    /// instead of "near 0%"/"near 100%".
    #[arg(long)]
    pub bounded: bool,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    pub draws: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 10,000 Normal(1, 1) draws of `theta` in one chain.
    Figure1,
    /// Moment-matched bombing-vs-occupation experiment.
    Bombing,
    /// Moment-matched occupation-vs-demonstration experiment.
    Occupation,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, conflicts_with_all = ["n", "beta0", "beta1", "sd", "matched"])]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 52.0)]
    pub beta0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta1: f64,
    /// Residual standard deviation.
    #[arg(long, default_value_t = 24.0)]
    pub sd: f64,
    /// Rescale residuals so arm means and spread hit the targets exactly.
    #[arg(long)]
    pub matched: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "y")]
    pub outcome: String,
    #[arg(long, default_value = "d")]
    pub treatment: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Draws(#[from] DrawsError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// Stable error class name for scripts.
    pub fn class(&self) -> &'static str {
        fn draws(e: &DrawsError) -> &'static str {
            match e {
                DrawsError::NonFiniteValue { .. } => "NonFiniteValue",
                DrawsError::RaggedChains { .. } | DrawsError::ChainCountMismatch { .. } => "RaggedChains",
                DrawsError::DuplicateParameter(_) => "DuplicateParameter",
                DrawsError::UnknownParameter(_) => "UnknownParameter",
                _ => "ValidationError",
            }
        }
        fn regress(e: &RegressError) -> &'static str {
            match e {
                RegressError::DegenerateDesign => "DegenerateDesign",
                RegressError::NonFiniteData { .. } => "NonFiniteData",
                RegressError::InvalidSigma(_) => "InvalidSigma",
                RegressError::InvalidPrior(_) => "InvalidPrior",
                RegressError::InvalidSpec(_) => "InvalidSpec",
                RegressError::InvalidArgument(_) => "InvalidArgument",
                RegressError::Draws(d) => draws(d),
                RegressError::Diagnostics(_) => "DiagnosticsError",
                RegressError::LengthMismatch { .. } | RegressError::TooFewUnits(_) => "ValidationError",
            }
        }
        match self {
            CliError::Ingest(e) => match e {
                IngestError::Io { .. } => "IoError",
                IngestError::Parse { .. } => "ParseError",
                IngestError::Validation(d) => draws(d),
                IngestError::Dataset(r) => regress(r),
                IngestError::NonBinaryTreatment { .. } => "NonBinaryTreatment",
                IngestError::MissingColumn(_) => "MissingColumn",
            },
            CliError::Draws(e) => draws(e),
            CliError::Summary(e) => match e {
                SummaryError::EmptyDraws => "EmptyDraws",
                SummaryError::InvalidRange { .. } => "InvalidRange",
                SummaryError::InvalidLevel(_) => "InvalidLevel",
                SummaryError::InvalidThreshold(_) => "InvalidThreshold",
                SummaryError::TooFewPoints { .. } => "TooFewPoints",
                SummaryError::DegenerateDraws => "DegenerateDraws",
            },
            CliError::Regress(e) => regress(e),
            CliError::Diagnostics(e) => match e {
                DiagnosticsError::TooFewIterations { .. } => "TooFewIterations",
                DiagnosticsError::ZeroWithinVariance { .. } => "ZeroWithinVariance",
            },
            CliError::Render(e) => match e {
                RenderError::EmptyCurve => "EmptyCurve",
                RenderError::InvalidDensity(_) => "InvalidDensity",
                RenderError::InvalidConfig(_) => "InvalidConfig",
            },
            CliError::Usage(_) => "UsageError",
            CliError::Io { .. } => "IoError",
        }
    }

    /// `error[Class]: message` on a single line.
    pub fn report_line(&self) -> String {
        let message = self.to_string().replace('\n', " ");
        format!("error[{}]: {message}", self.class())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Warning,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Warning => 1,
        }
    }
}

pub const USAGE_EXIT: i32 = 2;

fn io_err(path: &std::path::Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

/// A summary tagged with its parameter, printable as one machine-readable
/// line and parseable back without loss.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub parameter: String,
    pub summary: PosteriorSummary,
}

impl fmt::Display for SummaryRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.summary;
        write!(
            f,
            "summary param={} level={} mean={} ci_low={} ci_high={} p_gt0={} p_lt0={}",
            self.parameter, s.level, s.mean, s.ci_low, s.ci_high, s.p_greater_zero, s.p_less_zero
        )
    }
}

impl std::str::FromStr for SummaryRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut fields = line.split(' ');
        if fields.next() != Some("summary") {
            return Err("not a summary line".into());
        }
        let mut get = |key: &str| -> Result<String, String> {
            let field = fields.next().ok_or_else(|| format!("missing `{key}`"))?;
            field
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| format!("expected `{key}=`, found `{field}`"))
        };
        let parameter = get("param")?;
        let mut num = |key: &str| -> Result<f64, String> {
            get(key)?.parse().map_err(|_| format!("bad number for `{key}`"))
        };
        let summary = PosteriorSummary {
            level: num("level")?,
            mean: num("mean")?,
            ci_low: num("ci_low")?,
            ci_high: num("ci_high")?,
            p_greater_zero: num("p_gt0")?,
            p_less_zero: num("p_lt0")?,
        };
        Ok(SummaryRecord { parameter, summary })
    }
}

fn level_header(level: f64) -> String {
    format!("{}% interval", (level * 100.0 * 1e6).round() / 1e6)
}

fn write_summary_table<W: Write>(out: &mut W, rows: &[(String, PosteriorSummary)], n: Option<usize>) -> io::Result<()> {
    let level = rows.first().map_or(0.95, |r| r.1.level);
    write!(
        out,
        "{:<12} {:>9} {:>22} {:>7} {:>7}",
        "parameter",
        "mean",
        level_header(level),
        "P(>0)",
        "P(<0)"
    )?;
    if n.is_some() {
        write!(out, " {:>6}", "N")?;
    }
    writeln!(out)?;
    for (name, s) in rows {
        let interval = format!("[{:.2}, {:.2}]", s.ci_low, s.ci_high);
        write!(
            out,
            "{:<12} {:>9.2} {:>22} {:>7.2} {:>7.2}",
            name, s.mean, interval, s.p_greater_zero, s.p_less_zero
        )?;
        if let Some(n) = n {
            write!(out, " {n:>6}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn write_diagnostics<W: Write>(
    out: &mut W,
    results: &[(String, Result<Diagnostics, DiagnosticsError>)],
) -> io::Result<Outcome> {
    let mut outcome = Outcome::Success;
    writeln!(out, "{:<12} {:>10} {:>12}", "parameter", "rhat", "ess")?;
    for (name, r) in results {
        match r {
            Ok(d) => {
                writeln!(out, "{:<12} {:>10.4} {:>12.0}", name, d.rhat, d.ess)?;
                if !(d.rhat <= RHAT_WARNING) {
                    outcome = Outcome::Warning;
                }
            }
            Err(e) => {
                writeln!(out, "{:<12} {:>10} {:>12}  ({e})", name, "undefined", "-")?;
                outcome = Outcome::Warning;
            }
        }
    }
    for (name, r) in results {
        if let Ok(d) = r {
            writeln!(out, "diagnostics param={name} rhat={} ess={}", d.rhat, d.ess)?;
        }
    }
    if outcome == Outcome::Warning {
        writeln!(out, "warning: R-hat above {RHAT_WARNING} or undefined; chains may not have converged")?;
    }
    Ok(outcome)
}

fn model_spec(args: &FitArgs) -> Result<ModelSpec, CliError> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            ModelSpec::from_config_str(&text)?
        }
        None => ModelSpec::default(),
    };
    if let Some(v) = &args.outcome {
        spec.outcome_column = v.clone();
    }
    if let Some(v) = &args.treatment {
        spec.treatment_column = v.clone();
    }
    if let Some(v) = args.chains {
        spec.chains = v as usize;
    }
    if let Some(v) = args.iters {
        spec.iterations = v as usize;
    }
    if let Some(v) = args.warmup {
        spec.warmup = v as usize;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    for p in &args.priors {
        let (key, value) = p
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--prior expects KEY=VALUE, got `{p}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--prior {key}: `{value}` is not a number")))?;
        spec.priors.set(key.trim(), value)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn cmd_fit<W: Write>(args: &FitArgs, out: &mut W) -> Result<Outcome, CliError> {
    let spec = model_spec(args)?;
    let data = ingest::read_dataset(&args.data, &spec.outcome_column, &spec.treatment_column)?;
    let backend = if args.sequential { Backend::Sequential } else { Backend::Parallel };
    let fit = regress::fit_with(&data, &spec, backend)?;
    ingest::write_draws(&fit.draws, &args.out)?;

    let mut rows = Vec::new();
    for view in fit.draws.views() {
        rows.push((view.name().to_string(), summary::summarize(view.pooled(), args.level)?));
    }
    let io = |r: io::Result<()>| r.map_err(stdout_err);
    io(writeln!(
        out,
        "{} chains x {} iterations ({} warmup), seed {}",
        spec.chains, spec.iterations, spec.warmup, spec.seed
    ))?;
    io(write_summary_table(out, &rows, Some(data.len())))?;
    for (name, s) in &rows {
        io(writeln!(out, "{}", SummaryRecord { parameter: name.clone(), summary: *s }))?;
    }
    let diag: Vec<_> = fit
        .diagnostics
        .iter()
        .map(|d| (d.parameter.clone(), Ok(d.clone())))
        .collect();
    io(writeln!(out))?;
    let outcome = write_diagnostics(out, &diag).map_err(stdout_err)?;
    for c in &fit.chain_stats {
        io(writeln!(
            out,
            "chain {}: {:.2} sigma slice evaluations per iteration",
            c.chain + 1,
            c.evaluations_per_iteration(spec.iterations)
        ))?;
    }
    io(writeln!(out, "wrote {}", args.out.display()))?;
    Ok(outcome)
}

fn cmd_summarize<W: Write>(args: &SummarizeArgs, out: &mut W) -> Result<Outcome, CliError> {
    let draws = ingest::read_draws(&args.draws)?;
    let view = draws.view(&args.param)?;
    let s = summary::summarize(view.pooled(), args.level)?;
    write_summary_table(out, &[(args.param.clone(), s)], None).map_err(stdout_err)?;
    writeln!(out, "{}", SummaryRecord { parameter: args.param.clone(), summary: s }).map_err(stdout_err)?;
    Ok(Outcome::Success)
}

fn print_zero_probabilities<W: Write>(out: &mut W, name: &str, pooled: &[f64]) -> Result<(), CliError> {
    let gt = summary::prob_exceeds(pooled, 0.0)?;
    let lt = summary::prob_below(pooled, 0.0)?;
    let io = |r: io::Result<()>| r.map_err(stdout_err);
    io(writeln!(out, "P({name} > 0) = {gt:.4}"))?;
    io(writeln!(out, "P({name} < 0) = {lt:.4}"))?;
    io(writeln!(out, "zero param={name} p_gt0={gt} p_lt0={lt}"))?;
    Ok(())
}

fn plot_config(args: &PlotArgs, mut cfg: PlotConfig) -> PlotConfig {
    cfg.title = args.title.clone();
    cfg.unbounded_support = !args.bounded;
    cfg
}

fn cmd_ccdf<W: Write>(args: &PlotArgs, out: &mut W) -> Result<Outcome, CliError> {
    let draws = ingest::read_draws(&args.draws)?;
    let view = draws.view(&args.param)?;
    let curve = summary::ccdf(view.pooled(), args.points as usize)?;
    let svg = render::render_ccdf(&curve, &plot_config(args, PlotConfig::default()))?;
    fs::write(&args.out, svg).map_err(io_err(&args.out))?;
    print_zero_probabilities(out, &args.param, view.pooled())?;
    writeln!(out, "wrote {}", args.out.display()).map_err(stdout_err)?;
    Ok(Outcome::Success)
}

fn cmd_density<W: Write>(args: &PlotArgs, out: &mut W) -> Result<Outcome, CliError> {
    let draws = ingest::read_draws(&args.draws)?;
    let view = draws.view(&args.param)?;
    let dens = summary::kde(view.pooled(), args.points as usize)?;
    let svg = render::render_density(&dens, &plot_config(args, PlotConfig::density()))?;
    fs::write(&args.out, svg).map_err(io_err(&args.out))?;
    print_zero_probabilities(out, &args.param, view.pooled())?;
    writeln!(out, "bandwidth = {}", dens.bandwidth).map_err(stdout_err)?;
    writeln!(out, "wrote {}", args.out.display()).map_err(stdout_err)?;
    Ok(Outcome::Success)
}

fn cmd_diagnose<W: Write>(args: &DiagnoseArgs, out: &mut W) -> Result<Outcome, CliError> {
    let draws: Draws = ingest::read_draws(&args.draws)?;
    let results = diagnostics::diagnose_all(&draws, Backend::default());
    if let Some(Err(e @ DiagnosticsError::TooFewIterations { .. })) = results.first() {
        return Err(e.clone().into());
    }
    writeln!(
        out,
        "{} chains x {} iterations",
        draws.chains(),
        draws.iterations_per_chain()
    )
    .map_err(stdout_err)?;
    let named: Vec<_> = draws
        .parameter_names()
        .iter()
        .cloned()
        .zip(results)
        .collect();
    write_diagnostics(out, &named).map_err(stdout_err)
}

fn cmd_simulate<W: Write>(args: &SimulateArgs, out: &mut W) -> Result<Outcome, CliError> {
    let io = |r: io::Result<()>| r.map_err(stdout_err);
    let dataset = match (args.preset, args.n) {
        (Some(Preset::Figure1), _) => {
            let draws = regress::figure1_draws(args.seed)?;
            ingest::write_draws(&draws, &args.out)?;
            io(writeln!(
                out,
                "wrote {} draws of `theta` to {}",
                draws.total_draws(),
                args.out.display()
            ))?;
            return Ok(Outcome::Success);
        }
        (Some(Preset::Bombing), _) => ExperimentPreset::Bombing.simulate(args.seed)?,
        (Some(Preset::Occupation), _) => ExperimentPreset::Occupation.simulate(args.seed)?,
        (None, Some(n)) if args.matched => {
            simulate_matched_experiment(n, args.beta0, args.beta1, args.sd, args.seed)?
        }
        (None, Some(n)) => simulate_experiment(n, args.beta0, args.beta1, args.sd, args.seed)?,
        (None, None) => return Err(CliError::Usage("simulate needs --preset or --n".into())),
    };
    ingest::write_dataset(&dataset, &args.out, &args.outcome, &args.treatment)?;
    let (control, treated) = dataset.arm_means();
    io(writeln!(
        out,
        "wrote {} units ({} treated) to {}; arm means {:.3} / {:.3}",
        dataset.len(),
        dataset.treated(),
        args.out.display(),
        control,
        treated
    ))?;
    Ok(Outcome::Success)
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a, out),
        Command::Summarize(a) => cmd_summarize(a, out),
        Command::Ccdf(a) => cmd_ccdf(a, out),
        Command::Density(a) => cmd_density(a, out),
        Command::Diagnose(a) => cmd_diagnose(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
    }
}
