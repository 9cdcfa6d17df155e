//! Command-line front end.
//!
//! Subcommands: `fit`, `infer`, `simulate-limit`, `mc-table` and `run`, which
//! executes a saved TOML configuration. Structured results go out as JSON,
//! vectors and tables as CSV. Exit codes: 0 on success, 2 for data and
//! argument errors, 3 when the requested segmentation is infeasible, 1 for
//! anything else.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{gl_pipeline_multiple, gl_pipeline_single, CriterionScale, InferenceConfig, PriorChoice};
use crate::io::{read_data_file, write_draws, write_json, write_pmf, write_prior, write_profile, InferenceReport};
use crate::limit_laws::{simulate_argmax_vstar, simulate_bayes_ratio, LimitGrid, LimitLaw};
use crate::loss::LossSpec;
use crate::lrv::LrvMethod;
use crate::ls::{fit_multiple, profile_single};
use crate::mc::{run_table, table_spec, write_replications, write_rows, McConfig};
use crate::model::{BreakSpec, Structure};
use crate::rng;
use crate::stats;

/// Full description of one invocation; round-trips through TOML.
#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "glbreak", version, about = "Generalized Laplace inference on structural break dates")]
pub struct RunConfig {
    /// Master seed; falls back to GLBREAK_SEED, then a built-in default.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads; changes wall time only.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Main output file instead of stdout.
    #[arg(long, short = 'o', global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Print the configuration as TOML and exit.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Least-squares break dates as JSON.
    Fit(FitArgs),
    /// Full generalized Laplace inference as JSON.
    Infer(InferArgs),
    /// Draws from a limit law: CSV sample and JSON quantiles.
    SimulateLimit(SimulateArgs),
    /// Monte Carlo table as CSV.
    McTable(McArgs),
    /// Execute a TOML configuration written by --dump-config.
    Run {
        config: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// CSV with header `y, w1.., z1..`.
    pub csv: PathBuf,
    /// Number of breaks.
    #[arg(short = 'm', long = "breaks", default_value_t = 1)]
    pub breaks: usize,
    #[arg(long, default_value_t = 0.15)]
    pub trimming: f64,
    /// `partial` (only Z breaks) or `pure`.
    #[arg(long, default_value = "partial")]
    pub structure: Structure,
}

impl DataArgs {
    fn spec(&self) -> Result<BreakSpec> {
        BreakSpec::new(self.breaks, self.trimming, self.structure)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Write the single-break profile as CSV.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorArg {
    /// Argmax limit law of the least-squares date.
    Limit,
    /// Bayes-type limit law under the chosen loss.
    Bayes,
    Uniform,
}

impl From<PriorArg> for PriorChoice {
    fn from(p: PriorArg) -> Self {
        match p {
            PriorArg::Limit => PriorChoice::Argmax,
            PriorArg::Bayes => PriorChoice::BayesRatio,
            PriorArg::Uniform => PriorChoice::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct InferArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// `squared`, `absolute`, `check:TAU` or `polynomial:POWER`.
    #[arg(long, default_value = "absolute")]
    pub loss: LossSpec,
    #[arg(long, value_enum, default_value = "limit")]
    pub prior: PriorArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    /// Criterion units in the quasi-posterior.
    #[arg(long, value_enum, default_value = "raw")]
    pub scale: ScaleArg,
    /// `plain`, `newey_west[:L]` or `prewhitened[:L]`.
    #[arg(long, default_value = "plain")]
    pub lrv: LrvMethod,
    /// Limit-law paths.
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Tilt of the Bayes-type prior.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Skip the sup-Wald test.
    #[arg(long)]
    #[serde(default)]
    pub no_sup_wald: bool,
    /// Criterion profile CSV; `_i` is appended per break when m > 1.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_out: Option<PathBuf>,
    /// Quasi-posterior CSV.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf_out: Option<PathBuf>,
    /// Prior CSV.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleArg {
    Raw,
    Standardized,
}

impl From<ScaleArg> for CriterionScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Raw => CriterionScale::Raw,
            ScaleArg::Standardized => CriterionScale::Standardized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawArg {
    Argmax,
    Bayes,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1.0)]
    pub xi_e: f64,
    #[arg(long, default_value_t = 1.0)]
    pub xi_z: f64,
    #[arg(long, value_enum, default_value = "argmax")]
    pub law: LawArg,
    /// Loss of the Bayes-type law.
    #[arg(long, default_value = "squared")]
    pub loss: LossSpec,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long, default_value_t = 30.0)]
    pub half_width: f64,
    /// Write the draws as CSV.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct McArgs {
    /// Table number, 1 to 6.
    #[arg(long)]
    pub table: u8,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 100)]
    pub t: usize,
    /// Paths in the shared argmax bank.
    #[arg(long, default_value_t = 20_000)]
    pub bank_paths: usize,
    /// Directory for per-replication CSVs, one per cell.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications_dir: Option<PathBuf>,
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::InfeasibleSegmentation { .. } | Error::EmptyProfile => 3,
        Error::InvalidData(_)
        | Error::InvalidSpec(_)
        | Error::InvalidLoss(_)
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::RankDeficient(_)
        | Error::InadmissibleDates { .. } => 2,
        _ => 1,
    }
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })
    }

    pub fn seed(&self) -> u64 {
        rng::resolve_seed(self.seed)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// `out.csv` becomes `out_2.csv` for break 2 when there are several breaks.
fn per_break_path(path: &Path, index: usize, count: usize) -> PathBuf {
    if count == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{index}"),
    };
    path.with_file_name(name)
}

#[derive(Serialize)]
struct FitReport<'a> {
    t: usize,
    dates: &'a [usize],
    #[serde(flatten)]
    fit: &'a crate::model::SegmentedFit,
}

fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let data = read_data_file(&args.data.csv)?;
    let spec = args.data.spec()?;
    let fit = fit_multiple(&data, &spec)?;
    if let Some(path) = &args.profile_out {
        let profile = profile_single(&data, &spec.with_breaks(1))?;
        write_profile(create(path)?, &profile)?;
    }
    write_json(
        out,
        &FitReport {
            t: data.len(),
            dates: &fit.break_dates,
            fit: &fit,
        },
    )
}

fn cmd_infer(args: &InferArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let data = read_data_file(&args.data.csv)?;
    let spec = args.data.spec()?;
    let config = InferenceConfig {
        alpha: args.alpha,
        temperature: args.temperature,
        scale: args.scale.into(),
        loss: args.loss,
        prior: args.prior.into(),
        lrv: args.lrv,
        n_paths: args.paths,
        kappa: args.kappa,
        seed,
        sup_wald: !args.no_sup_wald,
        ..Default::default()
    };
    let (report, breaks) = if spec.num_breaks == 1 {
        let r = gl_pipeline_single(&data, &spec, &config)?;
        (InferenceReport::single(data.len(), &r, seed), vec![r.inference])
    } else {
        let r = gl_pipeline_multiple(&data, &spec, &config)?;
        (InferenceReport::multiple(data.len(), &r, seed), r.breaks)
    };
    let n = breaks.len();
    for b in &breaks {
        if let Some(p) = &args.profile_out {
            write_profile(create(&per_break_path(p, b.index, n))?, &b.profile)?;
        }
        if let Some(p) = &args.pmf_out {
            write_pmf(create(&per_break_path(p, b.index, n))?, &b.posterior.dates, &b.posterior.pmf)?;
        }
        if let Some(p) = &args.prior_out {
            write_prior(create(&per_break_path(p, b.index, n))?, &b.prior)?;
        }
    }
    write_json(out, &report)
}

#[derive(Serialize)]
struct LimitReport {
    law: LimitLaw,
    n_paths: usize,
    seed: u64,
    grid: LimitGrid,
    doublings: usize,
    boundary_fraction: f64,
    non_integrable_paths: usize,
    mean: f64,
    std_dev: f64,
    quantiles: Vec<(f64, f64)>,
}

const REPORT_PROBS: [f64; 9] = [0.005, 0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975, 0.995];

fn cmd_simulate_limit(args: &SimulateArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let grid = LimitGrid {
        step: args.step,
        half_width: args.half_width,
    };
    let sample = match args.law {
        LawArg::Argmax => simulate_argmax_vstar(args.xi_e, args.xi_z, args.paths, grid, seed)?,
        LawArg::Bayes => simulate_bayes_ratio(args.loss, args.xi_e, args.xi_z, args.paths, grid, args.kappa, seed)?,
    };
    if let Some(p) = &args.draws_out {
        write_draws(create(p)?, &sample.draws)?;
    }
    let q = sample.quantiles(&REPORT_PROBS)?;
    write_json(
        out,
        &LimitReport {
            law: sample.law,
            n_paths: sample.draws.len(),
            seed,
            grid: sample.grid,
            doublings: sample.doublings,
            boundary_fraction: sample.boundary_fraction,
            non_integrable_paths: sample.non_integrable_paths,
            mean: stats::mean(&sample.draws),
            std_dev: stats::std_dev(&sample.draws),
            quantiles: REPORT_PROBS.iter().copied().zip(q).collect(),
        },
    )
}

fn cmd_mc_table(args: &McArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let table = table_spec(args.table)?;
    let config = McConfig {
        n_reps: args.reps,
        seed,
        t: args.t,
        bank_paths: args.bank_paths,
        ..Default::default()
    };
    let cells = run_table(&table, &config)?;
    if let Some(dir) = &args.replications_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        for c in &cells {
            let name = format!("table{}_{}_l{}_d{}.csv", table.number, c.model.label(), c.lambda0, c.delta0);
            write_replications(create(&dir.join(name))?, c)?;
        }
    }
    write_rows(out, &cells)
}

/// Runs a parsed configuration, writing the main result to `out` unless the
/// configuration names an output file.
pub fn execute(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    if config.dump_config {
        out.write_all(config.to_toml()?.as_bytes())?;
        return Ok(());
    }
    if let Command::Run { config: path } = &config.command {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let inner = RunConfig::from_toml(&text)?;
        if matches!(inner.command, Command::Run { .. }) {
            return Err(Error::InvalidSpec("a configuration cannot run another configuration".into()));
        }
        let merged = RunConfig {
            seed: config.seed.or(inner.seed),
            threads: config.threads.or(inner.threads),
            output: config.output.clone().or(inner.output),
            dump_config: false,
            command: inner.command,
        };
        return execute(&merged, out);
    }
    match &config.output {
        Some(path) => {
            let mut file = create(path)?;
            dispatch(config, &mut file)?;
            file.flush()?;
            Ok(())
        }
        None => dispatch(config, out),
    }
}

fn dispatch(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let seed = config.seed();
    let work = || -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match &config.command {
            Command::Fit(a) => cmd_fit(a, &mut buf)?,
            Command::Infer(a) => cmd_infer(a, seed, &mut buf)?,
            Command::SimulateLimit(a) => cmd_simulate_limit(a, seed, &mut buf)?,
            Command::McTable(a) => cmd_mc_table(a, seed, &mut buf)?,
            Command::Run { .. } => unreachable!("handled in execute"),
        }
        Ok(buf)
    };
    let bytes = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidSpec(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    out.write_all(&bytes)?;
    Ok(())
}

/// Parses `args`, runs the command and returns the exit status. Errors go to
/// `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&config, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = RunConfig::try_parse_from([
            "glbreak",
            "--seed",
            "7",
            "infer",
            "data.csv",
            "-m",
            "2",
            "--loss",
            "check:0.3",
            "--prior",
            "uniform",
            "--lrv",
            "prewhitened:4",
        ])
        .unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn every_subcommand_round_trips() {
        for argv in [
            vec!["glbreak", "fit", "x.csv", "--structure", "pure"],
            vec!["glbreak", "--threads", "2", "simulate-limit", "--law", "bayes", "--kappa", "4"],
            vec!["glbreak", "-o", "t.csv", "mc-table", "--table", "4", "--reps", "50"],
        ] {
            let cfg = RunConfig::try_parse_from(argv).unwrap();
            assert_eq!(RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse { line: 3, message: String::new() }), 2);
        let e = Error::InfeasibleSegmentation {
            breaks: 9,
            len: 10,
            min_len: 2,
        };
        assert_eq!(exit_code(&e.clone().at_stage("segmentation")), 3);
        assert_eq!(exit_code(&Error::EmptySample), 1);
    }

    #[test]
    fn per_break_paths() {
        assert_eq!(per_break_path(Path::new("a/pmf.csv"), 2, 3), PathBuf::from("a/pmf_2.csv"));
        assert_eq!(per_break_path(Path::new("pmf.csv"), 1, 1), PathBuf::from("pmf.csv"));
    }
}
