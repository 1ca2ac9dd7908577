//! `svem`: designs, ensemble fits, predictions, simulations and the
//! fermentation case study from the command line.

mod casestudy;
mod design;
mod fit;
mod io;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use svem_core::engine::DEFAULT_NBOOT;
use svem_core::rng::DEFAULT_SEED;
use svem_core::{Criterion, SelectorKind};

#[derive(Parser)]
#[command(name = "svem", version, about = "Self-validated ensemble modeling for designed experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a coded design as CSV.
    Design(DesignArgs),
    /// Fit an ensemble (or single-shot) full-quadratic model to a CSV.
    Fit(FitArgs),
    /// Predict from a coefficients CSV at the runs of a design CSV.
    Predict(PredictArgs),
    /// Run a simulation scenario from a key=value config file.
    Simulate(SimulateArgs),
    /// Fit the fermentation DSD and score it on the CCD.
    Casestudy(CasestudyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignChoice {
    Dsd,
    Bbd,
    Sfd,
}

#[derive(Args)]
pub struct DesignArgs {
    #[arg(long, value_enum)]
    pub kind: DesignChoice,
    /// Number of factors.
    #[arg(long)]
    pub k: usize,
    /// DSD only: extra conference-matrix columns dropped from the output.
    #[arg(long, default_value_t = svem_core::designs::DEFAULT_FAKE_FACTORS)]
    pub fake_factors: usize,
    /// Center runs (DSD default 1, BBD default 3, or 6 for five factors).
    #[arg(long)]
    pub center_runs: Option<usize>,
    /// SFD only: number of runs.
    #[arg(long)]
    pub runs: Option<usize>,
    /// SFD only.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Emit the full-quadratic model matrix instead of the factor settings.
    #[arg(long)]
    pub expanded: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectorChoice {
    Fwd,
    Pfwd,
    Lasso,
}

impl From<SelectorChoice> for SelectorKind {
    fn from(c: SelectorChoice) -> Self {
        match c {
            SelectorChoice::Fwd => SelectorKind::Forward,
            SelectorChoice::Pfwd => SelectorKind::PrunedForward,
            SelectorChoice::Lasso => SelectorKind::Lasso,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionChoice {
    Autovalid,
    Bic,
    Aicc,
}

impl From<CriterionChoice> for Criterion {
    fn from(c: CriterionChoice) -> Self {
        match c {
            CriterionChoice::Autovalid => Criterion::AutoValidation,
            CriterionChoice::Bic => Criterion::Bic,
            CriterionChoice::Aicc => Criterion::Aicc,
        }
    }
}

#[derive(Args)]
pub struct FitArgs {
    /// CSV with one column per factor plus the response column.
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the response column.
    #[arg(long, default_value = "Y")]
    pub response: String,
    #[arg(long, default_value_t = DEFAULT_NBOOT)]
    pub nboot: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "fwd")]
    pub selector: SelectorChoice,
    /// `autovalid` fits the ensemble; `bic` and `aicc` fit one unit-weight model.
    #[arg(long, value_enum, default_value = "autovalid")]
    pub criterion: CriterionChoice,
    /// Lasso grid size.
    #[arg(long, default_value_t = 100)]
    pub lambda_grid: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lambda_min_ratio: f64,
    /// Cap on forward additions.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Coefficients CSV (`term,estimate,selection_fraction`); stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the nboot x (P+1) ensemble matrix here.
    #[arg(long)]
    pub dump_ensemble: Option<PathBuf>,
    /// Write one iteration's training and auto-validation weights here.
    #[arg(long)]
    pub dump_weights: Option<PathBuf>,
    /// Iteration whose weights `--dump-weights` writes.
    #[arg(long, default_value_t = 0)]
    pub dump_iteration: usize,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Coefficients CSV written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    /// Design CSV with one column per factor.
    #[arg(long)]
    pub design: PathBuf,
    /// Column of the design CSV to ignore if present.
    #[arg(long, default_value = "Y")]
    pub response: String,
    /// Predictions CSV; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// key=value lines: design, k, sparsity, nreps, methods, nboot, sfd_size,
    /// seed, noise, sweep.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseMethodChoice {
    SvemFwd,
    SvemLasso,
    LassoBic,
    All,
}

#[derive(Args)]
pub struct CasestudyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub method: CaseMethodChoice,
    #[arg(long, default_value_t = svem_core::casestudy::CASE_STUDY_NBOOT)]
    pub nboot: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Runs `f` on a pool of `threads` workers, or the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match threads {
        None => f(),
        Some(0) => anyhow::bail!("--threads must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot start worker threads")?
            .install(f),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design(a) => design::run(&a),
        Command::Fit(a) => fit::run(&a),
        Command::Predict(a) => fit::predict(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::Casestudy(a) => casestudy::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
