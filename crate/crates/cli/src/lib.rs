//! Command-line front end for the weakrank library.
//!
//! Exit codes: 0 optimal, 1 input or usage error, 2 limit reached,
//! 3 infeasible.

pub mod args;
pub mod bench;
mod commands;
pub mod report;
pub mod tables;

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use weakrank::{SolveConfig, Strategy};

pub use args::{Builtin, FairnessArgs, InputArgs, Instance, VariantArgs, VariantKind};
pub use report::{BenchRow, Method, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "weakrank", version, about = "Exact rank aggregation into weak orders")]
pub struct Cli {
    /// Wall-clock limit per solve, in seconds.
    #[arg(long, global = true, value_name = "SECS")]
    pub time_limit: Option<f64>,
    /// Worker threads (bench: instances solved at once).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for synthetic instances.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and report the optimum.
    Solve(SolveCmd),
    /// List every optimal order, up to --optima-cap.
    Optima(SolveCmd),
    /// Solve over a range of bucket counts (p) or head sizes (k).
    Sweep(SweepCmd),
    /// Cumulative group shares over the prefixes of an order.
    Fairness(FairnessCmd),
    /// Write the integer programming model as an LP file.
    Export(ExportCmd),
    /// Solve the instances of a manifest into a CSV table.
    Bench(BenchCmd),
    /// Solve by enumerating every weak order.
    Oracle(OracleCmd),
    /// Convert a profile into a pair order matrix CSV.
    Ingest(IngestCmd),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SearchArgs {
    /// pairs, buckets or exhaustive [default: chosen by size and variant].
    #[arg(long)]
    pub strategy: Option<Strategy>,
    /// Stop after this many search nodes.
    #[arg(long, value_name = "N")]
    pub node_limit: Option<u64>,
    /// Most optima collected.
    #[arg(long, value_name = "N")]
    pub optima_cap: Option<usize>,
    /// Write search events as JSON lines.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepOver {
    P,
    K,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub sweep: SweepOver,
    /// First parameter value [default: 1].
    #[arg(long, value_name = "V")]
    pub from: Option<usize>,
    /// Last parameter value [default: n].
    #[arg(long, value_name = "V")]
    pub to: Option<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct FairnessCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Order to inspect instead of solving, e.g. `3 | 1 2 4 7 | 5 8 | 6`.
    #[arg(long, allow_hyphen_values = true)]
    pub order: Option<String>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulationArg {
    Assignment,
    Representative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    Omit,
    Substitute,
    Add,
}

#[derive(Debug, Args)]
pub struct ExportCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Bucket-count model (fixed-p, equal-sizes, prescribed) [default: strengthened assignment].
    #[arg(long, value_enum)]
    pub formulation: Option<FormulationArg>,
    /// Assignment model: leave out the comparability rows.
    #[arg(long)]
    pub no_comp: bool,
    /// Assignment model: leave out the transitivity rows.
    #[arg(long)]
    pub no_trans: bool,
    /// Assignment model: declare x continuous in [0, 1].
    #[arg(long)]
    pub relax_x: bool,
    /// Representative model: handling of the inequality β_rs + α_s <= x_rs + x_sr.
    #[arg(long, value_enum)]
    pub tie_inequality: Option<TieArg>,
    /// LP file to write [default: stdout].
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Check an order against the model and print the verdict.
    #[arg(long, value_name = "ORDER", allow_hyphen_values = true)]
    pub check: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    /// Manifest file.
    pub manifest: PathBuf,
    /// CSV file to write [default: stdout].
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Largest n enumerated.
    #[arg(long, default_value_t = weakrank::solver::DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct IngestCmd {
    #[command(flatten)]
    pub input: InputArgs,
    /// CSV file to write [default: stdout].
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

impl Cli {
    /// Solver settings from the global flags and a command's search flags.
    pub fn solve_config(&self, search: &SearchArgs) -> Result<SolveConfig> {
        let mut cfg = SolveConfig::default();
        if let Some(t) = self.time_limit {
            if !(t > 0.0 && t.is_finite()) {
                bail!("--time-limit must be a positive number of seconds");
            }
            cfg.time_limit = Some(Duration::from_secs_f64(t));
        }
        if let Some(j) = self.jobs {
            cfg.workers = j;
        }
        cfg.strategy = search.strategy;
        cfg.node_limit = search.node_limit;
        if let Some(cap) = search.optima_cap {
            cfg.optima_cap = cap;
        }
        cfg.trace = search.trace.is_some();
        cfg.validate()?;
        Ok(cfg)
    }

    fn format_or(&self, default: Format, allowed: &[Format]) -> Result<Format> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            bail!("this command does not write {:?} output", f);
        }
        Ok(f)
    }
}

/// Runs a parsed command line and returns the exit code. Errors map to exit 1.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Solve(cmd) => commands::solve(cli, cmd, out, err),
        Command::Optima(cmd) => commands::optima(cli, cmd, out, err),
        Command::Sweep(cmd) => commands::sweep(cli, cmd, out, err),
        Command::Fairness(cmd) => commands::fairness(cli, cmd, out, err),
        Command::Export(cmd) => commands::export(cli, cmd, out, err),
        Command::Bench(cmd) => commands::bench(cli, cmd, out),
        Command::Oracle(cmd) => commands::oracle(cli, cmd, out, err),
        Command::Ingest(cmd) => commands::ingest(cli, cmd, out, err),
    }
}

/// Parses `argv` and runs it. Usage errors print to `err` and give exit 1.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(err, "{}", e.render());
            return report::EXIT_ERROR;
        }
        Err(e) => {
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match run(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            report::EXIT_ERROR
        }
    }
}
