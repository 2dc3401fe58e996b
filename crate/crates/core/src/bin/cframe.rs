use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cstar_frames::frames::ExponentConvention;
use cstar_frames::random::Caps;
use cstar_frames::report::{self, AnalysisReport, Format};
use cstar_frames::scenario::{self, Scenario};
use cstar_frames::suite::run_property_suite;
use cstar_frames::{Error, Result};

/// Controlled and *-integral frames over matrix algebras.
///
/// A SCENARIO is a TOML file, or one of the builtin names `example1` and
/// `example2` (tuned with `--alpha` and `--n`).
#[derive(Parser, Debug)]
#[command(name = "cframe", version)]
struct Cli {
    /// Seed used when the scenario does not set one.
    #[arg(long, global = true, env = "CFRAME_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bounds, diagnostics, conversions and a reconstruction trace.
    Analyze {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Like `analyze`, but exits with status 1 when any verdict fails.
    Verify {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Randomized property suite.
    Suite {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Lower-bound exponent for the plain to controlled conversion.
        #[arg(long, value_enum, default_value_t = Conversion::Proof)]
        conversion: Conversion,
        #[arg(long, default_value_t = Caps::default().max_dim)]
        max_dim: usize,
        #[arg(long, default_value_t = Caps::default().max_rank)]
        max_rank: usize,
        #[arg(long, default_value_t = Caps::default().max_nodes)]
        max_nodes: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reconstruct a seeded element through the Neumann series.
    Reconstruct {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Relative residual target; defaults to the scenario tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the frame vectors as CSV.
    DumpFrame {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ScenarioArg {
    scenario: String,
    /// Builtin parameter α.
    #[arg(long)]
    alpha: Option<f64>,
    /// Builtin truncation for `example2`.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Human,
    Json,
    Csv,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum Conversion {
    Proof,
    Statement,
}

impl ScenarioArg {
    fn load(&self, seed: u64) -> Result<Scenario> {
        let builtin = match self.scenario.as_str() {
            "example1" | "example2" if !Path::new(&self.scenario).exists() => Some(self.scenario.as_str()),
            _ => None,
        };
        let Some(name) = builtin else {
            if self.alpha.is_some() || self.n.is_some() {
                return Err(Error::validation("--alpha", "only applies to builtin scenarios"));
            }
            return scenario::load_scenario(&self.scenario, seed);
        };
        let alpha = self.alpha.unwrap_or(1.0);
        let text = match (name, self.n) {
            ("example1", None) => format!("[frame]\nkind = \"example1\"\nalpha = {alpha:?}\n"),
            ("example1", Some(_)) => return Err(Error::validation("--n", "example1 has no truncation")),
            (_, n) => format!("[frame]\nkind = \"example2\"\nalpha = {alpha:?}\nn = {}\n", n.unwrap_or(100)),
        };
        scenario::parse_scenario(&text, name, seed)
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_report(report: &AnalysisReport, output: &OutputArgs) -> Result<()> {
    let format = match output.format {
        FormatArg::Human => Format::Human,
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let mut out = sink(&output.out)?;
    report::emit(report, format, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Returns whether every requested verification passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analyze { scenario, output } => {
            let report = report::run_analysis(&scenario.load(cli.seed)?)?;
            write_report(&report, &output)?;
            Ok(true)
        }
        Command::Verify { scenario, output } => {
            let report = report::run_analysis(&scenario.load(cli.seed)?)?;
            write_report(&report, &output)?;
            Ok(report.all_pass())
        }
        Command::Suite { cases, conversion, max_dim, max_rank, max_nodes, output } => {
            let convention = match conversion {
                Conversion::Proof => ExponentConvention::Proof,
                Conversion::Statement => ExponentConvention::Statement,
            };
            let caps = Caps { max_dim, max_rank, max_nodes };
            let start = std::time::Instant::now();
            let mut report = AnalysisReport::from_suite(run_property_suite(cli.seed, cases, caps, convention)?);
            report.wall_time = Some(start.elapsed());
            write_report(&report, &output)?;
            Ok(report.all_pass())
        }
        Command::Reconstruct { scenario, tol, output } => {
            let sc = scenario.load(cli.seed)?;
            let tol = tol.unwrap_or(sc.tolerances.reconstruction);
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::validation("--tol", format!("must lie in (0, 1), got {tol}")));
            }
            let report = report::run_reconstruction(&sc, tol)?;
            write_report(&report, &output)?;
            Ok(report.all_pass())
        }
        Command::DumpFrame { scenario, out } => {
            let sc = scenario.load(cli.seed)?;
            let mut sink = sink(&out)?;
            report::dump_frame(&sc, &mut sink)?;
            sink.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("cframe: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
