//! Command-line front end for the guesstree toolkit.
//!
//! Resolves flags into a [`RunConfig`], prints the deterministic text
//! report to stdout, optionally mirrors it as JSON to `--out`, and maps
//! outcomes to exit codes: 0 when every assertion passes, 1 when the run
//! completed but an assertion failed, 2 when the input itself is malformed
//! (the message names the violated invariant).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use guesstree::catalog::Params;
use guesstree::certificate::FamilyMode;
use guesstree::runner::{run, Command, ModeSpec, RunConfig, RunError, Source, WeightSelector};

#[derive(Parser)]
#[command(
    name = "guesstree",
    version,
    about = "Compile guessing-colored decision trees into verified adversary certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Measure depth/guess statistics and compare them to registered claims
    Analyze(RunArgs),
    /// Build the dual certificate; verify feasibility and objective bounds
    Certify(RunArgs),
    /// Compile the span program; check its axioms and witness sizes
    Span(RunArgs),
    /// Certify a tree family: residuals, success rates, mixture objective
    Ensemble(RunArgs),
    /// Sweep a size range and check the per-size bounds
    Sweep(RunArgs),
    /// Re-run every member over the whole domain and report disagreements
    Validate(RunArgs),
}

impl Cmd {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Cmd::Analyze(a) => (Command::Analyze, a),
            Cmd::Certify(a) => (Command::Certify, a),
            Cmd::Span(a) => (Command::Span, a),
            Cmd::Ensemble(a) => (Command::Ensemble, a),
            Cmd::Sweep(a) => (Command::Sweep, a),
            Cmd::Validate(a) => (Command::Validate, a),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Catalog problem name (e.g. search, two_twos, matrix_bipartiteness)
    #[arg(long, value_name = "NAME")]
    problem: Option<String>,

    /// Problem parameters as key=value (repeatable; catalog runs only)
    #[arg(long = "params", value_name = "K=V", num_args = 1..)]
    params: Vec<String>,

    /// Explicit tree document (JSON); alternative to --problem
    #[arg(long, value_name = "FILE")]
    tree: Option<PathBuf>,

    /// Function table document (JSON); required with --tree
    #[arg(long, value_name = "FILE")]
    table: Option<PathBuf>,

    /// Pair verification effort: exhaustive | sampled:N
    #[arg(long, default_value = "exhaustive", value_name = "MODE")]
    mode: String,

    /// Weight schedule: default | generation | constant:B,R | file:PATH
    #[arg(long, default_value = "default", value_name = "SCHEDULE")]
    weights: String,

    /// Block-vector indexing: per-vertex | subset
    #[arg(long, default_value = "per-vertex", value_name = "MODE")]
    family: String,

    /// Seed for sampled verification and sweep sampling
    #[arg(long, default_value_t = 17)]
    seed: u64,

    /// Also write the report as JSON to this path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Tolerance overrides: feasibility=V | family=V | oracle=V (repeatable)
    #[arg(long = "tolerance", value_name = "K=V")]
    tolerance: Vec<String>,
}

fn build_config(command: Command, args: &RunArgs) -> Result<RunConfig, String> {
    let source = match (&args.problem, &args.tree) {
        (Some(problem), None) => Source::Catalog {
            problem: problem.clone(),
            params: Params::from_pairs(&args.params).map_err(|e| e.to_string())?,
        },
        (None, Some(tree)) => {
            if !args.params.is_empty() {
                return Err("--params applies to catalog problems, not tree files".to_string());
            }
            Source::Files {
                tree: tree.clone(),
                table: args.table.clone(),
            }
        }
        (Some(_), Some(_)) => return Err("pass either --problem or --tree, not both".to_string()),
        (None, None) => return Err("pass --problem NAME or --tree FILE".to_string()),
    };
    if args.table.is_some() && args.tree.is_none() {
        return Err("--table only accompanies --tree".to_string());
    }

    let mut config = RunConfig::new(command, source);
    config.mode = ModeSpec::parse(&args.mode)?;
    config.weights = WeightSelector::parse(&args.weights)?;
    config.family = FamilyMode::parse(&args.family).ok_or_else(|| {
        format!(
            "unknown family mode '{}' (expected per-vertex or subset)",
            args.family
        )
    })?;
    config.seed = args.seed;
    for t in &args.tolerance {
        let (key, value) = t
            .split_once('=')
            .ok_or_else(|| format!("tolerance '{t}' must look like key=value"))?;
        let value: f64 = value
            .parse()
            .map_err(|_| format!("bad tolerance value in '{t}'"))?;
        config.tolerances.set(key, value)?;
    }
    Ok(config)
}

fn real_main() -> u8 {
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    let config = match build_config(command, &args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(RunError::Malformed(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    print!("{}", report.render_text());
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error: writing {}: {e}", path.display());
            return 2;
        }
    }
    if report.pass {
        0
    } else {
        1
    }
}

fn main() -> ExitCode {
    ExitCode::from(real_main())
}
