//! `aqsheaf`: load a scenario, run one computation or suite, write a report.
//!
//! Exit status: 0 success, 1 input or structural error, 2 failed
//! verification, 3 resource budget exceeded.

mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use aqsheaf::exec::{with_workers, DEFAULT_BUDGET};
use aqsheaf::{Ctx, Error, Result};
use clap::{Args, Parser, Subcommand};

use commands::{GreenArgs, Outcome};

/// Environment variable naming a directory that receives one JSON report per run.
const REPORT_DIR_VAR: &str = "AQSHEAF_REPORT_DIR";

#[derive(Parser)]
#[command(name = "aqsheaf", version, about = "Nonabelian Čech cohomology and integration of sheaf series")]
struct Cli {
    /// Cap on the candidates any single enumeration may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads; reports do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print the JSON report instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Scenario file.
    #[arg(required_unless_present = "bundled", conflicts_with = "bundled")]
    scenario: Option<PathBuf>,
    /// Use a bundled instance instead of a file.
    #[arg(long)]
    bundled: Option<String>,
    /// Restrict to one series of the scenario.
    #[arg(long)]
    series: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Structure checks on every sheaf, series and extension.
    Validate(Input),
    /// H⁰, H¹, H² of each graded piece and torsor class counts.
    Cohomology(Input),
    /// Boundary maps of the primary complex and its cohomology.
    Primary(Input),
    /// Find an atlas whose linearisation is a given class.
    Integrate {
        #[command(flatten)]
        input: Input,
        /// Class id in H¹ of the graded piece.
        #[arg(long)]
        theta: u128,
        /// Series index of the graded piece.
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Sort graded classes into supermanifold, pseudo-supermanifold and obstructed.
    Classify {
        #[command(flatten)]
        input: Input,
        /// Every class of every graded piece.
        #[arg(long, conflicts_with_all = ["theta", "index"])]
        all: bool,
        #[arg(long, requires = "index")]
        theta: Option<u128>,
        #[arg(long, requires = "theta")]
        index: Option<usize>,
    },
    /// Run the task list of a scenario.
    Run(Input),
    /// Generate a Green model instance.
    Green {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "point")]
        nerve: String,
        /// Table series from G^(2) instead of shift coordinates.
        #[arg(long)]
        table: bool,
        /// Random transitions on triangle-free edges.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the generated scenario here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Run a named verification suite, or `all`.
    Verify {
        #[arg(long)]
        suite: String,
    },
}

fn load(input: &Input) -> Result<scenario::Scenario> {
    match (&input.scenario, &input.bundled) {
        (_, Some(id)) => scenario::bundled(id),
        (Some(path), None) => scenario::load(&path.to_string_lossy()),
        (None, None) => Err(Error::Input("no scenario given".into())),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Structural(_) | Error::Unsupported(_) => 1,
        Error::Verification { .. } => 2,
        Error::Resource { .. } => 3,
    }
}

fn write_report(name: &str, json: &str) -> Result<()> {
    let Some(dir) = std::env::var_os(REPORT_DIR_VAR) else {
        return Ok(());
    };
    let dir = PathBuf::from(dir);
    std::fs::create_dir_all(&dir).map_err(|e| Error::Input(format!("{}: {e}", dir.display())))?;
    let safe: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect();
    let path = dir.join(format!("{safe}.json"));
    std::fs::write(&path, json).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn emit(cli_json: bool, o: &Outcome) -> Result<u8> {
    let json = o.report.to_json();
    write_report(&format!("{}.{}", o.report.scenario, o.report.command), &json)?;
    if cli_json {
        print!("{json}");
    } else {
        for l in &o.lines {
            println!("{l}");
        }
        for f in &o.report.failures {
            println!("FAIL [{}] {}: {}", f.anchor, f.case, f.reason);
        }
    }
    Ok(if o.report.passed { 0 } else { 2 })
}

fn run(cli: &Cli) -> Result<u8> {
    let ctx = Ctx::with_budget(cli.budget);
    let ctx = &ctx;
    let outcome = match &cli.command {
        Command::Validate(i) => commands::validate(ctx, &load(i)?)?,
        Command::Cohomology(i) => commands::cohomology(ctx, &load(i)?, i.series.as_deref())?,
        Command::Primary(i) => commands::primary(ctx, &load(i)?, i.series.as_deref())?,
        Command::Integrate { input, theta, index } => {
            commands::integrate_class(ctx, &load(input)?, input.series.as_deref(), *index, *theta)?
        }
        Command::Classify { input, all, theta, index } => {
            let single = match (all, index, theta) {
                (true, _, _) => None,
                (false, Some(j), Some(t)) => Some((*j, *t)),
                _ => return Err(Error::Input("classify needs --all or --index with --theta".into())),
            };
            commands::classify_classes(ctx, &load(input)?, input.series.as_deref(), single)?
        }
        Command::Run(i) => commands::run_tasks(ctx, &load(i)?)?,
        Command::Green { p, q, n, nerve, table, seed, emit: path } => {
            let args = GreenArgs { p: *p, q: *q, n: *n, nerve: nerve.clone(), table: *table, seed: *seed };
            let (o, file) = commands::green(ctx, &args)?;
            if let Some(path) = path {
                let text = serde_json::to_string_pretty(&file).expect("scenario serialises") + "\n";
                std::fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            }
            o
        }
        Command::Verify { suite } => {
            let reports = commands::verify(ctx, suite)?;
            let mut code = 0;
            for r in &reports {
                let json = r.to_json();
                write_report(&format!("verify-{}", r.suite), &json)?;
                if cli.json {
                    print!("{json}");
                } else {
                    let passed = r.cases.iter().filter(|c| c.passed).count();
                    println!("{}: {} ({passed}/{} cases)", r.suite, if r.passed { "PASS" } else { "FAIL" }, r.cases.len());
                    for f in &r.failures {
                        println!("  FAIL [{}] {}: {}", f.anchor, f.case, f.reason);
                    }
                }
                if r.resource_exhausted {
                    code = 3;
                } else if !r.passed && code == 0 {
                    code = 2;
                }
            }
            return Ok(code);
        }
    };
    emit(cli.json, &outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.workers {
        Some(w) => with_workers(w, || run(&cli)).and_then(|r| r),
        None => run(&cli),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
