//! Command-line front end: spec files in, JSON reports out.

pub mod fixtures;
pub mod run;
pub mod spec;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use crate::run::{Overrides, Report};
use crate::spec::{ProblemSpec, TaskKind};

/// All tasks certified.
pub const EXIT_OK: i32 = 0;
/// Invalid input or an internal error.
pub const EXIT_INPUT: i32 = 1;
/// A certificate could not be produced.
pub const EXIT_UNCERTIFIED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "proxpair", version, about = "Certified analysis of proximal pairs of convex bodies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every task listed in the spec.
    Run(TaskArgs),
    /// Distances, diameters, radii, proximal core and pair flags.
    Analyze(TaskArgs),
    /// Normal-structure estimates and the nested-hull demonstration.
    Structure(TaskArgs),
    /// Best proximity pair of a relatively nonexpansive cyclic map.
    Solve(TaskArgs),
    /// Searches for semisharpness and property UC counterexamples.
    Falsify(TaskArgs),
    /// Write the canonical fixture specs.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct TaskArgs {
    /// Problem spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl TaskArgs {
    fn overrides(&self) -> anyhow::Result<Overrides> {
        if let Some(t) = self.tol {
            anyhow::ensure!(t > 0.0 && t.is_finite(), "--tol must be positive, got {t}");
        }
        Ok(Overrides {
            tol: self.tol,
            seed: self.seed,
            budget: self.budget,
            levels: self.levels,
            max_iter: self.max_iter,
        })
    }
}

/// Runs the tasks of `spec` selected by `kind` (all tasks when
/// `None`).
pub fn run_spec(spec: &ProblemSpec, kind: Option<TaskKind>, ov: &Overrides) -> anyhow::Result<Report> {
    let tasks = match kind {
        Some(k) => run::tasks_of_kind(spec, k)?,
        None => spec.tasks.clone(),
    };
    run::execute(spec, &tasks, ov)
}

fn init_threads() {
    if let Some(n) = std::env::var("PROXPAIR_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // A second initialization in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn task_command(args: &TaskArgs, kind: Option<TaskKind>) -> anyhow::Result<i32> {
    let spec = ProblemSpec::load(&args.spec)?;
    let report = run_spec(&spec, kind, &args.overrides()?)?;
    let json = report.to_json();
    match &args.out {
        Some(p) => std::fs::write(p, &json).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{json}"),
    }
    eprint!("{}", report.summary());
    Ok(if report.certified { EXIT_OK } else { EXIT_UNCERTIFIED })
}

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Run(a) => task_command(a, None),
        Command::Analyze(a) => task_command(a, Some(TaskKind::Analyze)),
        Command::Structure(a) => task_command(a, Some(TaskKind::Structure)),
        Command::Solve(a) => task_command(a, Some(TaskKind::Solve)),
        Command::Falsify(a) => task_command(a, Some(TaskKind::Falsify)),
        Command::Fixtures { out } => {
            for p in fixtures::emit_fixtures(out).with_context(|| format!("cannot write {}", out.display()))? {
                eprintln!("wrote {}", p.display());
            }
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}
