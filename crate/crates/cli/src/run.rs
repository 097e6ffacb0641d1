//! Task execution and reports.

use std::time::Instant;

use anyhow::{bail, Context};
use proxpair::metrics::{self, Budget, CoreMethod, MateWitness, PairMetrics, Screening, SemisharpVerdict};
use proxpair::solver::{self, SolveOptions};
use proxpair::structure::{self, MinimizingSequence, NestedTrace};
use proxpair::{BodyPair, ConvexBody, Error, ShrinkTrace, StrictConvexity, StructureEstimate, Vector};
use serde::Serialize;

use crate::spec::{ProblemSpec, TaskKind, TaskSpec};

/// Command-line overrides applied to every task.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoreSummary {
    pub method: CoreMethod,
    pub certified_exact: bool,
    pub covers_a: bool,
    pub covers_b: bool,
    pub screening: Screening,
    pub matched_pairs: usize,
    pub parallel_shift: Option<Vector>,
    pub a0: ConvexBody,
    pub b0: ConvexBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeOutput {
    pub metrics: PairMetrics,
    pub core: CoreSummary,
    pub semisharp: SemisharpVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureOutput {
    pub estimate: StructureEstimate,
    pub nested: Vec<NestedTrace>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FalsifyOutput {
    pub strict_convexity: StrictConvexity,
    pub semisharp: SemisharpVerdict,
    pub uc_counterexample: Option<MateWitness>,
    /// Largest Pythagorean residual over pairs of matched core points.
    pub pythagorean_max: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskOutput {
    Analyze(Box<AnalyzeOutput>),
    Structure(Box<StructureOutput>),
    Solve(Box<ShrinkTrace>),
    Falsify(Box<FalsifyOutput>),
    Failed { error: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskResult {
    pub task: TaskKind,
    pub pair: (String, String),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    pub tol: f64,
    pub seed: u64,
    pub budget: usize,
    pub certified: bool,
    pub output: TaskOutput,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub spec: String,
    pub seed: u64,
    pub overrides: Overrides,
    pub results: Vec<TaskResult>,
    pub certified: bool,
    /// Seconds; the only field allowed to differ between identical runs.
    pub wall_time: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per task.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let status = if r.certified { "certified" } else { "NOT certified" };
            let detail = match &r.output {
                TaskOutput::Analyze(a) => format!(
                    "d = {:.9}, delta = {:.9}, proximal = {}, semisharp = {}",
                    a.metrics.d, a.metrics.delta, a.metrics.flags.proximal, a.metrics.flags.semisharp
                ),
                TaskOutput::Structure(s) => {
                    format!("N_hat = {:.6}, c0_hat = {:.6}", s.estimate.n_hat, s.estimate.c0_hat)
                }
                TaskOutput::Solve(t) => match t.solution() {
                    Some((x, _)) => format!("x* = {x:?}, steps = {}", t.iterations.len() - 1),
                    None => format!("{:?}", t.outcome),
                },
                TaskOutput::Falsify(f) => format!(
                    "semisharp fails = {}, UC counterexample = {}",
                    f.semisharp.fails(),
                    f.uc_counterexample.is_some()
                ),
                TaskOutput::Failed { error } => error.clone(),
            };
            out.push_str(&format!(
                "{} {}-{}: {status}; {detail}\n",
                r.task.name(),
                r.pair.0,
                r.pair.1
            ));
        }
        out
    }
}

/// Library errors that mean a certificate could not be produced, as opposed
/// to invalid input.
pub fn is_certificate_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::GapNotClosed { .. }
            | Error::Solver { .. }
            | Error::OrbitNotStabilized { .. }
            | Error::EmptyAdmissible { .. }
            | Error::DegeneratePair
            | Error::NoMate { .. }
    )
}

fn default_budget(kind: TaskKind) -> usize {
    match kind {
        TaskKind::Structure => 256,
        _ => 64,
    }
}

struct Params {
    tol: f64,
    seed: u64,
    budget: usize,
    levels: usize,
    max_iter: usize,
    c: Vec<f64>,
}

fn resolve(spec: &ProblemSpec, t: &TaskSpec, ov: &Overrides) -> Params {
    Params {
        tol: ov.tol.or(t.tol).or(spec.tol).unwrap_or(proxpair::DEFAULT_TOL),
        seed: ov.seed.or(t.seed).unwrap_or(spec.seed),
        budget: ov.budget.or(t.budget).unwrap_or(default_budget(t.task)),
        levels: ov.levels.or(t.levels).unwrap_or(0),
        max_iter: ov.max_iter.or(t.max_iter).unwrap_or(60),
        c: t.c.clone().unwrap_or_else(|| vec![0.95]),
    }
}

/// The spec's tasks of `kind`, or one default task per pair (per pair and
/// map for `solve`) when the spec lists none.
pub fn tasks_of_kind(spec: &ProblemSpec, kind: TaskKind) -> anyhow::Result<Vec<TaskSpec>> {
    let listed: Vec<TaskSpec> = spec.tasks.iter().filter(|t| t.task == kind).cloned().collect();
    if !listed.is_empty() {
        return Ok(listed);
    }
    let mut out = Vec::new();
    for pair in 0..spec.pairs.len() {
        if kind == TaskKind::Solve {
            for m in spec.maps.keys() {
                out.push(TaskSpec {
                    map: Some(m.clone()),
                    ..TaskSpec::new(kind, pair)
                });
            }
        } else {
            out.push(TaskSpec::new(kind, pair));
        }
    }
    if out.is_empty() {
        bail!("spec `{}` has nothing to {}", spec.name, kind.name());
    }
    Ok(out)
}

fn budget(p: &Params) -> Budget {
    Budget {
        samples: p.budget,
        seed: p.seed,
        ..Budget::default()
    }
}

fn run_task(spec: &ProblemSpec, pair: &BodyPair, t: &TaskSpec, p: &Params) -> proxpair::Result<(bool, TaskOutput)> {
    let b = budget(p);
    match t.task {
        TaskKind::Analyze => {
            let a = metrics::analyze(pair, p.tol, &b)?;
            let core = &a.core;
            let summary = CoreSummary {
                method: core.method,
                certified_exact: core.certified_exact,
                covers_a: core.covers_a(),
                covers_b: core.covers_b(),
                screening: core.screening.clone(),
                matched_pairs: core.pairs.len(),
                parallel_shift: core.parallel_shift.clone(),
                a0: core.a0.clone(),
                b0: core.b0.clone(),
            };
            Ok((
                true,
                TaskOutput::Analyze(Box::new(AnalyzeOutput {
                    metrics: a.metrics,
                    core: summary,
                    semisharp: a.semisharp,
                })),
            ))
        }
        TaskKind::Structure => {
            let core = metrics::proximal_core(pair, p.tol, &b)?;
            let semi = metrics::semisharp_check(pair, &core, p.tol, &b)?;
            let estimate = structure::estimate_n(pair, &core, Some(&semi), p.budget, p.seed, p.tol)?;
            let mut nested = Vec::new();
            if p.levels > 0 {
                let seq = MinimizingSequence::seeded(pair, &core, p.seed)?;
                for &c in &p.c {
                    nested.push(structure::nested_hull_demo(pair, &core, &seq, p.levels, c, p.tol, p.seed)?);
                }
            }
            let certified = nested.iter().all(|n| n.certified());
            Ok((certified, TaskOutput::Structure(Box::new(StructureOutput { estimate, nested }))))
        }
        TaskKind::Solve => {
            let name = t.map.as_deref().expect("validated solve task");
            let opts = SolveOptions {
                tol: p.tol,
                max_iter: p.max_iter,
                budget: b,
                c: t.c.as_ref().and_then(|c| c.first().copied()),
                ..SolveOptions::default()
            };
            let trace = solver::solve_bpp(pair, &spec.maps[name], &opts)?;
            Ok((trace.certified(), TaskOutput::Solve(Box::new(trace))))
        }
        TaskKind::Falsify => {
            let core = metrics::proximal_core(pair, p.tol, &b)?;
            let semisharp = metrics::semisharp_check(pair, &core, p.tol, &b)?;
            let uc = metrics::property_uc_falsify(pair, &core, p.tol, &b)?;
            let mut pyth: f64 = 0.0;
            for (x, _) in &core.pairs {
                for (_, y) in &core.pairs {
                    pyth = pyth.max(metrics::pythagorean_residual(pair, x, y, &core)?);
                }
            }
            Ok((
                true,
                TaskOutput::Falsify(Box::new(FalsifyOutput {
                    strict_convexity: pair.norm.is_strictly_convex(),
                    semisharp,
                    uc_counterexample: uc,
                    pythagorean_max: pyth,
                })),
            ))
        }
    }
}

/// Runs `tasks` of `spec` in order. Input errors abort; certificate failures
/// are recorded in the report.
pub fn execute(spec: &ProblemSpec, tasks: &[TaskSpec], ov: &Overrides) -> anyhow::Result<Report> {
    let start = Instant::now();
    let mut results = Vec::with_capacity(tasks.len());
    for (i, t) in tasks.iter().enumerate() {
        let (an, bn) = spec.pairs.get(t.pair).context("task pair index out of range")?.clone();
        let pair = BodyPair::new(spec.body(&an).clone(), spec.body(&bn).clone(), spec.norm.clone())
            .with_context(|| format!("pair {an}-{bn}"))?;
        let p = resolve(spec, t, ov);
        let (certified, output) = match run_task(spec, &pair, t, &p) {
            Ok(r) => r,
            Err(e) if is_certificate_failure(&e) => (false, TaskOutput::Failed { error: e.to_string() }),
            Err(e) => return Err(e).with_context(|| format!("task {i} ({}) on {an}-{bn}", t.task.name())),
        };
        results.push(TaskResult {
            task: t.task,
            pair: (an, bn),
            map: t.map.clone(),
            tol: p.tol,
            seed: p.seed,
            budget: p.budget,
            certified,
            output,
        });
    }
    let certified = results.iter().all(|r| r.certified);
    Ok(Report {
        tool: "proxpair".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        spec: spec.name.clone(),
        seed: ov.seed.unwrap_or(spec.seed),
        overrides: ov.clone(),
        results,
        certified,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
