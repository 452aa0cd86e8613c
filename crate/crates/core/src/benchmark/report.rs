use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tasks::{generate, TaskEnv, TaskKind};
use super::trial::{is_feasible, run_trial, FailureReason, JudgeParams, SolverKind, TrialResult};
use crate::error::Result;
use crate::query::QueryContext;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkConfig {
    pub tasks: Vec<TaskKind>,
    pub solvers: Vec<SolverKind>,
    pub trials: usize,
    pub seed: u64,
    pub judge: Option<JudgeParams>,
}

/// One line of the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub task_kind: TaskKind,
    pub solver: SolverKind,
    pub rng_seed: u64,
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    pub deviation: Option<f64>,
    pub smoothness: Option<f64>,
    pub replans: Option<usize>,
    pub wall_ms: f64,
}

impl From<&TrialResult> for TrialRecord {
    fn from(t: &TrialResult) -> Self {
        TrialRecord {
            task_kind: t.task_kind,
            solver: t.solver,
            rng_seed: t.rng_seed,
            success: t.success,
            failure_reason: t.failure_reason,
            deviation: t.deviation,
            smoothness: t.smoothness,
            replans: t.replans,
            wall_ms: t.wall_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub task_kind: TaskKind,
    pub solver: SolverKind,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Trials in which every solver succeeded.
    pub common_trials: usize,
    pub mean_deviation: Option<f64>,
    pub mean_smoothness: Option<f64>,
    /// Means over this solver's own successes.
    pub mean_deviation_unfiltered: Option<f64>,
    pub mean_smoothness_unfiltered: Option<f64>,
    /// Detour plans over all trials, for solvers that plan.
    pub total_replans: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub judge: JudgeParams,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

impl BenchmarkReport {
    pub fn row(&self, task: TaskKind, solver: SolverKind) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.task_kind == task && r.solver == solver)
    }

    /// Records as JSON lines.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }

    pub fn summary_table(&self) -> String {
        let mut s = format!(
            "{:<20} {:<14} {:>8} {:>10} {:>10} {:>8}\n",
            "task", "solver", "success", "deviation", "smoothness", "replans"
        );
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        for r in &self.summary {
            s += &format!(
                "{:<20} {:<14} {:>7.0}% {:>10} {:>10} {:>8}\n",
                r.task_kind.name(),
                r.solver.name(),
                100.0 * r.success_rate,
                fmt(r.mean_deviation),
                fmt(r.mean_smoothness),
                r.total_replans.map_or("-".to_string(), |n| n.to_string())
            );
        }
        s
    }
}

/// Stream seed of trial `i` of task `task_index`.
pub fn stream_seed(seed: u64, task_index: usize, trial: usize) -> u64 {
    seed.wrapping_mul(1_000_003)
        .wrapping_add((task_index as u64) << 32)
        .wrapping_add(trial as u64)
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Replays `trials` streams of every task through every solver. Means are
/// taken over the trials in which all solvers succeeded; success rates over
/// all trials.
pub fn run_benchmark(ctx: &QueryContext, config: &BenchmarkConfig) -> Result<(BenchmarkReport, Vec<TrialResult>)> {
    let env = TaskEnv::from_context(ctx);
    let judge = config.judge.unwrap_or_else(|| JudgeParams::for_env(&env));
    let jobs: Vec<(usize, TaskKind, usize)> = config
        .tasks
        .iter()
        .enumerate()
        .flat_map(|(ti, &k)| (0..config.trials).map(move |i| (ti, k, i)))
        .collect();
    let per_job: Vec<Vec<TrialResult>> = jobs
        .par_iter()
        .map(|&(ti, kind, i)| {
            let stream = generate(&env, kind, stream_seed(config.seed, ti, i), &|p| is_feasible(ctx, &env, p))?;
            Ok(config
                .solvers
                .iter()
                .map(|&s| run_trial(ctx, &env, &stream, s, &judge))
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut summary = Vec::new();
    for &kind in &config.tasks {
        let groups: Vec<&Vec<TrialResult>> = per_job
            .iter()
            .filter(|g| g.first().is_some_and(|t| t.task_kind == kind))
            .collect();
        let common: Vec<bool> = groups.iter().map(|g| g.iter().all(|t| t.success)).collect();
        for (si, &solver) in config.solvers.iter().enumerate() {
            let mine: Vec<&TrialResult> = groups.iter().map(|g| &g[si]).collect();
            let successes = mine.iter().filter(|t| t.success).count();
            let filtered = || mine.iter().zip(&common).filter(|(_, &c)| c).map(|(t, _)| *t);
            let own = || mine.iter().filter(|t| t.success).copied();
            summary.push(SummaryRow {
                task_kind: kind,
                solver,
                trials: mine.len(),
                successes,
                success_rate: if mine.is_empty() { 0.0 } else { successes as f64 / mine.len() as f64 },
                common_trials: common.iter().filter(|&&c| c).count(),
                mean_deviation: mean(filtered().filter_map(|t| t.deviation)),
                mean_smoothness: mean(filtered().filter_map(|t| t.smoothness)),
                mean_deviation_unfiltered: mean(own().filter_map(|t| t.deviation)),
                mean_smoothness_unfiltered: mean(own().filter_map(|t| t.smoothness)),
                total_replans: mine.iter().map(|t| t.replans).sum(),
            });
        }
    }
    let results: Vec<TrialResult> = per_job.into_iter().flatten().collect();
    let report = BenchmarkReport {
        judge,
        records: results.iter().map(TrialRecord::from).collect(),
        summary,
    };
    Ok((report, results))
}
