use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::dtw::{dtw_deviation, path_smoothness};
use super::tasks::{TaskEnv, TaskKind, WaypointStream};
use crate::chain::{Configuration, TaskPoint};
use crate::projection::project_detailed;
use crate::query::{teleop_step, QueryContext, TeleopParams, TeleopState, TeleopStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    ExpansionGrr,
    NewtonIk,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::ExpansionGrr => "expansion-grr",
            SolverKind::NewtonIk => "newton-ik",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [SolverKind::ExpansionGrr, SolverKind::NewtonIk]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    LocalMinima,
    SelfCollision,
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JudgeParams {
    /// Largest final distance to the last reachable input.
    pub goal_tolerance: f64,
    /// Consecutive still steps that count as a stall.
    pub stall_steps: usize,
    /// Output motion per step below which the output is still.
    pub still_motion: f64,
    /// Reachable input motion over a still window that makes it a stall.
    pub stall_input_motion: f64,
    /// Extra ticks holding the last input while the solver is still busy.
    pub settle_ticks: usize,
}

impl JudgeParams {
    /// Goal tolerance of one grid cell diagonal; stall window of 25 steps.
    pub fn for_env(env: &TaskEnv) -> Self {
        let dim = if env.planar { 2.0 } else { 3.0 };
        JudgeParams {
            goal_tolerance: env.pitch * f64::sqrt(dim),
            stall_steps: 25,
            still_motion: 1e-5,
            stall_input_motion: 0.5 * env.pitch,
            settle_ticks: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub task_kind: TaskKind,
    pub solver: SolverKind,
    pub rng_seed: u64,
    pub input_path: Vec<TaskPoint>,
    pub produced_path_t: Vec<TaskPoint>,
    pub produced_path_q: Vec<Configuration>,
    pub deviation: Option<f64>,
    pub smoothness: Option<f64>,
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    /// Detour plans built by the GRR controller.
    pub replans: Option<usize>,
    pub wall_ms: f64,
}

trait Solver {
    fn step(&mut self, ctx: &QueryContext, p: &TaskPoint) -> Configuration;
    /// Still working toward the last input.
    fn busy(&self, ctx: &QueryContext) -> bool;
    fn replans(&self) -> Option<usize> {
        None
    }
}

struct GrrSolver {
    state: TeleopState,
    params: TeleopParams,
}

impl Solver for GrrSolver {
    fn step(&mut self, ctx: &QueryContext, p: &TaskPoint) -> Configuration {
        teleop_step(ctx, &mut self.state, p, &self.params)
    }

    fn busy(&self, ctx: &QueryContext) -> bool {
        let reached = ctx.forward(&self.state.current);
        let gap = ctx.graph().distance(&reached, &self.state.active_target);
        self.state.status != TeleopStatus::Tracking || gap > ctx.roadmap().params().projection.tolerance
    }

    fn replans(&self) -> Option<usize> {
        Some(self.state.replans())
    }
}

struct NewtonSolver {
    current: Configuration,
    converged: bool,
}

impl Solver for NewtonSolver {
    fn step(&mut self, ctx: &QueryContext, p: &TaskPoint) -> Configuration {
        let out = project_detailed(
            ctx.chain(),
            p,
            &self.current,
            &ctx.roadmap().params().projection,
            ctx.graph().metric(),
        );
        self.converged = out.converged;
        self.current = out.config;
        self.current.clone()
    }

    fn busy(&self, _: &QueryContext) -> bool {
        !self.converged
    }
}

/// Inside the reach annulus and resolvable through the roadmap.
pub fn is_feasible(ctx: &QueryContext, env: &TaskEnv, p: &TaskPoint) -> bool {
    env.is_reachable(&p.translation) && ctx.resolve(p).is_ok()
}

/// Replays `stream` through `solver`, starting from the roadmap resolution
/// of the first waypoint, and judges the result.
pub fn run_trial(
    ctx: &QueryContext,
    env: &TaskEnv,
    stream: &WaypointStream,
    solver: SolverKind,
    judge: &JudgeParams,
) -> TrialResult {
    let start = Instant::now();
    let input = stream.waypoints.clone();
    let mut result = TrialResult {
        task_kind: stream.kind,
        solver,
        rng_seed: stream.rng_seed,
        input_path: input.clone(),
        produced_path_t: Vec::new(),
        produced_path_q: Vec::new(),
        deviation: None,
        smoothness: None,
        success: false,
        failure_reason: Some(FailureReason::LocalMinima),
        replans: None,
        wall_ms: 0.0,
    };
    let Ok(q0) = ctx.resolve(&input[0]) else {
        result.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        return result;
    };
    let mut solver: Box<dyn Solver> = match solver {
        SolverKind::ExpansionGrr => Box::new(GrrSolver {
            state: TeleopState::new(ctx, q0.clone()),
            params: TeleopParams::for_context(ctx),
        }),
        SolverKind::NewtonIk => Box::new(NewtonSolver {
            current: q0.clone(),
            converged: true,
        }),
    };
    let mut qs = vec![q0];
    for p in &input {
        qs.push(solver.step(ctx, p));
    }
    let last = input.last().expect("stream is nonempty");
    for _ in 0..judge.settle_ticks {
        if !solver.busy(ctx) {
            break;
        }
        qs.push(solver.step(ctx, last));
    }
    result.replans = solver.replans();
    result.produced_path_t = qs.iter().map(|q| ctx.forward(q)).collect();
    result.produced_path_q = qs;
    let (success, reason) = judge_success(ctx, env, &result, judge);
    result.success = success;
    result.failure_reason = reason;
    if success {
        let metric = ctx.graph().metric();
        result.deviation = dtw_deviation(&result.input_path, &result.produced_path_t, metric).ok();
        result.smoothness = path_smoothness(ctx.chain(), &result.produced_path_q, &result.produced_path_t, metric).ok();
    }
    result.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    result
}

/// Success iff no produced configuration self-collides, the output never
/// stalls while the reachable input moves, and the final output is within
/// the goal tolerance of the last reachable input.
pub fn judge_success(
    ctx: &QueryContext,
    env: &TaskEnv,
    trial: &TrialResult,
    judge: &JudgeParams,
) -> (bool, Option<FailureReason>) {
    let chain = ctx.chain();
    if trial
        .produced_path_q
        .iter()
        .any(|q| !chain.collision_free_unchecked(q.values()))
    {
        return (false, Some(FailureReason::SelfCollision));
    }
    if stalled(ctx, env, trial, judge) {
        return (false, Some(FailureReason::Stalled));
    }
    let Some(goal) = trial.input_path.iter().rev().find(|p| is_feasible(ctx, env, p)) else {
        return (false, Some(FailureReason::LocalMinima));
    };
    let Some(end) = trial.produced_path_t.last() else {
        return (false, Some(FailureReason::LocalMinima));
    };
    if (end.translation - goal.translation).norm() > judge.goal_tolerance {
        return (false, Some(FailureReason::LocalMinima));
    }
    (true, None)
}

/// Output step `i` (from produced point `i` to `i + 1`) answers input `i`;
/// settle ticks repeat the last input.
fn stalled(ctx: &QueryContext, env: &TaskEnv, trial: &TrialResult, judge: &JudgeParams) -> bool {
    let out = &trial.produced_path_t;
    let input = &trial.input_path;
    let n_steps = out.len().saturating_sub(1);
    let feasible: Vec<bool> = input.iter().map(|p| is_feasible(ctx, env, p)).collect();
    let at = |i: usize| i.min(input.len() - 1);
    let mut run = 0usize;
    let mut moved = 0.0;
    for i in 0..n_steps {
        let still = (out[i + 1].translation - out[i].translation).norm() < judge.still_motion;
        if !still {
            run = 0;
            moved = 0.0;
            continue;
        }
        run += 1;
        if i > 0 {
            let (a, b) = (at(i - 1), at(i));
            if feasible[a] && feasible[b] {
                moved += (input[b].translation - input[a].translation).norm();
            }
        }
        if run > judge.stall_steps && moved > judge.stall_input_motion {
            return true;
        }
    }
    false
}
