use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::chain::{Configuration, TaskPoint};
use crate::grr::is_continuous;

use super::plan::plan_task_path;
use super::resolve::QueryContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TeleopStatus {
    Tracking,
    Detouring,
    Blocked,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeleopParams {
    /// Task-space spacing of planned detour and parking waypoints.
    pub plan_step: f64,
    /// Largest task-space move tracked directly; larger moves are planned.
    pub max_track_jump: f64,
    pub history: usize,
}

impl TeleopParams {
    pub fn for_context(ctx: &QueryContext) -> Self {
        let pitch = ctx.graph().grid().map_or(0.1, |g| g.pitch());
        TeleopParams {
            plan_step: 0.5 * pitch,
            max_track_jump: pitch,
            history: 256,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TeleopState {
    pub current: Configuration,
    pub active_target: TaskPoint,
    /// Target actually pursued: the input, or the parking vertex while
    /// blocked.
    pub target_effective: TaskPoint,
    pub status: TeleopStatus,
    detour: VecDeque<Configuration>,
    parking: Option<(usize, VecDeque<Configuration>)>,
    component: Option<usize>,
    history: VecDeque<(TaskPoint, Configuration)>,
    replans: usize,
}

impl TeleopState {
    /// State at configuration `q0`, which should come from the roadmap.
    pub fn new(ctx: &QueryContext, q0: Configuration) -> Self {
        let p0 = ctx.forward(&q0);
        let component = ctx.nearest_assigned(&p0, None).and_then(|v| ctx.component(v));
        TeleopState {
            current: q0,
            active_target: p0.clone(),
            target_effective: p0,
            status: TeleopStatus::Tracking,
            detour: VecDeque::new(),
            parking: None,
            component,
            history: VecDeque::new(),
            replans: 0,
        }
    }

    /// State at the assignment of vertex `v`.
    pub fn at_vertex(ctx: &QueryContext, v: usize) -> Option<Self> {
        ctx.roadmap().assignment(v).map(|q| Self::new(ctx, q.clone()))
    }

    /// Detour plans built so far.
    pub fn replans(&self) -> usize {
        self.replans
    }

    pub fn detour_len(&self) -> usize {
        self.detour.len()
    }

    /// Recent (input, output) pairs, oldest first.
    pub fn history(&self) -> impl Iterator<Item = &(TaskPoint, Configuration)> {
        self.history.iter()
    }

    fn emit(&mut self, q: Configuration, input: TaskPoint, cap: usize) -> Configuration {
        self.current = q.clone();
        if cap > 0 {
            if self.history.len() == cap {
                self.history.pop_front();
            }
            self.history.push_back((input, q.clone()));
        }
        q
    }
}

/// One control tick: maps target `p_t` to the next configuration.
///
/// A pending detour is followed first. Otherwise the target is resolved
/// through the roadmap and accepted if continuous with the current
/// configuration. An infeasible target makes the controller move over
/// resolved edges toward the nearest reachable vertex and wait there; once
/// the target is feasible again, the way back is planned as a detour.
pub fn teleop_step(ctx: &QueryContext, state: &mut TeleopState, p_t: &TaskPoint, params: &TeleopParams) -> Configuration {
    let p_t = ctx.task_point(p_t);
    state.active_target = p_t.clone();
    if let Some(q) = state.detour.pop_front() {
        state.status = if state.detour.is_empty() {
            TeleopStatus::Tracking
        } else {
            TeleopStatus::Detouring
        };
        return state.emit(q, p_t, params.history);
    }
    let p_c = ctx.forward(&state.current);
    let was_blocked = state.status == TeleopStatus::Blocked;
    let feasible = ctx.resolve_in(&p_t, ctx.k(), state.component).ok().filter(|q_t| {
        let rp = ctx.roadmap().params();
        is_continuous(
            ctx.chain(),
            &p_c,
            &p_t,
            &state.current,
            q_t,
            &rp.continuity,
            &rp.projection,
            ctx.graph().metric(),
        )
    });
    if let Some(q_t) = feasible {
        state.parking = None;
        state.target_effective = p_t.clone();
        let jump = ctx.graph().distance(&p_c, &p_t);
        if !was_blocked && jump <= params.max_track_jump {
            state.status = TeleopStatus::Tracking;
            return state.emit(q_t, p_t, params.history);
        }
        if let Ok(plan) = plan_task_path(ctx, &state.current, &p_t, params.plan_step) {
            state.detour = plan.into();
            state.replans += 1;
            if let Some(q) = state.detour.pop_front() {
                state.status = if state.detour.is_empty() {
                    TeleopStatus::Tracking
                } else {
                    TeleopStatus::Detouring
                };
                return state.emit(q, p_t, params.history);
            }
        }
        state.status = TeleopStatus::Tracking;
        return state.emit(q_t, p_t, params.history);
    }

    state.status = TeleopStatus::Blocked;
    let Some(v) = ctx.nearest_assigned(&p_t, state.component) else {
        let q = state.current.clone();
        return state.emit(q, p_t, params.history);
    };
    state.target_effective = ctx.graph().vertex(v).clone();
    let replan = state.parking.as_ref().is_none_or(|(u, _)| *u != v);
    if replan {
        let plan = plan_task_path(ctx, &state.current, ctx.graph().vertex(v), params.plan_step).unwrap_or_default();
        state.parking = Some((v, plan.into()));
    }
    let next = state
        .parking
        .as_mut()
        .and_then(|(_, plan)| plan.pop_front())
        .unwrap_or_else(|| state.current.clone());
    state.emit(next, p_t, params.history)
}
