use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::chain::{Configuration, TaskPoint};
use crate::projection::project;
use crate::taskgraph::bisect_unchecked;

use super::resolve::QueryContext;
use super::QueryFailure;

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    v: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then(other.v.cmp(&self.v))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest vertex path over resolved edges, by task distance.
pub(crate) fn shortest_path(ctx: &QueryContext, start: usize, goal: usize) -> Option<Vec<usize>> {
    let graph = ctx.graph();
    let roadmap = ctx.roadmap();
    let n = graph.len();
    let w_t = graph.metric().translation;
    let goal_t = graph.vertex(goal).translation;
    let h = |v: usize| w_t * (graph.vertex(v).translation - goal_t).norm();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g[start] = 0.0;
    open.push(Open { f: h(start), v: start });
    while let Some(Open { v, .. }) = open.pop() {
        if closed[v] {
            continue;
        }
        if v == goal {
            let mut path = vec![goal];
            let mut u = goal;
            while u != start {
                u = parent[u];
                path.push(u);
            }
            path.reverse();
            return Some(path);
        }
        closed[v] = true;
        for &u in roadmap.resolved_neighbors(v) {
            if closed[u] {
                continue;
            }
            let cost = g[v] + graph.distance(graph.vertex(v), graph.vertex(u));
            if cost < g[u] {
                g[u] = cost;
                parent[u] = v;
                open.push(Open { f: cost + h(u), v: u });
            }
        }
    }
    None
}

/// Points along the polyline through `points`, at most `step` apart,
/// excluding the first point.
pub(crate) fn interpolate(ctx: &QueryContext, points: &[TaskPoint], step: f64) -> Vec<TaskPoint> {
    let mut out = Vec::new();
    for w in points.windows(2) {
        let len = ctx.graph().distance(&w[0], &w[1]);
        if len <= 0.0 {
            continue;
        }
        let n = (len / step).ceil().max(1.0) as usize;
        for i in 1..=n {
            let t = i as f64 / n as f64;
            let mut p = bisect_unchecked(&w[0], &w[1]);
            p.translation = w[0].translation.lerp(&w[1].translation, t);
            out.push(p);
        }
    }
    out
}

/// Vertex path over resolved edges from the assigned vertex nearest
/// `from` to the one nearest `to`.
pub(crate) fn vertex_route(ctx: &QueryContext, from: &TaskPoint, to: &TaskPoint) -> Result<Vec<usize>, QueryFailure> {
    let start = ctx.nearest_assigned(from, None).ok_or(QueryFailure::OutOfCoverage)?;
    let goal = ctx.nearest_assigned(to, None).ok_or(QueryFailure::OutOfCoverage)?;
    if ctx.component(start) != ctx.component(goal) {
        return Err(QueryFailure::Unreachable);
    }
    shortest_path(ctx, start, goal).ok_or(QueryFailure::Unreachable)
}

/// Configuration path from `q_start` to `p_goal` following resolved edges,
/// with task-space waypoints at most `step` apart. The start configuration
/// itself is not included.
pub fn plan_task_path(
    ctx: &QueryContext,
    q_start: &Configuration,
    p_goal: &TaskPoint,
    step: f64,
) -> Result<Vec<Configuration>, QueryFailure> {
    assert!(step > 0.0, "step must be positive");
    let from = ctx.forward(q_start);
    let to = ctx.task_point(p_goal);
    let route = vertex_route(ctx, &from, &to)?;
    let comp = ctx.component(route[0]);
    let mut points = vec![from];
    points.extend(route.iter().map(|&v| ctx.graph().vertex(v).clone()));
    points.push(to.clone());
    let mut waypoints = interpolate(ctx, &points, step);
    if waypoints.is_empty() {
        waypoints.push(to);
    }
    let rp = ctx.roadmap().params();
    let mut prev = q_start.clone();
    let mut out = Vec::with_capacity(waypoints.len());
    for w in &waypoints {
        let q = match ctx.resolve_in(w, ctx.k(), comp) {
            Ok(q) => q,
            // fall back to continuing from the previous waypoint
            Err(_) => project(ctx.chain(), w, &prev, &rp.projection, ctx.graph().metric())?,
        };
        prev = q.clone();
        out.push(q);
    }
    Ok(out)
}
