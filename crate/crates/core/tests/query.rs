use std::collections::{BinaryHeap, HashSet};
use std::cmp::Reverse;
use std::sync::OnceLock;

use grr_core::chain::{Configuration, TaskPoint};
use grr_core::grr::{is_continuous, BuildReport, GrrParams, ResolutionRoadmap};
use grr_core::query::{
    plan_task_path, teleop_step, QueryContext, QueryFailure, TeleopParams, TeleopState, TeleopStatus,
};
use grr_core::robots::{self, planar_chain};
use grr_core::taskgraph::{TaskGraph, TaskMetricWeights};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn planar5() -> &'static QueryContext {
    static C: OnceLock<QueryContext> = OnceLock::new();
    C.get_or_init(|| {
        let m = robots::planar5();
        let g = m.task_graph().unwrap();
        let r = m.build_roadmap(&g, &m.default_params()).unwrap();
        QueryContext::new(m.chain, g, r).unwrap()
    })
}

fn pedestal() -> &'static QueryContext {
    static C: OnceLock<QueryContext> = OnceLock::new();
    C.get_or_init(|| {
        let m = robots::planar5_pedestal();
        let g = m.task_graph().unwrap();
        let r = m.build_roadmap(&g, &m.default_params()).unwrap();
        QueryContext::new(m.chain, g, r).unwrap()
    })
}

fn pitch(ctx: &QueryContext) -> f64 {
    ctx.graph().grid().unwrap().pitch()
}

fn tol(ctx: &QueryContext) -> f64 {
    ctx.roadmap().params().projection.tolerance
}

fn continuous_step(ctx: &QueryContext, a: &Configuration, b: &Configuration) -> bool {
    let rp = ctx.roadmap().params();
    is_continuous(
        ctx.chain(),
        &ctx.forward(a),
        &ctx.forward(b),
        a,
        b,
        &rp.continuity,
        &rp.projection,
        ctx.graph().metric(),
    )
}

#[test]
fn resolve_at_vertex_returns_its_assignment() {
    let ctx = planar5();
    for v in (0..ctx.graph().len()).step_by(37) {
        let q = ctx.resolve(ctx.graph().vertex(v)).unwrap();
        let d = ctx.chain().config_distance(&q, ctx.roadmap().assignment(v).unwrap()).unwrap();
        assert!(d <= tol(ctx), "vertex {v}: {d}");
    }
}

#[test]
fn resolve_covers_random_points() {
    let ctx = planar5();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let reach = 5.0 - pitch(ctx);
    let mut n = 0;
    while n < 1000 {
        let p = Vector3::new(rng.random_range(-reach..reach), rng.random_range(-reach..reach), 0.0);
        if p.norm() > reach {
            continue;
        }
        n += 1;
        let target = TaskPoint::position(p);
        let q = ctx.resolve(&target).unwrap_or_else(|e| panic!("{p:?}: {e}"));
        let reached = ctx.forward(&q).translation;
        assert!((reached - p).norm() <= tol(ctx));
    }
}

#[test]
fn resolve_outside_reach_fails() {
    let ctx = planar5();
    let err = ctx.resolve(&TaskPoint::planar(4.9, 4.9)).unwrap_err();
    assert!(matches!(err, QueryFailure::Projection(_)), "{err:?}");
}

#[test]
fn plan_to_the_start_vertex_is_one_step() {
    let ctx = planar5();
    let v = 400;
    let q = ctx.roadmap().assignment(v).unwrap();
    let plan = plan_task_path(ctx, q, ctx.graph().vertex(v), 0.1).unwrap();
    assert_eq!(plan.len(), 1);
    assert!(ctx.chain().config_distance(&plan[0], q).unwrap() <= tol(ctx));
}

#[test]
fn plan_over_severed_line_is_unreachable() {
    let chain = planar_chain(2);
    let metric = TaskMetricWeights::position();
    let pts = [1.0, 1.5, 2.0].map(|x| TaskPoint::planar(x, 0.0));
    let graph = TaskGraph::new(pts.to_vec(), vec![(0, 1), (1, 2)], metric).unwrap();
    let q = |a: f64, b: f64| Some(Configuration::new(vec![a, b]));
    let assign = |x: f64| {
        // elbow angle from the law of cosines, shoulder offset by half of it
        let e = ((x * x - 2.0) / 2.0).clamp(-1.0, 1.0).acos();
        q(-e / 2.0, e)
    };
    let assignments = vec![assign(1.0), assign(1.5), assign(2.0)];
    let params = GrrParams::for_chain(&chain, 2);
    let roadmap = |edges: Vec<(usize, usize)>| {
        ResolutionRoadmap::from_parts(&chain, &graph, assignments.clone(), edges, params, BuildReport::default())
            .unwrap()
    };
    let cut = QueryContext::new(chain.clone(), graph.clone(), roadmap(vec![(0, 1)])).unwrap();
    let start = cut.roadmap().assignment(0).unwrap().clone();
    assert_eq!(
        plan_task_path(&cut, &start, graph.vertex(2), 0.1).unwrap_err(),
        QueryFailure::Unreachable
    );
    let whole = QueryContext::new(chain.clone(), graph.clone(), roadmap(vec![(0, 1), (1, 2)])).unwrap();
    let plan = plan_task_path(&whole, &start, graph.vertex(2), 0.1).unwrap();
    let end = whole.forward(plan.last().unwrap()).translation;
    assert!((end - graph.vertex(2).translation).norm() <= 1e-4);
}

/// Dijkstra over resolved edges: the oracle for route lengths.
fn route_length(ctx: &QueryContext, a: usize, b: usize) -> Option<f64> {
    let g = ctx.graph();
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[a] = 0.0;
    heap.push(Reverse((0u64, a)));
    while let Some(Reverse((d_bits, v))) = heap.pop() {
        let d = f64::from_bits(d_bits);
        if d > dist[v] {
            continue;
        }
        if v == b {
            return Some(d);
        }
        for &u in ctx.roadmap().resolved_neighbors(v) {
            let nd = d + (g.vertex(u).translation - g.vertex(v).translation).norm();
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Reverse((nd.to_bits(), u)));
            }
        }
    }
    None
}

#[test]
fn planned_paths_follow_resolved_edges() {
    let ctx = pedestal();
    let h = pitch(ctx);
    let n = ctx.graph().len();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let assigned: Vec<usize> = (0..n).filter(|&v| ctx.roadmap().assignment(v).is_some()).collect();
    for _ in 0..50 {
        let a = assigned[rng.random_range(0..assigned.len())];
        let b = assigned[rng.random_range(0..assigned.len())];
        let q_a = ctx.roadmap().assignment(a).unwrap().clone();
        let goal = ctx.graph().vertex(b).clone();
        let plan = plan_task_path(ctx, &q_a, &goal, 0.5 * h).unwrap();
        let mut prev = q_a.clone();
        let mut trace_len = 0.0;
        for q in &plan {
            assert!(continuous_step(ctx, &prev, q));
            assert!(ctx.chain().self_collision_free(q).unwrap());
            let step = (ctx.forward(q).translation - ctx.forward(&prev).translation).norm();
            assert!(step <= 0.5 * h + 2.0 * tol(ctx), "{a}->{b}: step {step}");
            trace_len += step;
            prev = q.clone();
        }
        let end = ctx.forward(plan.last().unwrap()).translation;
        assert!((end - goal.translation).norm() <= tol(ctx));
        let best = route_length(ctx, a, b).unwrap();
        assert!((trace_len - best).abs() <= 0.01 * best + 1e-3, "{trace_len} vs {best}");
    }
}

#[test]
fn teleop_holds_at_its_own_tool_point() {
    let ctx = planar5();
    let params = TeleopParams::for_context(ctx);
    let q0 = ctx.roadmap().assignment(500).unwrap().clone();
    let mut state = TeleopState::new(ctx, q0.clone());
    let p = ctx.forward(&q0);
    for _ in 0..10 {
        let q = teleop_step(ctx, &mut state, &p, &params);
        assert_eq!(state.status, TeleopStatus::Tracking);
        assert!(ctx.chain().config_distance(&q, &q0).unwrap() <= tol(ctx));
    }
}

#[test]
fn teleop_parks_beyond_reach_and_recovers() {
    let ctx = pedestal();
    let params = TeleopParams::for_context(ctx);
    let start = TaskPoint::planar(3.0, 0.0);
    let q0 = ctx.resolve(&start).unwrap();
    let mut state = TeleopState::new(ctx, q0);
    let outside = TaskPoint::planar(6.0, 0.5);
    for _ in 0..100 {
        teleop_step(ctx, &mut state, &outside, &params);
    }
    assert_eq!(state.status, TeleopStatus::Blocked);
    let parked = ctx.forward(&state.current).translation;
    let v = ctx.nearest_assigned(&outside, None).unwrap();
    assert!((parked - ctx.graph().vertex(v).translation).norm() <= tol(ctx));
    assert!((parked - state.target_effective.translation).norm() <= tol(ctx));
    for _ in 0..100 {
        teleop_step(ctx, &mut state, &start, &params);
    }
    assert_eq!(state.status, TeleopStatus::Tracking);
    assert!((ctx.forward(&state.current).translation - start.translation).norm() <= tol(ctx));
}

#[test]
fn teleop_line_stays_continuous() {
    let ctx = pedestal();
    let params = TeleopParams::for_context(ctx);
    let a = Vector3::new(-3.5, 1.5, 0.0);
    let b = Vector3::new(3.5, 2.0, 0.0);
    let pts: Vec<TaskPoint> = (0..200)
        .map(|i| TaskPoint::position(a + (b - a) * (i as f64 / 199.0)))
        .collect();
    let mut state = TeleopState::new(ctx, ctx.resolve(&pts[0]).unwrap());
    let mut prev = state.current.clone();
    for p in &pts {
        let q = teleop_step(ctx, &mut state, p, &params);
        assert!(continuous_step(ctx, &prev, &q));
        prev = q;
    }
    let end = ctx.forward(&state.current).translation;
    assert!((end - b).norm() <= pitch(ctx));
}

/// Random walk with occasional jumps, some of them out of reach.
fn random_stream(rng: &mut ChaCha8Rng, len: usize) -> Vec<TaskPoint> {
    let mut p = Vector3::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), 0.0);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.02) {
                p = Vector3::new(rng.random_range(-5.5..5.5), rng.random_range(-5.5..5.5), 0.0);
            } else {
                p += Vector3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), 0.0);
            }
            TaskPoint::position(p)
        })
        .collect()
}

#[test]
fn teleop_safety_over_random_streams() {
    let ctx = pedestal();
    let params = TeleopParams::for_context(ctx);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut steps = 0;
    let mut statuses = HashSet::new();
    while steps < 10_000 {
        let stream = random_stream(&mut rng, 500);
        let v = ctx.nearest_assigned(&stream[0], None).unwrap();
        let mut state = TeleopState::at_vertex(ctx, v).unwrap();
        let mut prev = state.current.clone();
        for p in &stream {
            let q = teleop_step(ctx, &mut state, p, &params);
            assert!(ctx.chain().self_collision_free(&q).unwrap());
            assert!(continuous_step(ctx, &prev, &q), "step {steps}");
            let dp = (ctx.forward(&q).translation - ctx.forward(&prev).translation).norm();
            assert!(dp <= params.max_track_jump + tol(ctx), "step {steps}: task jump {dp}");
            if state.detour_len() > 0 {
                assert_eq!(state.status, TeleopStatus::Detouring);
            }
            statuses.insert(format!("{:?}", state.status));
            prev = q;
            steps += 1;
        }
    }
    assert_eq!(statuses.len(), 3, "{statuses:?}");
}

#[test]
fn teleop_is_deterministic() {
    let ctx = pedestal();
    let params = TeleopParams::for_context(ctx);
    let stream = random_stream(&mut ChaCha8Rng::seed_from_u64(5), 400);
    let run = || {
        let v = ctx.nearest_assigned(&stream[0], None).unwrap();
        let mut state = TeleopState::at_vertex(ctx, v).unwrap();
        stream
            .iter()
            .map(|p| teleop_step(ctx, &mut state, p, &params))
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}
