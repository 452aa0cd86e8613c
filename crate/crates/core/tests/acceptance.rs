//! Acceptance criteria 1-8. Each test prints one PASS/FAIL line.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use grr_core::benchmark::{
    dtw_deviation, generate, is_feasible, run_benchmark, BenchmarkConfig, SolverKind, TaskEnv, TaskKind,
};
use grr_core::chain::{Configuration, JointLimits, KinematicChain, TaskMode, TaskPoint};
use grr_core::grr::{
    connectivity, global_expansion, is_continuous, random_seed, smoothness, BuildReport, GrrParams,
    ResolutionRoadmap,
};
use grr_core::io::{load_roadmap, save_roadmap, write_roadmap};
use grr_core::query::{teleop_step, QueryContext, TeleopParams, TeleopState, TeleopStatus};
use grr_core::robots::{self, planar_chain, RobotModel};
use grr_core::taskgraph::{TaskGraph, TaskMetricWeights};
use grr_core::{project, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BENCH_SEED: u64 = 7;
const BENCH_TRIALS: usize = 20;

fn verdict(n: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {tag} {detail}");
}

struct Built {
    model: RobotModel,
    graph: TaskGraph,
    roadmap: ResolutionRoadmap,
    seconds: f64,
}

fn build(model: RobotModel) -> Built {
    let graph = model.task_graph().unwrap();
    let start = Instant::now();
    let roadmap = model.build_roadmap(&graph, &model.default_params()).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    Built {
        model,
        graph,
        roadmap,
        seconds,
    }
}

fn planar5() -> &'static Built {
    static B: OnceLock<Built> = OnceLock::new();
    B.get_or_init(|| build(robots::planar5()))
}

fn pedestal() -> &'static QueryContext {
    static C: OnceLock<QueryContext> = OnceLock::new();
    C.get_or_init(|| {
        let b = build(robots::planar5_pedestal());
        QueryContext::new(b.model.chain, b.graph, b.roadmap).unwrap()
    })
}

fn random_config(chain: &KinematicChain, rng: &mut impl Rng) -> Configuration {
    Configuration::new(
        chain
            .joints()
            .iter()
            .map(|j| match j.limits {
                JointLimits::Continuous => rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
                JointLimits::Limited { lower, upper } => rng.random_range(lower..upper),
            })
            .collect(),
    )
}

fn roadmap_quality(n: u32, built: &Built, max_smoothness: f64, max_seconds: f64) {
    let conn = connectivity(&built.roadmap, &built.graph).unwrap();
    let smooth = smoothness(&built.roadmap, &built.graph, &built.model.chain).unwrap();
    let pass = conn == 1.0 && smooth <= max_smoothness && built.seconds <= max_seconds;
    verdict(
        n,
        pass,
        &format!(
            "{}: {} vertices, connectivity {:.2}%, smoothness {smooth:.3} (<= {max_smoothness}), build {:.2}s (<= {max_seconds}s)",
            built.model.name,
            built.graph.len(),
            100.0 * conn,
            built.seconds
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_1_planar_position_roadmap() {
    roadmap_quality(1, planar5(), 8.0, 60.0);
}

#[test]
fn criterion_2_fixed_orientation_roadmap() {
    roadmap_quality(2, &build(robots::planar5_fixed()), 13.0, 120.0);
}

#[test]
fn criterion_3_single_seed_ablation() {
    let b = planar5();
    let multi = connectivity(&b.roadmap, &b.graph).unwrap();
    let params = b.model.default_params();
    let mut singles = Vec::new();
    for trial in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let seed = random_seed(&b.model.chain, &b.graph, &params.projection, &mut rng).unwrap();
        let r = global_expansion(&b.model.chain, &b.graph, &seed, &params).unwrap();
        singles.push(connectivity(&r, &b.graph).unwrap());
    }
    let below = singles.iter().filter(|&&c| c < multi).count();
    let pass = multi == 1.0 && below >= 4;
    let shown: Vec<String> = singles.iter().map(|c| format!("{:.2}%", 100.0 * c)).collect();
    verdict(
        3,
        pass,
        &format!(
            "multi-seed {:.2}%, single seeds [{}], {below}/5 below",
            100.0 * multi,
            shown.join(", ")
        ),
    );
    assert!(pass);
}

fn teleop_benchmark() -> &'static grr_core::benchmark::BenchmarkReport {
    static R: OnceLock<grr_core::benchmark::BenchmarkReport> = OnceLock::new();
    R.get_or_init(|| {
        let cfg = BenchmarkConfig {
            tasks: TaskKind::ALL.to_vec(),
            solvers: vec![SolverKind::ExpansionGrr, SolverKind::NewtonIk],
            trials: BENCH_TRIALS,
            seed: BENCH_SEED,
            judge: None,
        };
        run_benchmark(pedestal(), &cfg).unwrap().0
    })
}

#[test]
fn criterion_4_teleop_success() {
    let rep = teleop_benchmark();
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in TaskKind::ALL {
        let g = rep.row(kind, SolverKind::ExpansionGrr).unwrap();
        let n = rep.row(kind, SolverKind::NewtonIk).unwrap();
        pass &= g.trials == BENCH_TRIALS && g.successes == g.trials;
        pass &= g.success_rate >= n.success_rate;
        if kind == TaskKind::SelfCrossingLine {
            pass &= n.success_rate <= 0.6;
        }
        parts.push(format!(
            "{} grr {:.0}% newton {:.0}%",
            kind.name(),
            100.0 * g.success_rate,
            100.0 * n.success_rate
        ));
    }
    verdict(4, pass, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_5_deviation_ordering() {
    let rep = teleop_benchmark();
    let ratio = |kind| {
        let g = rep.row(kind, SolverKind::ExpansionGrr).unwrap();
        let n = rep.row(kind, SolverKind::NewtonIk).unwrap();
        match (g.mean_deviation, n.mean_deviation) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        }
    };
    let line = ratio(TaskKind::RandomLine);
    let partial = ratio(TaskKind::PartialCircle);
    let pass = matches!(line, Some((a, b)) if a <= 2.0 * b) && matches!(partial, Some((a, b)) if a <= 3.0 * b);
    let show = |r: Option<(f64, f64)>| match r {
        Some((a, b)) => format!("grr {a:.4e} vs newton {b:.4e} (x{:.2})", a / b),
        None => "no common successes".into(),
    };
    verdict(
        5,
        pass,
        &format!("random-line {} (<= x2); partial-circle {} (<= x3)", show(line), show(partial)),
    );
    assert!(pass);
}

#[test]
fn criterion_6_closed_loops_return() {
    let ctx = pedestal();
    let env = TaskEnv::from_context(ctx);
    let params = TeleopParams::for_context(ctx);
    let tol = ctx.roadmap().params().projection.tolerance;
    let mut returned = 0;
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let kind = if i % 2 == 0 { TaskKind::RandomCircle } else { TaskKind::RandomLine };
        let stream = generate(&env, kind, 500 + i, &|p| is_feasible(ctx, &env, p)).unwrap();
        let mut path = stream.waypoints.clone();
        if kind == TaskKind::RandomLine {
            path.extend(stream.waypoints.iter().rev().skip(1).cloned());
        } else {
            path.push(path[0].clone());
        }
        let start = path[0].clone();
        let q0 = ctx.resolve(&start).unwrap();
        let mut state = TeleopState::new(ctx, q0.clone());
        for p in &path {
            teleop_step(ctx, &mut state, p, &params);
        }
        for _ in 0..200 {
            if state.status == TeleopStatus::Tracking && state.detour_len() == 0 {
                break;
            }
            teleop_step(ctx, &mut state, &start, &params);
        }
        let d = ctx.chain().config_distance(&state.current, &q0).unwrap();
        worst = worst.max(d);
        if d <= 2.0 * tol {
            returned += 1;
        }
    }
    let pass = returned == 20;
    verdict(
        6,
        pass,
        &format!("{returned}/20 loops returned, worst D_q {worst:.3e} (<= {:.1e})", 2.0 * tol),
    );
    assert!(pass);
}

// Criterion 7 property suites. Each oracle is computed independently here.

fn fd_jacobian_error(chain: &KinematicChain, q: &Configuration, mode: TaskMode) -> f64 {
    let jac = chain.jacobian(q, mode).unwrap();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for i in 0..chain.dof() {
        let mut plus = q.clone();
        let mut minus = q.clone();
        plus.values_mut()[i] += h;
        minus.values_mut()[i] -= h;
        let tp = chain.tool_pose(&plus).unwrap();
        let tm = chain.tool_pose(&minus).unwrap();
        let lin = (tp.translation.vector - tm.translation.vector) / (2.0 * h);
        let ang = (tp.rotation * tm.rotation.inverse()).scaled_axis() / (2.0 * h);
        let expected: Vec<f64> = match (chain.is_planar(), mode) {
            (true, TaskMode::Position) => vec![lin.x, lin.y],
            (true, TaskMode::FixedOrientation) => vec![lin.x, lin.y, ang.z],
            (false, TaskMode::Position) => lin.iter().copied().collect(),
            (false, TaskMode::FixedOrientation) => lin.iter().chain(ang.iter()).copied().collect(),
        };
        for (r, e) in expected.iter().enumerate() {
            worst = worst.max((jac[(r, i)] - e).abs());
        }
    }
    worst
}

fn jacobian_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let chains = [planar_chain(5), robots::spatial7().chain];
    let mut worst = 0.0f64;
    for t in 0..100 {
        let chain = &chains[t % 2];
        let q = random_config(chain, &mut rng);
        for mode in [TaskMode::Position, TaskMode::FixedOrientation] {
            worst = worst.max(fd_jacobian_error(chain, &q, mode));
        }
    }
    (worst <= 1e-5, format!("jacobian max |J - FD| {worst:.2e}"))
}

fn projection_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let chain = planar_chain(5);
    let metric = TaskMetricWeights::position();
    let params = grr_core::ProjectionParams::default();
    let mut ok = 0;
    for _ in 0..1000 {
        let q_true = random_config(&chain, &mut rng);
        let target = chain.task_point(&q_true, TaskMode::Position).unwrap();
        let guess = Configuration::new(q_true.values().iter().map(|x| x + rng.random_range(-0.3..0.3)).collect());
        if let Ok(q) = project(&chain, &target, &guess, &params, &metric) {
            let reached = chain.task_point(&q, TaskMode::Position).unwrap();
            let dt = reached.translation - target.translation;
            if dt.norm() <= params.tolerance {
                ok += 1;
            }
        }
    }
    (ok >= 990, format!("projection {ok}/1000 within tolerance"))
}

fn knn_suite() -> (bool, String) {
    let b = planar5();
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let mut exact = 0;
    for _ in 0..200 {
        let p = TaskPoint::planar(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0));
        let k = rng.random_range(1..=12);
        let mut scan: Vec<(f64, usize)> = b
            .graph
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| ((v.translation - p.translation).norm(), i))
            .collect();
        scan.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let want: Vec<usize> = scan.iter().take(k).map(|e| e.1).collect();
        if b.graph.nearest_neighbors(&p, k) == want {
            exact += 1;
        }
    }
    (exact == 200, format!("knn {exact}/200 exact"))
}

/// Full-matrix DTW: mean cost over the matched pairs of the optimal path,
/// found by backtracking with the diagonal preferred over up over left.
fn dtw_reference(a: &[TaskPoint], b: &[TaskPoint], metric: &TaskMetricWeights) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut acc = vec![vec![f64::INFINITY; m]; n];
    for i in 0..n {
        for j in 0..m {
            let c = metric.distance(&a[i], &b[j]).unwrap();
            acc[i][j] = if i == 0 && j == 0 {
                c
            } else {
                let diag = if i > 0 && j > 0 { acc[i - 1][j - 1] } else { f64::INFINITY };
                let up = if i > 0 { acc[i - 1][j] } else { f64::INFINITY };
                let left = if j > 0 { acc[i][j - 1] } else { f64::INFINITY };
                let mut best = diag;
                if up < best {
                    best = up;
                }
                if left < best {
                    best = left;
                }
                best + c
            };
        }
    }
    let (mut i, mut j, mut pairs) = (n - 1, m - 1, 1usize);
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 { acc[i - 1][j - 1] } else { f64::INFINITY };
        let up = if i > 0 { acc[i - 1][j] } else { f64::INFINITY };
        let left = if j > 0 { acc[i][j - 1] } else { f64::INFINITY };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        pairs += 1;
    }
    acc[n - 1][m - 1] / pairs as f64
}

fn dtw_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    let metric = TaskMetricWeights::position();
    let mut exact = 0;
    let cases = 50;
    for _ in 0..cases {
        let n = rng.random_range(1..40);
        let m = rng.random_range(1..40);
        // coarse coordinates make equal-cost ties common
        let mut pts = |len: usize| -> Vec<TaskPoint> {
            (0..len)
                .map(|_| TaskPoint::planar(rng.random_range(0..4) as f64, rng.random_range(0..4) as f64))
                .collect()
        };
        let a = pts(n);
        let b = pts(m);
        let got = dtw_deviation(&a, &b, &metric).unwrap();
        if got == dtw_reference(&a, &b, &metric) {
            exact += 1;
        }
    }
    (exact == cases, format!("dtw {exact}/{cases} exact"))
}

fn metric_suite() -> (bool, String) {
    let chain = planar_chain(2);
    let metric = TaskMetricWeights::position();
    let verts = vec![
        TaskPoint::planar(0.0, 0.0),
        TaskPoint::planar(1.0, 0.0),
        TaskPoint::planar(1.0, 2.0),
        TaskPoint::planar(3.0, 2.0),
    ];
    let graph = TaskGraph::new(verts, vec![(0, 1), (1, 2), (0, 2), (2, 3)], metric).unwrap();
    let q = |a: f64, b: f64| Some(Configuration::new(vec![a, b]));
    let roadmap = ResolutionRoadmap::from_parts(
        &chain,
        &graph,
        vec![q(0.0, 0.0), q(0.1, 0.0), q(0.3, 0.0), q(0.0, 0.5)],
        vec![(0, 1), (1, 2)],
        GrrParams::for_chain(&chain, 2),
        BuildReport::default(),
    )
    .unwrap();
    // resolved 2 of 4 edges; ratios 0.1 / 1 and 0.2 / 2
    let c = connectivity(&roadmap, &graph).unwrap();
    let s = smoothness(&roadmap, &graph, &chain).unwrap();
    let mut pass = (c - 0.5).abs() < 1e-15 && (s - 0.1).abs() < 1e-12;

    // wraparound: 3.1 and -3.1 are 2 pi - 6.2 apart
    let wrap_graph = TaskGraph::new(
        vec![TaskPoint::planar(0.0, 0.0), TaskPoint::planar(0.5, 0.0)],
        vec![(0, 1)],
        metric,
    )
    .unwrap();
    let wrap = ResolutionRoadmap::from_parts(
        &chain,
        &wrap_graph,
        vec![q(3.1, 0.0), q(-3.1, 0.0)],
        vec![(0, 1)],
        GrrParams::for_chain(&chain, 2),
        BuildReport::default(),
    )
    .unwrap();
    let sw = smoothness(&wrap, &wrap_graph, &chain).unwrap();
    pass &= (sw - (2.0 * std::f64::consts::PI - 6.2) / 0.5).abs() < 1e-12;
    pass &= connectivity(&wrap, &wrap_graph).unwrap() == 1.0;

    let none = ResolutionRoadmap::from_parts(
        &chain,
        &wrap_graph,
        vec![q(0.0, 0.0), None],
        vec![],
        GrrParams::for_chain(&chain, 2),
        BuildReport::default(),
    )
    .unwrap();
    pass &= connectivity(&none, &wrap_graph).unwrap() == 0.0;
    pass &= matches!(smoothness(&none, &wrap_graph, &chain), Err(Error::UndefinedMetric(_)));
    (pass, format!("metric hand graphs conn {c} smooth {s:.4} wrap {sw:.4}"))
}

fn round_trip_suite() -> (bool, String) {
    let b = planar5();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("planar5.grr");
    save_roadmap(&path, &b.model, &b.graph, &b.roadmap).unwrap();
    let loaded = load_roadmap(&path, Some(&b.model)).unwrap();
    let same_q = (0..b.graph.len()).all(|v| loaded.roadmap.assignment(v) == b.roadmap.assignment(v));
    let same_v = loaded.graph.vertices() == b.graph.vertices();
    let pass = same_q
        && same_v
        && loaded.graph.edges() == b.graph.edges()
        && loaded.roadmap.resolved_edges() == b.roadmap.resolved_edges()
        && loaded.roadmap.params() == b.roadmap.params();
    (pass, format!("save/load round trip {}", if pass { "exact" } else { "differs" }))
}

fn determinism_suite() -> (bool, String) {
    let b = planar5();
    let first = write_roadmap(&b.model, &b.graph, &b.roadmap).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let again = pool.install(|| build(robots::planar5()));
    let second = write_roadmap(&again.model, &again.graph, &again.roadmap).unwrap();
    let pass = first == second;
    (pass, format!("rebuild byte-identical: {pass} ({} bytes)", first.len()))
}

#[test]
fn criterion_7_property_suites() {
    let suites = [
        jacobian_suite(),
        projection_suite(),
        knn_suite(),
        dtw_suite(),
        metric_suite(),
        round_trip_suite(),
        determinism_suite(),
    ];
    let pass = suites.iter().all(|s| s.0);
    let parts: Vec<String> = suites
        .iter()
        .map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "FAILED " }))
        .collect();
    verdict(7, pass, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_8_spatial_chain() {
    let b = build(robots::spatial7());
    let conn = connectivity(&b.roadmap, &b.graph).unwrap();
    let params = b.roadmap.params();
    let metric = b.graph.metric();
    let mut recheck_failed = BTreeMap::new();
    for &(u, v) in b.roadmap.resolved_edges() {
        let ok = is_continuous(
            &b.model.chain,
            b.graph.vertex(u),
            b.graph.vertex(v),
            b.roadmap.assignment(u).unwrap(),
            b.roadmap.assignment(v).unwrap(),
            &params.continuity,
            &params.projection,
            metric,
        );
        if !ok {
            recheck_failed.insert(u, v);
        }
    }
    let pass = conn >= 0.95 && recheck_failed.is_empty() && !b.model.chain.capsules().is_empty();
    verdict(
        8,
        pass,
        &format!(
            "{}: {} vertices, connectivity {:.2}% (>= 95%), {} resolved edges, {} fail re-check, build {:.2}s",
            b.model.name,
            b.graph.len(),
            100.0 * conn,
            b.roadmap.resolved_edges().len(),
            recheck_failed.len(),
            b.seconds
        ),
    );
    assert!(pass);
}

#[test]
fn resolved_vertices_sit_on_their_task_points() {
    let b = planar5();
    let tol = b.roadmap.params().projection.tolerance;
    for (v, q) in b.roadmap.assignments().iter().enumerate() {
        let q = q.as_ref().unwrap();
        let p = b.model.chain.task_point(q, b.model.mode).unwrap();
        assert!((p.translation - b.graph.vertex(v).translation).norm() <= tol);
    }
}
