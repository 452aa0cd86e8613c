use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use grr_core::benchmark::{run_benchmark, BenchmarkConfig, BenchmarkReport, SolverKind, TaskKind};
use grr_core::chain::{Configuration, TaskPoint};
use grr_core::grr::{connectivity, global_expansion, is_continuous, random_seed, smoothness, ResolutionRoadmap};
use grr_core::io::{load_robot_spec, LoadedRoadmap};
use grr_core::query::QueryContext;
use grr_core::robots::{self, RobotModel};
use grr_core::taskgraph::{TaskGraph, WorkspaceBox};
use nalgebra::Vector3;
use rand::seq::index;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Loads a robot spec file, or a built-in model by name.
pub fn load_model(spec: &str) -> Result<RobotModel> {
    if Path::new(spec).exists() {
        return load_robot_spec(spec).with_context(|| format!("reading robot spec {spec}"));
    }
    robots::builtin(spec).ok_or_else(|| anyhow!("'{spec}' is neither a robot spec file nor a built-in robot"))
}

/// Comma-separated list, e.g. `1,2.5,3`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| anyhow!("bad list entry '{x}': {e}")))
        .collect()
}

/// `x0,y0,x1,y1` or `x0,y0,z0,x1,y1,z1`.
pub fn parse_workspace(s: &str) -> Result<WorkspaceBox> {
    let v: Vec<f64> = parse_list(s)?;
    if v.len() != 4 && v.len() != 6 {
        bail!("workspace needs 4 (planar) or 6 (spatial) numbers: mins then maxes");
    }
    let d = v.len() / 2;
    Ok(WorkspaceBox::new(v[..d].to_vec(), v[d..].to_vec())?)
}

#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    pub workspace: Option<WorkspaceBox>,
    pub resolution: Option<Vec<usize>>,
    pub k: Option<usize>,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub single_seed: bool,
    pub seed: u64,
}

pub fn build(model: &RobotModel, opts: &BuildOptions) -> Result<(TaskGraph, ResolutionRoadmap)> {
    let default = model.grid.as_ref();
    let workspace = opts
        .workspace
        .clone()
        .or_else(|| default.map(|g| g.workspace.clone()))
        .ok_or_else(|| anyhow!("robot '{}' has no default grid; pass --workspace", model.name))?;
    let resolution = opts
        .resolution
        .clone()
        .or_else(|| default.map(|g| g.resolution.clone()))
        .ok_or_else(|| anyhow!("robot '{}' has no default grid; pass --resolution", model.name))?;
    let mut params = model.default_params();
    if let Some(k) = opts.k {
        params.k = k;
    }
    if let Some(c) = opts.c {
        params.continuity.c = c;
    }
    if let Some(e) = opts.epsilon {
        params.continuity.epsilon = e;
    }
    params.validate()?;
    let graph = TaskGraph::build_grid(&model.chain, &workspace, &resolution, model.orientation)?;
    let roadmap = if opts.single_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let seeds = random_seed(&model.chain, &graph, &params.projection, &mut rng)?;
        global_expansion(&model.chain, &graph, &seeds, &params)?
    } else {
        model.build_roadmap(&graph, &params)?
    };
    Ok((graph, roadmap))
}

pub fn quality_header() -> String {
    format!(
        "{:<18} {:>8} {:>8} {:>16} {:>11} {:>10}",
        "robot", "vertices", "edges", "connectivity(%)", "smoothness", "build(s)"
    )
}

pub fn quality_row(
    name: &str,
    graph: &TaskGraph,
    roadmap: &ResolutionRoadmap,
    model: &RobotModel,
    build_seconds: Option<f64>,
) -> Result<String> {
    let conn = connectivity(roadmap, graph)?;
    let smooth = smoothness(roadmap, graph, &model.chain)
        .map(|s| format!("{s:.4}"))
        .unwrap_or_else(|_| "-".into());
    let secs = build_seconds.map_or("-".to_string(), |s| format!("{s:.3}"));
    Ok(format!(
        "{:<18} {:>8} {:>8} {:>16.2} {:>11} {:>10}",
        name,
        graph.len(),
        graph.edges().len(),
        100.0 * conn,
        smooth,
        secs
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeCheck {
    pub sampled: usize,
    pub passed: usize,
}

/// Re-runs the continuity check on up to `sample` resolved edges.
pub fn verify_edges(loaded: &LoadedRoadmap, sample: usize, seed: u64) -> EdgeCheck {
    let edges = loaded.roadmap.resolved_edges();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, edges.len(), sample.min(edges.len())).into_vec();
    picked.sort_unstable();
    let params = loaded.roadmap.params();
    let passed = picked
        .iter()
        .filter(|&&i| {
            let (a, b) = edges[i];
            is_continuous(
                &loaded.model.chain,
                loaded.graph.vertex(a),
                loaded.graph.vertex(b),
                loaded.roadmap.assignment(a).expect("resolved endpoints are assigned"),
                loaded.roadmap.assignment(b).expect("resolved endpoints are assigned"),
                &params.continuity,
                &params.projection,
                loaded.graph.metric(),
            )
        })
        .count();
    EdgeCheck {
        sampled: picked.len(),
        passed,
    }
}

pub fn bench(
    ctx: &QueryContext,
    tasks: &[TaskKind],
    solvers: &[SolverKind],
    trials: usize,
    seed: u64,
) -> Result<BenchmarkReport> {
    let config = BenchmarkConfig {
        tasks: tasks.to_vec(),
        solvers: solvers.to_vec(),
        trials,
        seed,
        judge: None,
    };
    Ok(run_benchmark(ctx, &config)?.0)
}

pub fn parse_tasks(s: &str) -> Result<Vec<TaskKind>> {
    if s == "all" {
        return Ok(TaskKind::ALL.to_vec());
    }
    s.split(',')
        .map(|t| TaskKind::parse(t.trim()).ok_or_else(|| anyhow!("unknown task '{t}'")))
        .collect()
}

pub fn parse_solvers(s: &str) -> Result<Vec<SolverKind>> {
    s.split(',')
        .map(|t| SolverKind::parse(t.trim()).ok_or_else(|| anyhow!("unknown solver '{t}'")))
        .collect()
}

/// Task point from `x,y` or `x,y,z`. Planar points take the grid plane.
pub fn parse_point(ctx: &QueryContext, s: &str) -> Result<TaskPoint> {
    let v: Vec<f64> = parse_list(s)?;
    let z = ctx.graph().grid().map_or(0.0, |g| g.plane_z);
    let t = match v.as_slice() {
        [x, y] => Vector3::new(*x, *y, z),
        [x, y, z] => Vector3::new(*x, *y, *z),
        _ => bail!("point needs 2 or 3 coordinates"),
    };
    Ok(ctx.task_point(&TaskPoint::position(t)))
}

pub fn resolve_point(ctx: &QueryContext, p: &TaskPoint) -> Result<Configuration> {
    ctx.resolve(p).map_err(|e| anyhow!("cannot resolve point: {e}"))
}

pub fn format_configuration(q: &Configuration) -> String {
    q.values().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}
