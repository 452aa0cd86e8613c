//! Discretized task space: the graph of task points, its metric and
//! nearest-neighbor queries.

mod kdtree;

use std::collections::VecDeque;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chain::{KinematicChain, TaskMode, TaskPoint};
use crate::error::{Error, Result};
use kdtree::KdTree;

/// Weights of the task-space distance
/// `w_t * |t_i - t_j| + w_o * (1 - |o_i . o_j|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskMetricWeights {
    pub translation: f64,
    pub orientation: f64,
}

impl TaskMetricWeights {
    pub fn new(translation: f64, orientation: f64) -> Result<Self> {
        if !(translation >= 0.0) || !(orientation >= 0.0) || !(translation + orientation > 0.0) {
            return Err(Error::invalid(format!(
                "metric weights ({translation}, {orientation}) must be nonnegative with a positive sum"
            )));
        }
        Ok(TaskMetricWeights {
            translation,
            orientation,
        })
    }

    pub fn position() -> Self {
        TaskMetricWeights {
            translation: 1.0,
            orientation: 0.0,
        }
    }

    pub fn fixed_orientation() -> Self {
        TaskMetricWeights {
            translation: 1.0,
            orientation: 0.3,
        }
    }

    pub fn for_mode(mode: TaskMode) -> Self {
        match mode {
            TaskMode::Position => Self::position(),
            TaskMode::FixedOrientation => Self::fixed_orientation(),
        }
    }

    pub fn distance(&self, a: &TaskPoint, b: &TaskPoint) -> Result<f64> {
        if a.mode() != b.mode() {
            return Err(Error::invalid(format!(
                "task distance between {:?} and {:?} points",
                a.mode(),
                b.mode()
            )));
        }
        Ok(self.distance_unchecked(a, b))
    }

    pub(crate) fn distance_unchecked(&self, a: &TaskPoint, b: &TaskPoint) -> f64 {
        let t = self.translation * (a.translation - b.translation).norm();
        match (&a.orientation, &b.orientation) {
            (Some(oa), Some(ob)) if self.orientation > 0.0 => {
                let dot = oa.coords.dot(&ob.coords).abs().min(1.0);
                t + self.orientation * (1.0 - dot)
            }
            _ => t,
        }
    }
}

/// Task-space distance under `weights`.
pub fn task_distance(a: &TaskPoint, b: &TaskPoint, weights: &TaskMetricWeights) -> Result<f64> {
    weights.distance(a, b)
}

/// Midpoint of two task points: translation midpoint, orientation shared (or
/// slerped when the two differ).
pub fn bisect_p(a: &TaskPoint, b: &TaskPoint) -> Result<TaskPoint> {
    if a.mode() != b.mode() {
        return Err(Error::invalid("bisect between points of different modes"));
    }
    Ok(bisect_unchecked(a, b))
}

pub(crate) fn bisect_unchecked(a: &TaskPoint, b: &TaskPoint) -> TaskPoint {
    let translation = (a.translation + b.translation) * 0.5;
    let orientation = match (&a.orientation, &b.orientation) {
        (Some(oa), Some(ob)) if oa == ob => Some(*oa),
        (Some(oa), Some(ob)) => Some(oa.slerp(ob, 0.5)),
        _ => None,
    };
    TaskPoint {
        translation,
        orientation,
    }
}

/// Axis-aligned box, two or three dimensional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl WorkspaceBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || !(2..=3).contains(&min.len()) {
            return Err(Error::invalid("workspace box must have 2 or 3 matching axes"));
        }
        if min.iter().zip(&max).any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::invalid("workspace box is empty"));
        }
        Ok(WorkspaceBox { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, t: &Vector3<f64>) -> bool {
        (0..self.dim()).all(|a| t[a] >= self.min[a] && t[a] <= self.max[a])
    }
}

/// Regular grid layout: cell centers sit at `origin + (i + 0.5) * cell`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub origin: Vec<f64>,
    pub cell: Vec<f64>,
    pub counts: Vec<usize>,
    /// Constant out-of-plane coordinate for planar grids.
    pub plane_z: f64,
}

impl GridMeta {
    pub fn pitch(&self) -> f64 {
        self.cell.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn center(&self, coords: &[usize]) -> Vector3<f64> {
        let mut t = Vector3::new(0.0, 0.0, self.plane_z);
        for (a, &c) in coords.iter().enumerate() {
            t[a] = self.origin[a] + (c as f64 + 0.5) * self.cell[a];
        }
        t
    }

    /// Grid coordinates of a cell center, if `t` lies on one.
    pub fn coords_of(&self, t: &Vector3<f64>) -> Option<Vec<usize>> {
        (0..self.counts.len())
            .map(|a| {
                let f = (t[a] - self.origin[a]) / self.cell[a] - 0.5;
                let i = f.round();
                if (f - i).abs() > 1e-6 || i < 0.0 || i as usize >= self.counts[a] {
                    None
                } else {
                    Some(i as usize)
                }
            })
            .collect()
    }
}

/// Necessary reachability condition: the point checked (tool or wrist
/// position) must lie in the annulus `min <= |x - center| <= max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReachAnnulus {
    pub center: Vector3<f64>,
    pub min: f64,
    pub max: f64,
}

impl ReachAnnulus {
    /// Annulus for tool translations of `chain` in the given mode. In
    /// fixed-orientation mode the last link and tool offset are fixed in
    /// the world, so the annulus is shifted by them and shrunk accordingly.
    pub fn for_chain(chain: &KinematicChain, orientation: Option<&UnitQuaternion<f64>>) -> Self {
        let lens = chain.link_lengths();
        let base = chain.base().translation.vector;
        let (center, lens) = match orientation {
            None => (base, lens),
            Some(o) => {
                let ee = chain.end_effector();
                let last = chain.joints().last().expect("chain has joints");
                // orientation of the last joint frame, after its rotation
                let r_last = o * ee.rotation.inverse();
                let shift = r_last * (last.offset + ee.translation.vector);
                let n = chain.dof();
                (base + shift, lens[..n - 1].to_vec())
            }
        };
        let total: f64 = lens.iter().sum();
        let longest = lens.iter().cloned().fold(0.0, f64::max);
        ReachAnnulus {
            center,
            min: (2.0 * longest - total).max(0.0),
            max: total,
        }
    }

    pub fn contains(&self, t: &Vector3<f64>) -> bool {
        let r = (t - self.center).norm();
        r <= self.max && r >= self.min
    }

    /// Signed distance outside the annulus (negative inside).
    pub fn excess(&self, t: &Vector3<f64>) -> f64 {
        let r = (t - self.center).norm();
        (r - self.max).max(self.min - r)
    }
}

/// Discretized task space `G_p`.
#[derive(Clone, Debug)]
pub struct TaskGraph {
    vertices: Vec<TaskPoint>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    grid: Option<GridMeta>,
    metric: TaskMetricWeights,
    index: KdTree,
}

impl TaskGraph {
    /// Builds a graph from explicit vertices and undirected edges.
    pub fn new(vertices: Vec<TaskPoint>, edges: Vec<(usize, usize)>, metric: TaskMetricWeights) -> Result<Self> {
        Self::assemble(vertices, edges, None, metric)
    }

    fn assemble(
        vertices: Vec<TaskPoint>,
        edges: Vec<(usize, usize)>,
        grid: Option<GridMeta>,
        metric: TaskMetricWeights,
    ) -> Result<Self> {
        if let Some(first) = vertices.first() {
            for (i, v) in vertices.iter().enumerate() {
                if v.mode() != first.mode() || v.orientation != first.orientation {
                    return Err(Error::invalid(format!(
                        "vertex {i} does not share the graph's mode and orientation"
                    )));
                }
            }
        }
        let n = vertices.len();
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) references a missing vertex")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate edge"));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &norm {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let index = KdTree::new(vertices.iter().map(|v| v.translation).collect());
        Ok(TaskGraph {
            vertices,
            edges: norm,
            adjacency,
            grid,
            metric,
            index,
        })
    }

    /// Grid discretization of `workspace`: cell centers inside the chain's
    /// reach annulus, joined to every vertex whose grid coordinates differ by
    /// at most one per axis. Only the largest connected component is kept.
    pub fn build_grid(
        chain: &KinematicChain,
        workspace: &WorkspaceBox,
        resolution: &[usize],
        orientation: Option<UnitQuaternion<f64>>,
    ) -> Result<Self> {
        let dim = workspace.dim();
        if chain.is_planar() != (dim == 2) {
            return Err(Error::invalid(format!(
                "a {} chain needs a {}D workspace box",
                if chain.is_planar() { "planar" } else { "spatial" },
                if chain.is_planar() { 2 } else { 3 }
            )));
        }
        if resolution.len() != dim || resolution.iter().any(|&r| r < 2) {
            return Err(Error::invalid("resolution needs at least 2 cells per axis"));
        }
        let grid = GridMeta {
            origin: workspace.min.clone(),
            cell: (0..dim)
                .map(|a| (workspace.max[a] - workspace.min[a]) / resolution[a] as f64)
                .collect(),
            counts: resolution.to_vec(),
            plane_z: if dim == 2 { chain.base().translation.vector.z } else { 0.0 },
        };
        let reach = ReachAnnulus::for_chain(chain, orientation.as_ref());
        let total: usize = resolution.iter().product();
        let mut coords = Vec::new();
        for lin in 0..total {
            let c = unravel(lin, resolution);
            if reach.contains(&grid.center(&c)) {
                coords.push(c);
            }
        }
        if coords.is_empty() {
            return Err(Error::EmptyWorkspace);
        }
        let edges = grid_edges(&coords, resolution);
        let keep = largest_component(coords.len(), &edges);
        let mut remap = vec![usize::MAX; coords.len()];
        let mut kept = Vec::new();
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
            kept.push(coords[old].clone());
        }
        let edges = edges
            .into_iter()
            .filter(|&(a, b)| remap[a] != usize::MAX && remap[b] != usize::MAX)
            .map(|(a, b)| (remap[a], remap[b]))
            .collect();
        let metric = TaskMetricWeights::for_mode(if orientation.is_some() {
            TaskMode::FixedOrientation
        } else {
            TaskMode::Position
        });
        let vertices = kept
            .iter()
            .map(|c| TaskPoint {
                translation: grid.center(c),
                orientation,
            })
            .collect();
        Self::assemble(vertices, edges, Some(grid), metric)
    }

    /// Rebuilds a grid graph from stored vertices: vertices must sit on cell
    /// centers of `grid`; edges follow grid adjacency.
    pub fn from_grid_vertices(vertices: Vec<TaskPoint>, grid: GridMeta, metric: TaskMetricWeights) -> Result<Self> {
        let coords = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                grid.coords_of(&v.translation)
                    .ok_or_else(|| Error::invalid(format!("vertex {i} is not on a grid cell center")))
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = grid_edges(&coords, &grid.counts);
        Self::assemble(vertices, edges, Some(grid), metric)
    }

    pub fn with_metric(mut self, metric: TaskMetricWeights) -> Self {
        self.metric = metric;
        self
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[TaskPoint] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &TaskPoint {
        &self.vertices[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Graph neighbors of `i`, ascending.
    pub fn adjacent(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn grid(&self) -> Option<&GridMeta> {
        self.grid.as_ref()
    }

    pub fn metric(&self) -> &TaskMetricWeights {
        &self.metric
    }

    pub fn mode(&self) -> TaskMode {
        self.vertices.first().map_or(TaskMode::Position, TaskPoint::mode)
    }

    pub fn orientation(&self) -> Option<&UnitQuaternion<f64>> {
        self.vertices.first().and_then(|v| v.orientation.as_ref())
    }

    pub fn distance(&self, a: &TaskPoint, b: &TaskPoint) -> f64 {
        self.metric.distance_unchecked(a, b)
    }

    /// Up to `k` vertex indices ordered by task distance to `p`, ties broken
    /// by lower index.
    pub fn nearest_neighbors(&self, p: &TaskPoint, k: usize) -> Vec<usize> {
        self.nearest_with_distance(p, k).into_iter().map(|(i, _)| i).collect()
    }

    pub fn nearest_with_distance(&self, p: &TaskPoint, k: usize) -> Vec<(usize, f64)> {
        let k = k.min(self.vertices.len());
        self.index.nearest(&p.translation, k, self.metric.translation, |i| {
            self.metric.distance_unchecked(p, &self.vertices[i])
        })
    }

    pub fn is_connected(&self) -> bool {
        largest_component(self.len(), &self.edges).len() == self.len()
    }

    /// Content hash over vertices and edges, used to tie roadmaps to graphs.
    pub fn identity_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.vertices.len() as u64).to_le_bytes());
        for v in &self.vertices {
            for c in v.translation.iter() {
                h.update(c.to_bits().to_le_bytes());
            }
            if let Some(o) = &v.orientation {
                for c in o.coords.iter() {
                    h.update(c.to_bits().to_le_bytes());
                }
            }
        }
        for &(a, b) in &self.edges {
            h.update((a as u64).to_le_bytes());
            h.update((b as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

fn unravel(mut lin: usize, counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .map(|&n| {
            let c = lin % n;
            lin /= n;
            c
        })
        .collect()
}

fn ravel(coords: &[usize], counts: &[usize]) -> usize {
    coords
        .iter()
        .zip(counts)
        .rev()
        .fold(0, |acc, (&c, &n)| acc * n + c)
}

/// Edges between cells whose coordinates differ by at most one per axis.
fn grid_edges(coords: &[Vec<usize>], counts: &[usize]) -> Vec<(usize, usize)> {
    let total: usize = counts.iter().product();
    let mut slot = vec![usize::MAX; total];
    for (i, c) in coords.iter().enumerate() {
        slot[ravel(c, counts)] = i;
    }
    let dim = counts.len();
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|m| (0..dim).map(|a| (m / 3usize.pow(a as u32)) as i64 % 3 - 1).collect())
        .filter(|o: &Vec<i64>| o.iter().any(|&d| d != 0))
        .collect();
    let mut edges = Vec::new();
    for (i, c) in coords.iter().enumerate() {
        for off in &offsets {
            let nb: Option<Vec<usize>> = c
                .iter()
                .zip(off)
                .zip(counts)
                .map(|((&x, &d), &n)| {
                    let y = x as i64 + d;
                    (y >= 0 && (y as usize) < n).then_some(y as usize)
                })
                .collect();
            if let Some(nb) = nb {
                let j = slot[ravel(&nb, counts)];
                if j != usize::MAX && i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Vertices of the largest connected component, ascending. Ties go to the
/// component holding the lowest vertex index.
fn largest_component(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut comp = vec![usize::MAX; n];
    let mut best: Vec<usize> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut members = vec![s];
        comp[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = s;
                    members.push(v);
                    queue.push_back(v);
                }
            }
        }
        if members.len() > best.len() {
            best = members;
        }
    }
    best.sort_unstable();
    best
}
