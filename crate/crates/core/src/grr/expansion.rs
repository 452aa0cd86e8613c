use std::collections::{BTreeMap, HashSet, VecDeque};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use super::continuity::is_continuous;
use super::roadmap::{BuildReport, GrrParams, ResolutionRoadmap};
use crate::chain::{Configuration, KinematicChain, TaskPoint};
use crate::error::{Error as CoreError, Result};
use crate::projection::{project, ProjectionFailure, ProjectionParams};
use crate::taskgraph::{TaskGraph, TaskMetricWeights};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SupportFailure {
    #[error("no assigned vertex near the target")]
    NoSupport,
    #[error(transparent)]
    Projection(#[from] ProjectionFailure),
}

/// Blend weights for support configurations at task distances `ds`:
/// `(max(ds) / d_i)^2`, normalized. A zero distance selects that support
/// alone.
pub fn support_weights(ds: &[f64]) -> Vec<f64> {
    if let Some(z) = ds.iter().position(|&d| d <= 0.0) {
        let mut w = vec![0.0; ds.len()];
        w[z] = 1.0;
        return w;
    }
    let max = ds.iter().cloned().fold(0.0, f64::max);
    let raw: Vec<f64> = ds.iter().map(|&d| (max / d).powi(2)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Projects `p` starting from the weighted average of the support
/// configurations, given with their task distances to `p`.
pub fn project_with_support(
    chain: &KinematicChain,
    p: &TaskPoint,
    support: &[(&Configuration, f64)],
    projection: &ProjectionParams,
    metric: &TaskMetricWeights,
) -> Result<Configuration, SupportFailure> {
    if support.is_empty() {
        return Err(SupportFailure::NoSupport);
    }
    let ds: Vec<f64> = support.iter().map(|s| s.1).collect();
    let ws = support_weights(&ds);
    let guess = match ws.iter().position(|&w| w == 1.0) {
        Some(i) => support[i].0.clone(),
        None => {
            let qs: Vec<Configuration> = support.iter().map(|s| s.0.clone()).collect();
            chain.weighted_average_unchecked(&qs, &ws)
        }
    };
    Ok(project(chain, p, &guess, projection, metric)?)
}

/// Resolves `p` from the assigned vertices among its `k` nearest graph
/// vertices.
pub fn project_neighbors(
    chain: &KinematicChain,
    graph: &TaskGraph,
    roadmap: &ResolutionRoadmap,
    p: &TaskPoint,
    k: usize,
) -> Result<Configuration, SupportFailure> {
    project_from_assignments(chain, graph, roadmap.assignments(), p, k, &roadmap.params().projection)
}

fn project_from_assignments(
    chain: &KinematicChain,
    graph: &TaskGraph,
    assignments: &[Option<Configuration>],
    p: &TaskPoint,
    k: usize,
    projection: &ProjectionParams,
) -> Result<Configuration, SupportFailure> {
    let support: Vec<(&Configuration, f64)> = graph
        .nearest_with_distance(p, k)
        .into_iter()
        .filter_map(|(v, d)| assignments[v].as_ref().map(|q| (q, d)))
        .collect();
    project_with_support(chain, p, &support, projection, graph.metric())
}

struct Expansion<'a> {
    chain: &'a KinematicChain,
    graph: &'a TaskGraph,
    params: &'a GrrParams,
    assignments: Vec<Option<Configuration>>,
    resolved: Vec<(usize, usize)>,
    checked: HashSet<(usize, usize)>,
}

impl Expansion<'_> {
    /// Checks every untested graph edge between `v` and an assigned
    /// neighbor. Returns (checked, passed).
    fn check_edges(&mut self, v: usize) -> (usize, usize) {
        let pending: Vec<(usize, usize)> = self
            .graph
            .adjacent(v)
            .iter()
            .filter(|&&u| self.assignments[u].is_some())
            .map(|&u| (v.min(u), v.max(u)))
            .filter(|e| !self.checked.contains(e))
            .collect();
        let results: Vec<bool> = pending
            .par_iter()
            .map(|&(a, b)| self.edge_passes(a, b))
            .collect();
        let mut passed = 0;
        for (e, ok) in pending.iter().zip(results) {
            self.checked.insert(*e);
            if ok {
                self.resolved.push(*e);
                passed += 1;
            }
        }
        (pending.len(), passed)
    }

    fn edge_passes(&self, a: usize, b: usize) -> bool {
        let (Some(qa), Some(qb)) = (&self.assignments[a], &self.assignments[b]) else {
            return false;
        };
        is_continuous(
            self.chain,
            self.graph.vertex(a),
            self.graph.vertex(b),
            qa,
            qb,
            &self.params.continuity,
            &self.params.projection,
            self.graph.metric(),
        )
    }

    fn resolve(&self, v: usize) -> Option<Configuration> {
        project_from_assignments(
            self.chain,
            self.graph,
            &self.assignments,
            self.graph.vertex(v),
            self.params.k + 1,
            &self.params.projection,
        )
        .ok()
    }
}

/// Breadth-first expansion from `seeds` over `graph`.
///
/// Each dequeued vertex enqueues its unvisited nearest and adjacent
/// vertices, is assigned by neighbor projection if it has no configuration
/// yet, and has its graph edges to assigned vertices checked for
/// continuity. Vertices whose projection fails are retried once after the
/// queue drains.
pub fn global_expansion(
    chain: &KinematicChain,
    graph: &TaskGraph,
    seeds: &BTreeMap<usize, Configuration>,
    params: &GrrParams,
) -> Result<ResolutionRoadmap> {
    params.validate()?;
    if seeds.is_empty() {
        return Err(CoreError::NoSeeds);
    }
    for (&v, q) in seeds {
        if v >= graph.len() {
            return Err(CoreError::invalid(format!("seed vertex {v} out of range")));
        }
        chain.check_len(q)?;
    }
    let start = Instant::now();
    let n = graph.len();
    let mut ex = Expansion {
        chain,
        graph,
        params,
        assignments: vec![None; n],
        resolved: Vec::new(),
        checked: HashSet::new(),
    };
    let mut visited = vec![false; n];
    let mut queue = VecDeque::new();
    for (&v, q) in seeds {
        ex.assignments[v] = Some(chain.normalized(q.clone()));
        visited[v] = true;
        queue.push_back(v);
    }
    let mut report = BuildReport {
        seeds: seeds.len(),
        vertices: n,
        edges_total: graph.edges().len(),
        ..Default::default()
    };
    let mut failed = Vec::new();
    while let Some(v) = queue.pop_front() {
        // k + 1 because the vertex itself is its own nearest neighbor
        let near = graph.nearest_neighbors(graph.vertex(v), params.k + 1);
        for &u in near.iter().chain(graph.adjacent(v)) {
            if !visited[u] {
                visited[u] = true;
                queue.push_back(u);
            }
        }
        if ex.assignments[v].is_none() {
            match ex.resolve(v) {
                Some(q) => {
                    ex.assignments[v] = Some(q);
                    report.resolved_first_pass += 1;
                }
                None => {
                    failed.push(v);
                    continue;
                }
            }
        }
        let (c, p) = ex.check_edges(v);
        report.edges_checked_first_pass += c;
        report.edges_passed_first_pass += p;
    }
    report.failed_first_pass = failed.len();
    for v in failed {
        if let Some(q) = ex.resolve(v) {
            ex.assignments[v] = Some(q);
            report.resolved_on_retry += 1;
            let (c, p) = ex.check_edges(v);
            report.edges_checked_on_retry += c;
            report.edges_passed_on_retry += p;
        }
    }
    report.unresolved = (0..n).filter(|&v| ex.assignments[v].is_none()).collect();
    report.wall_seconds = start.elapsed().as_secs_f64();
    ResolutionRoadmap::from_parts(chain, graph, ex.assignments, ex.resolved, *params, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_follow_inverse_square() {
        let w = support_weights(&[1.0, 2.0]);
        assert!((w[0] - 0.8).abs() < 1e-15 && (w[1] - 0.2).abs() < 1e-15);
        assert_eq!(support_weights(&[0.7]), vec![1.0]);
        assert_eq!(support_weights(&[0.3, 0.0, 0.0]), vec![0.0, 1.0, 0.0]);
    }
}
