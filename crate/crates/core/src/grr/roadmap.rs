use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::continuity::ContinuityParams;
use crate::chain::{Configuration, KinematicChain};
use crate::error::{Error, Result};
use crate::projection::ProjectionParams;
use crate::taskgraph::TaskGraph;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrrParams {
    pub continuity: ContinuityParams,
    pub projection: ProjectionParams,
    /// Neighborhood size for expansion and queries.
    pub k: usize,
}

impl GrrParams {
    /// Defaults for `chain` on a task space of dimension `task_dim`.
    pub fn for_chain(chain: &KinematicChain, task_dim: usize) -> Self {
        GrrParams {
            continuity: ContinuityParams::for_dof(chain.dof()),
            projection: ProjectionParams::default(),
            k: 2 * task_dim + 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.continuity.validate()?;
        self.projection.validate()?;
        if self.k < 1 {
            return Err(Error::invalid("k must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub seeds: usize,
    pub vertices: usize,
    pub resolved_first_pass: usize,
    pub failed_first_pass: usize,
    pub resolved_on_retry: usize,
    /// Vertices left without a configuration, ascending.
    pub unresolved: Vec<usize>,
    pub edges_total: usize,
    pub edges_checked_first_pass: usize,
    pub edges_passed_first_pass: usize,
    pub edges_checked_on_retry: usize,
    pub edges_passed_on_retry: usize,
    /// Not persisted, so that identical builds produce identical files.
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Partial assignment of configurations to task graph vertices plus the
/// edges whose endpoint configurations passed the continuity check.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolutionRoadmap {
    graph_hash: String,
    assignments: Vec<Option<Configuration>>,
    resolved_edges: Vec<(usize, usize)>,
    resolved_adjacency: Vec<Vec<usize>>,
    params: GrrParams,
    report: BuildReport,
}

impl ResolutionRoadmap {
    /// Assembles a roadmap over `graph`, checking that assignments have the
    /// chain's length and resolved edges are graph edges between assigned
    /// vertices.
    pub fn from_parts(
        chain: &KinematicChain,
        graph: &TaskGraph,
        assignments: Vec<Option<Configuration>>,
        mut resolved_edges: Vec<(usize, usize)>,
        params: GrrParams,
        report: BuildReport,
    ) -> Result<Self> {
        if assignments.len() != graph.len() {
            return Err(Error::invalid(format!(
                "{} assignments for {} vertices",
                assignments.len(),
                graph.len()
            )));
        }
        for (i, q) in assignments.iter().enumerate() {
            if let Some(q) = q {
                if q.len() != chain.dof() {
                    return Err(Error::invalid(format!("assignment {i} has {} joints", q.len())));
                }
            }
        }
        for e in resolved_edges.iter_mut() {
            *e = (e.0.min(e.1), e.0.max(e.1));
        }
        resolved_edges.sort_unstable();
        resolved_edges.dedup();
        let mut resolved_adjacency = vec![Vec::new(); graph.len()];
        for &(a, b) in &resolved_edges {
            if b >= graph.len() || !graph.has_edge(a, b) {
                return Err(Error::invalid(format!("resolved edge ({a}, {b}) is not a graph edge")));
            }
            if assignments[a].is_none() || assignments[b].is_none() {
                return Err(Error::invalid(format!("resolved edge ({a}, {b}) has an unassigned endpoint")));
            }
            resolved_adjacency[a].push(b);
            resolved_adjacency[b].push(a);
        }
        for adj in &mut resolved_adjacency {
            adj.sort_unstable();
        }
        Ok(ResolutionRoadmap {
            graph_hash: graph.identity_hash(),
            assignments,
            resolved_edges,
            resolved_adjacency,
            params,
            report,
        })
    }

    pub fn graph_hash(&self) -> &str {
        &self.graph_hash
    }

    pub fn matches(&self, graph: &TaskGraph) -> bool {
        self.assignments.len() == graph.len() && self.graph_hash == graph.identity_hash()
    }

    pub fn assignments(&self) -> &[Option<Configuration>] {
        &self.assignments
    }

    pub fn assignment(&self, v: usize) -> Option<&Configuration> {
        self.assignments.get(v).and_then(Option::as_ref)
    }

    pub fn assigned_count(&self) -> usize {
        self.assignments.iter().filter(|a| a.is_some()).count()
    }

    pub fn resolved_edges(&self) -> &[(usize, usize)] {
        &self.resolved_edges
    }

    /// Vertices joined to `v` by resolved edges, ascending.
    pub fn resolved_neighbors(&self, v: usize) -> &[usize] {
        &self.resolved_adjacency[v]
    }

    pub fn is_resolved_edge(&self, a: usize, b: usize) -> bool {
        self.resolved_adjacency[a].binary_search(&b).is_ok()
    }

    pub fn params(&self) -> &GrrParams {
        &self.params
    }

    pub fn report(&self) -> &BuildReport {
        &self.report
    }

    /// Component label per vertex over resolved edges; unassigned vertices
    /// get `usize::MAX`. Labels are the smallest vertex index in the component.
    pub fn resolved_components(&self) -> Vec<usize> {
        let n = self.assignments.len();
        let mut label = vec![usize::MAX; n];
        for s in 0..n {
            if label[s] != usize::MAX || self.assignments[s].is_none() {
                continue;
            }
            label[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.resolved_adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = s;
                        queue.push_back(v);
                    }
                }
            }
        }
        label
    }
}
