use crate::chain::{Configuration, KinematicChain, TaskPoint};
use crate::error::{Error, Result};
use crate::grr::{project_with_support, ResolutionRoadmap};
use crate::taskgraph::TaskGraph;

use super::QueryFailure;

/// A chain, its task graph and a roadmap over it, ready for queries.
#[derive(Clone, Debug)]
pub struct QueryContext {
    chain: KinematicChain,
    graph: TaskGraph,
    roadmap: ResolutionRoadmap,
    components: Vec<usize>,
}

impl QueryContext {
    pub fn new(chain: KinematicChain, graph: TaskGraph, roadmap: ResolutionRoadmap) -> Result<Self> {
        if !roadmap.matches(&graph) {
            return Err(Error::invalid("roadmap was not built over this task graph"));
        }
        let components = roadmap.resolved_components();
        Ok(QueryContext {
            chain,
            graph,
            roadmap,
            components,
        })
    }

    pub fn chain(&self) -> &KinematicChain {
        &self.chain
    }

    pub fn graph(&self) -> &TaskGraph {
        &self.graph
    }

    pub fn roadmap(&self) -> &ResolutionRoadmap {
        &self.roadmap
    }

    pub fn k(&self) -> usize {
        self.roadmap.params().k
    }

    /// Resolved-edge component label of an assigned vertex.
    pub fn component(&self, v: usize) -> Option<usize> {
        let c = self.components[v];
        (c != usize::MAX).then_some(c)
    }

    /// Restricts `p` to the graph's task mode.
    pub fn task_point(&self, p: &TaskPoint) -> TaskPoint {
        p.restricted(self.graph.mode(), self.graph.orientation())
    }

    /// Task point reached by `q`, in the graph's task mode.
    pub fn forward(&self, q: &Configuration) -> TaskPoint {
        self.chain.task_point_unchecked(q.values(), self.graph.mode())
    }

    /// Nearest assigned vertex to `p`, optionally within one component.
    pub fn nearest_assigned(&self, p: &TaskPoint, component: Option<usize>) -> Option<usize> {
        let n = self.graph.len();
        let mut k = self.k().max(1);
        loop {
            let found = self
                .graph
                .nearest_neighbors(p, k)
                .into_iter()
                .find(|&v| self.components[v] != usize::MAX && component.is_none_or(|c| self.components[v] == c));
            if found.is_some() || k >= n {
                return found;
            }
            k = (k * 4).min(n);
        }
    }

    /// Resolves `p` from its `k` nearest assigned vertices, restricted to the
    /// largest group of them that is connected by resolved edges among
    /// themselves. With `component`, only vertices of that resolved
    /// component are considered.
    pub fn resolve_in(&self, p: &TaskPoint, k: usize, component: Option<usize>) -> Result<Configuration, QueryFailure> {
        resolve_filtered(&self.chain, &self.graph, &self.roadmap, p, k, |v| {
            self.components[v] != usize::MAX && component.is_none_or(|c| self.components[v] == c)
        })
    }

    pub fn resolve(&self, p: &TaskPoint) -> Result<Configuration, QueryFailure> {
        self.resolve_in(p, self.k(), None)
    }
}

/// Indices into `near` of the largest subset connected by resolved edges.
/// Ties go to the group containing the nearest entry.
fn largest_local_group(roadmap: &ResolutionRoadmap, near: &[(usize, f64)]) -> Vec<usize> {
    let n = near.len();
    let mut label = vec![usize::MAX; n];
    let mut best: Vec<usize> = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = s;
        let mut members = vec![s];
        let mut stack = vec![s];
        while let Some(a) = stack.pop() {
            for b in 0..n {
                if label[b] == usize::MAX && roadmap.is_resolved_edge(near[a].0, near[b].0) {
                    label[b] = s;
                    members.push(b);
                    stack.push(b);
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

/// Stateless resolution of `p` through `roadmap`.
pub fn resolve(
    chain: &KinematicChain,
    graph: &TaskGraph,
    roadmap: &ResolutionRoadmap,
    p: &TaskPoint,
    k: usize,
) -> Result<Configuration, QueryFailure> {
    resolve_filtered(chain, graph, roadmap, p, k, |v| roadmap.assignment(v).is_some())
}

fn resolve_filtered(
    chain: &KinematicChain,
    graph: &TaskGraph,
    roadmap: &ResolutionRoadmap,
    p: &TaskPoint,
    k: usize,
    keep: impl Fn(usize) -> bool,
) -> Result<Configuration, QueryFailure> {
    let p = p.restricted(graph.mode(), graph.orientation());
    let near: Vec<(usize, f64)> = graph
        .nearest_with_distance(&p, k)
        .into_iter()
        .filter(|&(v, _)| keep(v))
        .collect();
    if near.is_empty() {
        return Err(QueryFailure::OutOfCoverage);
    }
    let group = largest_local_group(roadmap, &near);
    let support: Vec<(&Configuration, f64)> = group
        .iter()
        .map(|&i| (roadmap.assignment(near[i].0).expect("assigned"), near[i].1))
        .collect();
    Ok(project_with_support(chain, &p, &support, &roadmap.params().projection, graph.metric())?)
}
