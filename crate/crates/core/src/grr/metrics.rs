use super::roadmap::ResolutionRoadmap;
use crate::chain::KinematicChain;
use crate::error::{Error, Result};
use crate::taskgraph::TaskGraph;

/// Fraction of graph edges that are resolved.
pub fn connectivity(roadmap: &ResolutionRoadmap, graph: &TaskGraph) -> Result<f64> {
    if graph.edges().is_empty() {
        return Err(Error::invalid("graph has no edges"));
    }
    Ok(roadmap.resolved_edges().len() as f64 / graph.edges().len() as f64)
}

/// Mean ratio of C-space to task-space length over resolved edges.
pub fn smoothness(roadmap: &ResolutionRoadmap, graph: &TaskGraph, chain: &KinematicChain) -> Result<f64> {
    let edges = roadmap.resolved_edges();
    if edges.is_empty() {
        return Err(Error::UndefinedMetric("no resolved edges".into()));
    }
    let total: f64 = edges
        .iter()
        .map(|&(a, b)| {
            let qa = roadmap.assignment(a).expect("resolved endpoints are assigned");
            let qb = roadmap.assignment(b).expect("resolved endpoints are assigned");
            let dq = chain.distance_unchecked(qa.values(), qb.values());
            dq / graph.distance(graph.vertex(a), graph.vertex(b))
        })
        .sum();
    Ok(total / edges.len() as f64)
}
