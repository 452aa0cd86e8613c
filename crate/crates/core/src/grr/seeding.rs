use std::collections::BTreeMap;

use rand::Rng;

use crate::chain::{Configuration, JointLimits, KinematicChain};
use crate::error::{Error, Result};
use crate::projection::{project, ProjectionParams};
use crate::taskgraph::TaskGraph;

/// Seeds from a cyclic configuration path: each entry is projected onto the
/// graph vertex nearest its tool point. The first entry to reach a vertex
/// wins; entries whose projection fails are skipped.
pub fn seed_from_cycle(
    chain: &KinematicChain,
    graph: &TaskGraph,
    cycle: &[Configuration],
    projection: &ProjectionParams,
) -> Result<BTreeMap<usize, Configuration>> {
    if cycle.is_empty() {
        return Err(Error::invalid("empty seed cycle"));
    }
    let mut seeds = BTreeMap::new();
    for q in cycle {
        chain.check_len(q)?;
        if let Some((v, q)) = seed_at_nearest(chain, graph, q, projection) {
            seeds.entry(v).or_insert(q);
        }
    }
    if seeds.is_empty() {
        return Err(Error::NoSeeds);
    }
    Ok(seeds)
}

/// A single seed from a uniformly random configuration (within limits),
/// projected onto the vertex nearest its tool point. Up to 100 draws are
/// made before giving up.
pub fn random_seed<R: Rng + ?Sized>(
    chain: &KinematicChain,
    graph: &TaskGraph,
    projection: &ProjectionParams,
    rng: &mut R,
) -> Result<BTreeMap<usize, Configuration>> {
    for _ in 0..100 {
        let q = random_configuration(chain, rng);
        if !chain.collision_free_unchecked(q.values()) {
            continue;
        }
        if let Some((v, q)) = seed_at_nearest(chain, graph, &q, projection) {
            return Ok(BTreeMap::from([(v, q)]));
        }
    }
    Err(Error::NoSeeds)
}

pub(crate) fn random_configuration<R: Rng + ?Sized>(chain: &KinematicChain, rng: &mut R) -> Configuration {
    let v = chain
        .joints()
        .iter()
        .map(|j| match j.limits {
            JointLimits::Continuous => rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            JointLimits::Limited { lower, upper } => rng.random_range(lower..upper),
        })
        .collect();
    Configuration::new(v)
}

fn seed_at_nearest(
    chain: &KinematicChain,
    graph: &TaskGraph,
    q: &Configuration,
    projection: &ProjectionParams,
) -> Option<(usize, Configuration)> {
    let p = chain
        .task_point_unchecked(q.values(), graph.mode())
        .restricted(graph.mode(), graph.orientation());
    let v = *graph.nearest_neighbors(&p, 1).first()?;
    project(chain, graph.vertex(v), q, projection, graph.metric())
        .ok()
        .map(|q| (v, q))
}
