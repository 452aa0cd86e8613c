use serde::{Deserialize, Serialize};

use crate::chain::{Configuration, KinematicChain, TaskPoint};
use crate::error::{Error, Result};
use crate::projection::{project, ProjectionParams};
use crate::taskgraph::{bisect_unchecked, TaskMetricWeights};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityParams {
    /// Largest allowed ratio between a half-edge and the full edge in C-space.
    pub c: f64,
    /// C-space distance below which an edge is accepted outright.
    pub epsilon: f64,
    pub depth_limit: u32,
}

impl ContinuityParams {
    /// `c = 0.5 sqrt(n)`, `epsilon = 0.05 sqrt(n)` for an `n`-joint chain.
    pub fn for_dof(dof: usize) -> Self {
        let s = (dof as f64).sqrt();
        ContinuityParams {
            c: 0.5 * s,
            epsilon: 0.05 * s,
            depth_limit: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.5) {
            return Err(Error::invalid(format!("c = {} must exceed 0.5", self.c)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        Ok(())
    }
}

/// Recursive bisection test of whether `q_i` and `q_j` lie on one continuous
/// branch of self-motion manifolds between `p_i` and `p_j`.
#[allow(clippy::too_many_arguments)]
pub fn is_continuous(
    chain: &KinematicChain,
    p_i: &TaskPoint,
    p_j: &TaskPoint,
    q_i: &Configuration,
    q_j: &Configuration,
    params: &ContinuityParams,
    projection: &ProjectionParams,
    metric: &TaskMetricWeights,
) -> bool {
    check(chain, p_i, p_j, q_i, q_j, params, projection, metric, params.depth_limit)
}

#[allow(clippy::too_many_arguments)]
fn check(
    chain: &KinematicChain,
    p_i: &TaskPoint,
    p_j: &TaskPoint,
    q_i: &Configuration,
    q_j: &Configuration,
    params: &ContinuityParams,
    projection: &ProjectionParams,
    metric: &TaskMetricWeights,
    depth: u32,
) -> bool {
    let d = chain.distance_unchecked(q_i.values(), q_j.values());
    if d < params.epsilon {
        return true;
    }
    if depth == 0 {
        return false;
    }
    let p_m = bisect_unchecked(p_i, p_j);
    let guess = chain.bisect_unchecked(q_i.values(), q_j.values());
    let Ok(q_m) = project(chain, &p_m, &guess, projection, metric) else {
        return false;
    };
    let d_im = chain.distance_unchecked(q_i.values(), q_m.values());
    let d_mj = chain.distance_unchecked(q_m.values(), q_j.values());
    if d_im.max(d_mj) > params.c * d {
        return false;
    }
    check(chain, p_i, &p_m, q_i, &q_m, params, projection, metric, depth - 1)
        && check(chain, &p_m, p_j, &q_m, q_j, params, projection, metric, depth - 1)
}
