//! Projection of a guess configuration onto the self-motion manifold of a
//! task point, by damped least-squares Newton iterations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{Configuration, KinematicChain, TaskPoint};
use crate::error::{Error as CoreError, Result};
use crate::taskgraph::TaskMetricWeights;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    pub max_iterations: usize,
    /// Threshold on the task distance between the reached and target points.
    pub tolerance: f64,
    pub damping: f64,
    /// Largest joint-space step norm per iteration, in radians.
    pub step_clamp: f64,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            max_iterations: 100,
            tolerance: 1e-4,
            damping: 1e-6,
            step_clamp: 0.5,
        }
    }
}

impl ProjectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(CoreError::invalid("max_iterations must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(CoreError::invalid("projection tolerance must be positive"));
        }
        if !(self.damping >= 0.0) {
            return Err(CoreError::invalid("damping must be nonnegative"));
        }
        if !(self.step_clamp > 0.0) {
            return Err(CoreError::invalid("step clamp must be positive"));
        }
        Ok(())
    }
}

const STALL_STEP: f64 = 1e-12;
const SINGULAR_NUDGE: f64 = 0.05;

/// Why a projection did not produce a usable configuration. Both variants are
/// ordinary outcomes that callers are expected to handle.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum ProjectionFailure {
    #[error("projection did not converge (residual {0:.3e})")]
    Residual(f64),
    #[error("projected configuration is in self-collision")]
    Collision,
}

/// Raw result of the iteration, before the collision check.
#[derive(Clone, Debug)]
pub struct ProjectionOutcome {
    pub config: Configuration,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Projects `guess` onto the manifold of `target`, requiring the result to be
/// within tolerance, within limits and free of self-collision.
pub fn project(
    chain: &KinematicChain,
    target: &TaskPoint,
    guess: &Configuration,
    params: &ProjectionParams,
    metric: &TaskMetricWeights,
) -> Result<Configuration, ProjectionFailure> {
    let out = project_detailed(chain, target, guess, params, metric);
    if !out.converged {
        return Err(ProjectionFailure::Residual(out.residual));
    }
    if !chain.collision_free_unchecked(out.config.values()) {
        return Err(ProjectionFailure::Collision);
    }
    Ok(out.config)
}

/// Runs the Newton iteration and reports the last iterate whether or not it
/// converged. No collision check is made.
///
/// Each step is `dq = J^T (J J^T + damping I)^-1 r`, scaled down to at most
/// `step_clamp`, after which continuous joints are wrapped and limited joints
/// clamped.
pub fn project_detailed(
    chain: &KinematicChain,
    target: &TaskPoint,
    guess: &Configuration,
    params: &ProjectionParams,
    metric: &TaskMetricWeights,
) -> ProjectionOutcome {
    assert_eq!(guess.len(), chain.dof(), "guess length must match the chain");
    let mode = target.mode();
    let mut q = chain.normalized(guess.clone());
    let mut residual = f64::INFINITY;
    for it in 0..=params.max_iterations {
        let frames = chain.frames_unchecked(q.values());
        let reached = chain.point_from_pose(&frames.tool, mode);
        residual = metric.distance_unchecked(&reached, target);
        let r = chain.task_residual(&frames.tool, target);
        let angle_ok = target.orientation.is_none() || {
            let k = orientation_rows(chain);
            r.rows(r.len() - k, k).norm() <= params.tolerance
        };
        if residual <= params.tolerance && angle_ok {
            return ProjectionOutcome {
                config: q,
                residual,
                iterations: it,
                converged: true,
            };
        }
        if it == params.max_iterations {
            break;
        }
        let jac = chain.jacobian_from_frames(&frames, mode);
        let Some(mut dq) = dls_step(&jac, &r, params.damping) else {
            break;
        };
        let n = dq.norm();
        if !n.is_finite() {
            break;
        }
        if n < STALL_STEP {
            // exact singularity with the residual in the Jacobian's null
            // direction (e.g. a fully stretched arm asked to contract)
            for (j, v) in q.values_mut().iter_mut().enumerate() {
                *v += if j % 2 == 0 { SINGULAR_NUDGE } else { -SINGULAR_NUDGE };
            }
            chain.normalize(&mut q);
            continue;
        }
        if n > params.step_clamp {
            dq *= params.step_clamp / n;
        }
        for (v, d) in q.values_mut().iter_mut().zip(dq.iter()) {
            *v += d;
        }
        chain.normalize(&mut q);
    }
    ProjectionOutcome {
        config: q,
        residual,
        iterations: params.max_iterations,
        converged: false,
    }
}

fn orientation_rows(chain: &KinematicChain) -> usize {
    if chain.is_planar() {
        1
    } else {
        3
    }
}

fn dls_step(
    jac: &DMatrix<f64>,
    r: &nalgebra::DVector<f64>,
    damping: f64,
) -> Option<nalgebra::DVector<f64>> {
    let mut a = jac * jac.transpose();
    for i in 0..a.nrows() {
        a[(i, i)] += damping;
    }
    let x = match a.clone().cholesky() {
        Some(ch) => ch.solve(r),
        None => a.lu().solve(r)?,
    };
    Some(jac.transpose() * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Joint;
    use nalgebra::{Isometry3, Vector3};

    fn planar3() -> KinematicChain {
        let joints = (0..3)
            .map(|_| Joint::continuous(Vector3::z(), Vector3::x()))
            .collect();
        KinematicChain::new(joints, vec![], Isometry3::identity(), Isometry3::identity(), true).unwrap()
    }

    #[test]
    fn already_on_manifold_is_unchanged() {
        let c = planar3();
        let q = Configuration::new(vec![0.3, -0.7, 1.1]);
        let p = c.task_point(&q, crate::chain::TaskMode::Position).unwrap();
        let out = project_detailed(&c, &p, &q, &ProjectionParams::default(), &TaskMetricWeights::position());
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.config, q);
    }

    #[test]
    fn reaches_inner_point_from_straight_arm() {
        let c = planar3();
        let p = TaskPoint::planar(2.5, 0.0);
        let params = ProjectionParams::default();
        let metric = TaskMetricWeights::position();
        let q = project(&c, &p, &Configuration::zeros(3), &params, &metric).unwrap();
        let reached = c.task_point(&q, crate::chain::TaskMode::Position).unwrap();
        assert!(metric.distance(&reached, &p).unwrap() <= 1e-4);
    }

    #[test]
    fn unreachable_point_fails_with_residual() {
        let c = planar3();
        let p = TaskPoint::planar(3.5, 0.4);
        let err = project(&c, &p, &Configuration::new(vec![0.1, 0.2, 0.3]), &ProjectionParams::default(), &TaskMetricWeights::position())
            .unwrap_err();
        match err {
            ProjectionFailure::Residual(r) => assert!(r > 0.4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn param_validation() {
        let mut p = ProjectionParams::default();
        assert!(p.validate().is_ok());
        p.tolerance = 0.0;
        assert!(p.validate().is_err());
        let p = ProjectionParams { max_iterations: 0, ..Default::default() };
        assert!(p.validate().is_err());
    }
}
