//! Roadmap queries: point resolution, task-space path planning and the
//! teleoperation controller.

mod plan;
mod resolve;
mod teleop;

use thiserror::Error;

pub use plan::plan_task_path;
pub use resolve::{resolve, QueryContext};
pub use teleop::{teleop_step, TeleopParams, TeleopState, TeleopStatus};

use crate::grr::SupportFailure;
use crate::projection::ProjectionFailure;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum QueryFailure {
    #[error("target is outside roadmap coverage")]
    OutOfCoverage,
    #[error("goal is not reachable over resolved edges")]
    Unreachable,
    #[error(transparent)]
    Projection(#[from] ProjectionFailure),
}

impl From<SupportFailure> for QueryFailure {
    fn from(e: SupportFailure) -> Self {
        match e {
            SupportFailure::NoSupport => QueryFailure::OutOfCoverage,
            SupportFailure::Projection(p) => QueryFailure::Projection(p),
        }
    }
}
