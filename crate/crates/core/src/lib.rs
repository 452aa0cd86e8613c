//! Global redundancy resolution for serial manipulators.
//!
//! A roadmap assigns each vertex of a discretized task space a joint
//! configuration such that neighboring assignments are continuously
//! connected. Roadmaps are built by breadth-first expansion from seed
//! configurations and then queried to map task-space targets to joint
//! configurations.

pub mod benchmark;
pub mod chain;
pub mod error;
pub mod grr;
pub mod io;
pub mod projection;
pub mod query;
pub mod robots;
pub mod taskgraph;

pub use chain::{Configuration, Joint, JointLimits, KinematicChain, TaskMode, TaskPoint};
pub use error::{Error, Result};
pub use projection::{project, ProjectionFailure, ProjectionParams};
pub use taskgraph::{task_distance, TaskGraph, TaskMetricWeights, WorkspaceBox};
