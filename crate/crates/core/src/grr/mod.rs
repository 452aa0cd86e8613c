//! Roadmap construction: continuity checking, neighbor projection, seeded
//! breadth-first expansion and roadmap quality metrics.

mod continuity;
mod expansion;
mod metrics;
mod roadmap;
mod seeding;

pub use continuity::{is_continuous, ContinuityParams};
pub use expansion::{global_expansion, project_neighbors, project_with_support, support_weights, SupportFailure};
pub use metrics::{connectivity, smoothness};
pub use roadmap::{BuildReport, GrrParams, ResolutionRoadmap};
pub use seeding::{random_seed, seed_from_cycle};
