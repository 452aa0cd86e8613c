//! Teleoperation benchmark: waypoint stream generators, replay of streams
//! through a solver, path metrics and aggregate reports.

mod dtw;
mod report;
mod tasks;
mod trial;

pub use dtw::{dtw_deviation, path_smoothness};
pub use report::{run_benchmark, stream_seed, BenchmarkConfig, BenchmarkReport, SummaryRow, TrialRecord};
pub use tasks::{generate, TaskEnv, TaskKind, WaypointStream, STREAM_LEN};
pub use trial::{is_feasible, judge_success, run_trial, FailureReason, JudgeParams, SolverKind, TrialResult};
