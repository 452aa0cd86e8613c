//! Fixtures shared by the benches.

use grr_core::query::QueryContext;
use grr_core::robots::RobotModel;
use grr_core::Configuration;

/// Builds the default roadmap of `model` and wraps it for queries.
pub fn context(model: &RobotModel) -> QueryContext {
    let graph = model.task_graph().expect("grid");
    let roadmap = model.build_roadmap(&graph, &model.default_params()).expect("roadmap");
    QueryContext::new(model.chain.clone(), graph, roadmap).expect("context")
}

/// Deterministic configurations spread over the joint circle.
pub fn configurations(dof: usize, n: usize) -> Vec<Configuration> {
    (0..n)
        .map(|i| {
            Configuration::new(
                (0..dof)
                    .map(|j| ((i * 7 + j * 3) % 23) as f64 / 23.0 * 6.0 - 3.0)
                    .collect(),
            )
        })
        .collect()
}
