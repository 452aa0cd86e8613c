use criterion::{criterion_group, criterion_main, Criterion};
use grr_bench::{configurations, context};
use grr_core::grr::is_continuous;
use grr_core::robots;
use grr_core::{project, ProjectionParams, TaskMode};
use std::hint::black_box;

fn kinematics(c: &mut Criterion) {
    for model in [robots::planar5(), robots::spatial7()] {
        let chain = &model.chain;
        let qs = configurations(chain.dof(), 64);
        c.bench_function(&format!("{}/forward", model.name), |b| {
            b.iter(|| {
                for q in &qs {
                    black_box(chain.task_point(q, model.mode).unwrap());
                }
            })
        });
        c.bench_function(&format!("{}/jacobian", model.name), |b| {
            b.iter(|| {
                for q in &qs {
                    black_box(chain.jacobian(q, model.mode).unwrap());
                }
            })
        });
        c.bench_function(&format!("{}/self_collision", model.name), |b| {
            b.iter(|| {
                for q in &qs {
                    black_box(chain.self_collision_free(q).unwrap());
                }
            })
        });
    }
}

fn projection(c: &mut Criterion) {
    let model = robots::planar5();
    let chain = &model.chain;
    let metric = model.task_graph().unwrap().metric().clone();
    let params = ProjectionParams::default();
    let pairs: Vec<_> = configurations(chain.dof(), 64)
        .into_iter()
        .map(|q| {
            let target = chain.task_point(&q, TaskMode::Position).unwrap();
            let guess = grr_core::Configuration::new(q.values().iter().map(|v| v + 0.2).collect());
            (target, guess)
        })
        .collect();
    c.bench_function("planar5/project", |b| {
        b.iter(|| {
            for (t, g) in &pairs {
                let _ = black_box(project(chain, t, g, &params, &metric));
            }
        })
    });
}

fn continuity(c: &mut Criterion) {
    let model = robots::planar5();
    let ctx = context(&model);
    let graph = ctx.graph();
    let roadmap = ctx.roadmap();
    let params = roadmap.params();
    let edges: Vec<_> = roadmap.resolved_edges().iter().step_by(16).copied().collect();
    c.bench_function("planar5/is_continuous", |b| {
        b.iter(|| {
            for &(a, e) in &edges {
                black_box(is_continuous(
                    ctx.chain(),
                    graph.vertex(a),
                    graph.vertex(e),
                    roadmap.assignment(a).unwrap(),
                    roadmap.assignment(e).unwrap(),
                    &params.continuity,
                    &params.projection,
                    graph.metric(),
                ));
            }
        })
    });
}

criterion_group!(benches, kinematics, projection, continuity);
criterion_main!(benches);
