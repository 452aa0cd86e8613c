use std::f64::consts::PI;

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::TaskPoint;
use crate::error::{Error, Result};
use crate::query::QueryContext;
use crate::taskgraph::ReachAnnulus;

/// Waypoints per stream: 4 s at 50 Hz.
pub const STREAM_LEN: usize = 200;

const MAX_DRAWS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    RandomLine,
    SelfCrossingLine,
    RandomCircle,
    PartialCircle,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::RandomLine,
        TaskKind::SelfCrossingLine,
        TaskKind::RandomCircle,
        TaskKind::PartialCircle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::RandomLine => "random-line",
            TaskKind::SelfCrossingLine => "self-crossing-line",
            TaskKind::RandomCircle => "random-circle",
            TaskKind::PartialCircle => "partial-circle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaypointStream {
    pub kind: TaskKind,
    pub rng_seed: u64,
    pub waypoints: Vec<TaskPoint>,
}

/// Where streams may go: the tool reach annulus, the roadmap box and the
/// grid pitch.
#[derive(Clone, Debug)]
pub struct TaskEnv {
    pub reach: ReachAnnulus,
    pub box_min: Vector3<f64>,
    pub box_max: Vector3<f64>,
    pub pitch: f64,
    pub planar: bool,
    pub orientation: Option<UnitQuaternion<f64>>,
}

impl TaskEnv {
    pub fn from_context(ctx: &QueryContext) -> Self {
        let graph = ctx.graph();
        let reach = ReachAnnulus::for_chain(ctx.chain(), graph.orientation());
        let planar = ctx.chain().is_planar();
        let (box_min, box_max, pitch) = match graph.grid() {
            Some(g) => {
                let mut lo = Vector3::repeat(g.plane_z);
                let mut hi = Vector3::repeat(g.plane_z);
                for a in 0..g.counts.len() {
                    lo[a] = g.origin[a];
                    hi[a] = g.origin[a] + g.cell[a] * g.counts[a] as f64;
                }
                (lo, hi, g.pitch())
            }
            None => {
                let r = Vector3::repeat(reach.max);
                (reach.center - r, reach.center + r, 0.1 * reach.max)
            }
        };
        TaskEnv {
            reach,
            box_min,
            box_max,
            pitch,
            planar,
            orientation: graph.orientation().copied(),
        }
    }

    fn margin(&self) -> f64 {
        0.05 * self.reach.max
    }

    fn in_box(&self, t: &Vector3<f64>) -> bool {
        (0..3).all(|a| t[a] >= self.box_min[a] - 1e-12 && t[a] <= self.box_max[a] + 1e-12)
    }

    /// Inside the box and inside the reach annulus shrunk by the margin.
    pub fn is_interior(&self, t: &Vector3<f64>) -> bool {
        let r = (t - self.reach.center).norm();
        self.in_box(t) && r <= self.reach.max - self.margin() && r >= self.reach.min + self.margin()
    }

    /// Inside the reach annulus.
    pub fn is_reachable(&self, t: &Vector3<f64>) -> bool {
        self.reach.contains(t)
    }

    fn point(&self, t: Vector3<f64>) -> TaskPoint {
        TaskPoint {
            translation: t,
            orientation: self.orientation,
        }
    }

    fn sample_interior(&self, rng: &mut ChaCha8Rng) -> Option<Vector3<f64>> {
        let r = self.reach.max;
        for _ in 0..MAX_DRAWS {
            let mut t = Vector3::zeros();
            for a in 0..3 {
                let lo = self.box_min[a].max(self.reach.center[a] - r);
                let hi = self.box_max[a].min(self.reach.center[a] + r);
                t[a] = if hi > lo { rng.random_range(lo..hi) } else { lo };
            }
            if self.is_interior(&t) {
                return Some(t);
            }
        }
        None
    }

    fn random_direction(&self, rng: &mut ChaCha8Rng) -> Vector3<f64> {
        if self.planar {
            let a = rng.random_range(-PI..PI);
            return Vector3::new(a.cos(), a.sin(), 0.0);
        }
        loop {
            let v = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    /// Unit vector perpendicular to `u` (in the plane for planar tasks).
    fn perpendicular(&self, u: &Vector3<f64>, rng: &mut ChaCha8Rng) -> Vector3<f64> {
        if self.planar {
            return Vector3::new(-u.y, u.x, 0.0);
        }
        loop {
            let v = self.random_direction(rng);
            let w = v - u * u.dot(&v);
            if w.norm() > 0.1 {
                return w.normalize();
            }
        }
    }
}

fn lerp_stream(a: &Vector3<f64>, b: &Vector3<f64>) -> Vec<Vector3<f64>> {
    (0..STREAM_LEN)
        .map(|i| a.lerp(b, i as f64 / (STREAM_LEN - 1) as f64))
        .collect()
}

fn circle_stream(c: &Vector3<f64>, u: &Vector3<f64>, v: &Vector3<f64>, rho: f64, theta0: f64) -> Vec<Vector3<f64>> {
    (0..STREAM_LEN)
        .map(|i| {
            let th = theta0 + 2.0 * PI * i as f64 / (STREAM_LEN - 1) as f64;
            c + (u * th.cos() + v * th.sin()) * rho
        })
        .collect()
}

type Feasible<'a> = &'a dyn Fn(&Vector3<f64>) -> bool;

fn random_line(env: &TaskEnv, ok: Feasible, rng: &mut ChaCha8Rng) -> Option<Vec<Vector3<f64>>> {
    for _ in 0..MAX_DRAWS {
        let a = env.sample_interior(rng)?;
        let b = env.sample_interior(rng)?;
        if ok(&a) && ok(&b) {
            return Some(lerp_stream(&a, &b));
        }
    }
    None
}

fn self_crossing_line(env: &TaskEnv, ok: Feasible, rng: &mut ChaCha8Rng) -> Option<Vec<Vector3<f64>>> {
    let big = env.reach.max;
    let hi = big - env.margin();
    let lo = (0.5 * big).max(env.reach.min + env.margin());
    if lo >= hi {
        return None;
    }
    for _ in 0..MAX_DRAWS {
        let u = env.random_direction(rng);
        let r1 = rng.random_range(lo..hi);
        let r2 = (r1 + rng.random_range(-env.pitch..env.pitch)).clamp(lo, hi);
        let a = env.reach.center + u * r1;
        let b = env.reach.center - u * r2;
        if env.in_box(&a) && env.in_box(&b) && ok(&a) && ok(&b) {
            return Some(lerp_stream(&a, &b));
        }
    }
    None
}

fn random_circle(env: &TaskEnv, ok: Feasible, rng: &mut ChaCha8Rng) -> Option<Vec<Vector3<f64>>> {
    let big = env.reach.max;
    for _ in 0..MAX_DRAWS {
        let c = env.sample_interior(rng)?;
        let rho = rng.random_range(0.15 * big..0.6 * big);
        let u = env.random_direction(rng);
        let v = env.perpendicular(&u, rng);
        let pts = circle_stream(&c, &u, &v, rho, rng.random_range(-PI..PI));
        if pts.iter().all(|t| env.is_interior(t)) && pts.iter().all(ok) {
            return Some(pts);
        }
    }
    None
}

fn partial_circle(env: &TaskEnv, ok: Feasible, rng: &mut ChaCha8Rng) -> Option<Vec<Vector3<f64>>> {
    let big = env.reach.max;
    for _ in 0..MAX_DRAWS {
        let d = rng.random_range(0.3 * big..0.7 * big);
        let f: f64 = rng.random_range(0.15..0.35);
        // radius at which the arc with cos(phi) > kappa leaves the reach
        let kappa = (f * PI).cos();
        let rho = -d * kappa + (d * d * kappa * kappa - d * d + big * big).sqrt();
        let u = env.random_direction(rng);
        let v = env.perpendicular(&u, rng);
        let c = env.reach.center + u * d;
        // start on the inward side so the stream begins and ends reachable
        let pts = circle_stream(&c, &u, &v, rho, PI);
        let outside = pts.iter().filter(|t| !env.is_reachable(t)).count() as f64 / STREAM_LEN as f64;
        let inner_ok = (d - rho).abs() >= env.reach.min + env.margin();
        if (0.1..=0.4).contains(&outside) && inner_ok && env.is_interior(&pts[0]) && ok(&pts[0]) {
            return Some(pts);
        }
    }
    None
}

/// Generates the stream of `kind` for `rng_seed`. Deterministic.
///
/// `feasible` screens points the robot must be able to hold: line
/// endpoints, every point of a random circle and the start of a partial
/// circle.
pub fn generate(
    env: &TaskEnv,
    kind: TaskKind,
    rng_seed: u64,
    feasible: &dyn Fn(&TaskPoint) -> bool,
) -> Result<WaypointStream> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let ok = |t: &Vector3<f64>| feasible(&env.point(*t));
    let pts = match kind {
        TaskKind::RandomLine => random_line(env, &ok, &mut rng),
        TaskKind::SelfCrossingLine => self_crossing_line(env, &ok, &mut rng),
        TaskKind::RandomCircle => random_circle(env, &ok, &mut rng),
        TaskKind::PartialCircle => partial_circle(env, &ok, &mut rng),
    }
    .ok_or_else(|| Error::invalid(format!("could not place a {} in the workspace", kind.name())))?;
    Ok(WaypointStream {
        kind,
        rng_seed,
        waypoints: pts.into_iter().map(|t| env.point(t)).collect(),
    })
}
