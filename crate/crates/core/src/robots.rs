//! Robot models: a chain, its task mode and a cyclic seed path, plus the
//! built-in models used by the tools and tests.

use std::f64::consts::PI;

use nalgebra::{Isometry3, UnitQuaternion, Vector3};

use crate::chain::{planar_orientation, Capsule, Configuration, Joint, KinematicChain, TaskMode};
use crate::error::{Error, Result};
use crate::grr::{global_expansion, seed_from_cycle, GrrParams, ResolutionRoadmap};
use crate::taskgraph::{TaskGraph, WorkspaceBox};

/// Default grid for a model.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub workspace: WorkspaceBox,
    pub resolution: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub chain: KinematicChain,
    pub mode: TaskMode,
    /// Tool orientation held in fixed-orientation mode.
    pub orientation: Option<UnitQuaternion<f64>>,
    pub seed_cycle: Vec<Configuration>,
    pub grid: Option<GridSpec>,
}

impl RobotModel {
    pub fn new(
        name: impl Into<String>,
        chain: KinematicChain,
        mode: TaskMode,
        orientation: Option<UnitQuaternion<f64>>,
        seed_cycle: Vec<Configuration>,
        grid: Option<GridSpec>,
    ) -> Result<Self> {
        match (mode, &orientation) {
            (TaskMode::Position, Some(_)) => {
                return Err(Error::invalid("position mode takes no fixed orientation"));
            }
            (TaskMode::FixedOrientation, None) => {
                return Err(Error::invalid("fixed-orientation mode needs an orientation"));
            }
            _ => {}
        }
        if seed_cycle.is_empty() {
            return Err(Error::invalid("seed cycle is empty"));
        }
        for (i, q) in seed_cycle.iter().enumerate() {
            chain
                .validate(q)
                .map_err(|e| Error::invalid(format!("seed cycle entry {i}: {e}")))?;
        }
        if let Some(g) = &grid {
            if g.workspace.dim() != g.resolution.len() {
                return Err(Error::invalid("grid resolution does not match the workspace box"));
            }
        }
        Ok(RobotModel {
            name: name.into(),
            chain,
            mode,
            orientation,
            seed_cycle,
            grid,
        })
    }

    pub fn task_dim(&self) -> usize {
        self.chain.task_dim(self.mode)
    }

    /// Grid task graph from the model's default grid.
    pub fn task_graph(&self) -> Result<TaskGraph> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("robot '{}' has no default grid", self.name)))?;
        TaskGraph::build_grid(&self.chain, &g.workspace, &g.resolution, self.orientation)
    }

    /// Builds the roadmap over `graph`, seeded from the model's cycle.
    pub fn build_roadmap(&self, graph: &TaskGraph, params: &GrrParams) -> Result<ResolutionRoadmap> {
        let seeds = seed_from_cycle(&self.chain, graph, &self.seed_cycle, &params.projection)?;
        global_expansion(&self.chain, graph, &seeds, params)
    }

    pub fn default_params(&self) -> GrrParams {
        GrrParams::for_chain(&self.chain, self.task_dim())
    }
}

/// Planar arm of `n` unit links with continuous joints.
pub fn planar_chain(n: usize) -> KinematicChain {
    let joints = (0..n)
        .map(|_| Joint::continuous(Vector3::z(), Vector3::x()))
        .collect();
    KinematicChain::new(joints, vec![], Isometry3::identity(), Isometry3::identity(), true)
        .expect("planar chain is valid")
}

fn cycle(n: usize, f: impl Fn(f64) -> Vec<f64>) -> Vec<Configuration> {
    (0..n)
        .map(|i| Configuration::new(f(2.0 * PI * i as f64 / n as f64 - PI)))
        .collect()
}

/// Five unit links, tool position only. Seeds sweep the base joint with the
/// other joints bent evenly.
pub fn planar5() -> RobotModel {
    let b = 0.7;
    RobotModel::new(
        "planar5",
        planar_chain(5),
        TaskMode::Position,
        None,
        cycle(64, |s| vec![s, b, b, b, b]),
        Some(GridSpec {
            workspace: WorkspaceBox::new(vec![-5.0, -5.0], vec![5.0, 5.0]).expect("valid box"),
            resolution: vec![36, 36],
        }),
    )
    .expect("built-in model is valid")
}

/// Five unit links with the tool always facing along +x. Seeds sweep the
/// wrist around the base while the last joint cancels the accumulated angle.
pub fn planar5_fixed() -> RobotModel {
    let b = 0.7;
    RobotModel::new(
        "planar5-fixed",
        planar_chain(5),
        TaskMode::FixedOrientation,
        Some(planar_orientation(0.0)),
        cycle(64, |s| vec![s, b, b, b, crate::chain::wrap_angle(-(s + 3.0 * b))]),
        Some(GridSpec {
            workspace: WorkspaceBox::new(vec![-3.0, -4.0], vec![5.0, 4.0]).expect("valid box"),
            resolution: vec![36, 36],
        }),
    )
    .expect("built-in model is valid")
}

/// [`planar5`] with collision geometry: a pedestal around the base and thin
/// capsules along the links, so the arm can neither cross itself nor sweep
/// through its base.
pub fn planar5_pedestal() -> RobotModel {
    let base = planar5();
    let mut capsules = vec![Capsule {
        link: 0,
        a: Vector3::zeros(),
        b: Vector3::zeros(),
        radius: 0.3,
    }];
    for (i, j) in base.chain.joints().iter().enumerate() {
        capsules.push(Capsule {
            link: i + 1,
            a: Vector3::zeros(),
            b: j.offset,
            radius: 0.05,
        });
    }
    let chain = KinematicChain::new(
        base.chain.joints().to_vec(),
        capsules,
        Isometry3::identity(),
        Isometry3::identity(),
        true,
    )
    .expect("planar chain is valid");
    RobotModel::new("planar5-pedestal", chain, base.mode, None, base.seed_cycle, base.grid)
        .expect("built-in model is valid")
}

/// Three unit links, tool position only.
pub fn planar3() -> RobotModel {
    let b = 0.9;
    RobotModel::new(
        "planar3",
        planar_chain(3),
        TaskMode::Position,
        None,
        cycle(48, |s| vec![s, b, b]),
        Some(GridSpec {
            workspace: WorkspaceBox::new(vec![-3.0, -3.0], vec![3.0, 3.0]).expect("valid box"),
            resolution: vec![24, 24],
        }),
    )
    .expect("built-in model is valid")
}

/// Seven-joint spatial arm with alternating yaw and pitch joints and capsule
/// links, tool position only.
pub fn spatial7() -> RobotModel {
    let lens = [0.4, 0.4, 0.4, 0.4, 0.3, 0.3, 0.2];
    let mut joints = Vec::new();
    let mut capsules = vec![Capsule {
        link: 0,
        a: Vector3::new(0.0, 0.0, -0.2),
        b: Vector3::new(0.0, 0.0, 0.0),
        radius: 0.08,
    }];
    for (i, &l) in lens.iter().enumerate() {
        let offset = Vector3::new(0.0, 0.0, l);
        joints.push(if i % 2 == 0 {
            Joint::continuous(Vector3::z(), offset)
        } else {
            Joint::limited(Vector3::y(), offset, -2.6, 2.6)
        });
        capsules.push(Capsule {
            link: i + 1,
            a: Vector3::zeros(),
            b: offset,
            radius: 0.04,
        });
    }
    let chain = KinematicChain::new(joints, capsules, Isometry3::identity(), Isometry3::identity(), false)
        .expect("spatial chain is valid");
    let q0 = [0.0, 0.6, 0.0, 0.9, 0.0, 0.6, 0.0];
    let a = [0.45, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let c = [0.0, 0.25, 0.0, -0.25, 0.0, 0.0, 0.0];
    RobotModel::new(
        "spatial7",
        chain,
        TaskMode::Position,
        None,
        cycle(48, |s| (0..7).map(|j| q0[j] + a[j] * s.sin() + c[j] * s.cos()).collect()),
        Some(GridSpec {
            workspace: WorkspaceBox::new(vec![0.3, -0.9, 0.1], vec![1.7, 0.9, 1.5]).expect("valid box"),
            resolution: vec![8, 10, 8],
        }),
    )
    .expect("built-in model is valid")
}

pub fn builtin(name: &str) -> Option<RobotModel> {
    match name {
        "planar5" => Some(planar5()),
        "planar5-fixed" => Some(planar5_fixed()),
        "planar5-pedestal" => Some(planar5_pedestal()),
        "planar3" => Some(planar3()),
        "spatial7" => Some(spatial7()),
        _ => None,
    }
}
