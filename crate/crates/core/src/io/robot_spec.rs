use std::path::Path;

use nalgebra::{Isometry3, Quaternion, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chain::{Capsule, Configuration, Joint, JointLimits, KinematicChain, TaskMode};
use crate::error::{Error, Result};
use crate::robots::{GridSpec, RobotModel};
use crate::taskgraph::WorkspaceBox;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    name: String,
    #[serde(default)]
    planar: bool,
    mode: TaskMode,
    /// Fixed tool orientation as a unit quaternion `[w, x, y, z]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orientation: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<PoseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end_effector: Option<PoseSpec>,
    joints: Vec<JointSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    capsules: Vec<CapsuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridFileSpec>,
    seed_cycle: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseSpec {
    #[serde(default)]
    translation: [f64; 3],
    #[serde(default = "identity_quaternion")]
    rotation: [f64; 4],
}

fn identity_quaternion() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointSpec {
    axis: [f64; 3],
    offset: [f64; 3],
    /// `[lower, upper]`; absent for a continuous joint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    limits: Option<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapsuleSpec {
    link: usize,
    a: [f64; 3],
    b: [f64; 3],
    radius: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFileSpec {
    min: Vec<f64>,
    max: Vec<f64>,
    resolution: Vec<usize>,
}

fn unit_quaternion(q: [f64; 4], what: &str) -> Result<UnitQuaternion<f64>> {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    if (raw.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("{what}: quaternion norm {} is not 1", raw.norm())));
    }
    Ok(UnitQuaternion::new_unchecked(raw))
}

fn quaternion_array(q: &UnitQuaternion<f64>) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

fn pose(p: Option<&PoseSpec>, what: &str) -> Result<Isometry3<f64>> {
    match p {
        None => Ok(Isometry3::identity()),
        Some(p) => Ok(Isometry3::from_parts(
            Translation3::from(Vector3::from(p.translation)),
            unit_quaternion(p.rotation, what)?,
        )),
    }
}

fn pose_spec(p: &Isometry3<f64>) -> Option<PoseSpec> {
    (*p != Isometry3::identity()).then(|| PoseSpec {
        translation: p.translation.vector.into(),
        rotation: quaternion_array(&p.rotation),
    })
}

/// Parses a robot spec from TOML text.
pub fn parse_robot_spec(text: &str) -> Result<RobotModel> {
    let spec: SpecFile = toml::from_str(text).map_err(|e| Error::parse("robot spec", e))?;
    let joints = spec
        .joints
        .iter()
        .map(|j| Joint {
            axis: Vector3::from(j.axis),
            offset: Vector3::from(j.offset),
            limits: match j.limits {
                None => JointLimits::Continuous,
                Some([lower, upper]) => JointLimits::Limited { lower, upper },
            },
        })
        .collect();
    let capsules = spec
        .capsules
        .iter()
        .map(|c| Capsule {
            link: c.link,
            a: Vector3::from(c.a),
            b: Vector3::from(c.b),
            radius: c.radius,
        })
        .collect();
    let chain = KinematicChain::new(
        joints,
        capsules,
        pose(spec.base.as_ref(), "base")?,
        pose(spec.end_effector.as_ref(), "end_effector")?,
        spec.planar,
    )?;
    let orientation = spec
        .orientation
        .map(|q| unit_quaternion(q, "orientation"))
        .transpose()?;
    let grid = spec
        .grid
        .map(|g| -> Result<GridSpec> {
            Ok(GridSpec {
                workspace: WorkspaceBox::new(g.min, g.max)?,
                resolution: g.resolution,
            })
        })
        .transpose()?;
    let cycle = spec.seed_cycle.into_iter().map(Configuration::new).collect();
    RobotModel::new(spec.name, chain, spec.mode, orientation, cycle, grid)
}

pub fn load_robot_spec(path: impl AsRef<Path>) -> Result<RobotModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_robot_spec(&text).map_err(|e| match e {
        Error::Parse { msg, .. } => Error::parse(path.display().to_string(), msg),
        other => other,
    })
}

/// TOML text that parses back to `model`.
pub fn robot_spec_to_toml(model: &RobotModel) -> String {
    let chain = &model.chain;
    let spec = SpecFile {
        name: model.name.clone(),
        planar: chain.is_planar(),
        mode: model.mode,
        orientation: model.orientation.as_ref().map(quaternion_array),
        base: pose_spec(chain.base()),
        end_effector: pose_spec(chain.end_effector()),
        joints: chain
            .joints()
            .iter()
            .map(|j| JointSpec {
                axis: j.axis.into(),
                offset: j.offset.into(),
                limits: match j.limits {
                    JointLimits::Continuous => None,
                    JointLimits::Limited { lower, upper } => Some([lower, upper]),
                },
            })
            .collect(),
        capsules: chain
            .capsules()
            .iter()
            .map(|c| CapsuleSpec {
                link: c.link,
                a: c.a.into(),
                b: c.b.into(),
                radius: c.radius,
            })
            .collect(),
        grid: model.grid.as_ref().map(|g| GridFileSpec {
            min: g.workspace.min.clone(),
            max: g.workspace.max.clone(),
            resolution: g.resolution.clone(),
        }),
        seed_cycle: model.seed_cycle.iter().map(|q| q.values().to_vec()).collect(),
    };
    toml::to_string(&spec).expect("robot spec serializes")
}

/// Hash of everything a roadmap depends on: chain geometry, task mode and
/// fixed orientation.
pub fn robot_hash(model: &RobotModel) -> String {
    let mut h = Sha256::new();
    let chain = serde_json::to_string(&model.chain).expect("chain serializes");
    h.update(chain.as_bytes());
    h.update(serde_json::to_string(&model.mode).expect("mode serializes").as_bytes());
    if let Some(o) = &model.orientation {
        for c in quaternion_array(o) {
            h.update(c.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}
