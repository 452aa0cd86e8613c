//! Serial-chain kinematics.
//!
//! A chain is a sequence of revolute joints. Joint `i` rotates about `axis`
//! (expressed in the frame reached after joint `i - 1` and its offset), then a
//! fixed `offset` translates to the next joint. The tool pose is
//! `base * R(axis_0, q_0) * T(offset_0) * ... * end_effector`.

mod collision;
mod config;
mod task;

use nalgebra::{DMatrix, DVector, Isometry3, Point3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub use collision::{segment_distance, Capsule};
pub use config::{angle_diff, wrap_angle, Configuration};
pub use task::{planar_orientation, TaskMode, TaskPoint};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JointLimits {
    Continuous,
    Limited { lower: f64, upper: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub axis: Vector3<f64>,
    pub offset: Vector3<f64>,
    pub limits: JointLimits,
}

impl Joint {
    pub fn continuous(axis: Vector3<f64>, offset: Vector3<f64>) -> Self {
        Joint {
            axis,
            offset,
            limits: JointLimits::Continuous,
        }
    }

    pub fn limited(axis: Vector3<f64>, offset: Vector3<f64>, lower: f64, upper: f64) -> Self {
        Joint {
            axis,
            offset,
            limits: JointLimits::Limited { lower, upper },
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.limits, JointLimits::Continuous)
    }
}

/// Per-joint world frames (after the joint rotation) and the tool pose.
#[derive(Clone, Debug)]
pub struct ChainFrames {
    pub joints: Vec<Isometry3<f64>>,
    pub tool: Isometry3<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicChain {
    joints: Vec<Joint>,
    capsules: Vec<Capsule>,
    base: Isometry3<f64>,
    end_effector: Isometry3<f64>,
    planar: bool,
}

const AXIS_NORM_TOL: f64 = 1e-9;

impl KinematicChain {
    pub fn new(
        joints: Vec<Joint>,
        capsules: Vec<Capsule>,
        base: Isometry3<f64>,
        end_effector: Isometry3<f64>,
        planar: bool,
    ) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::invalid("chain must have at least one joint"));
        }
        for (i, j) in joints.iter().enumerate() {
            if (j.axis.norm() - 1.0).abs() > AXIS_NORM_TOL {
                return Err(Error::invalid(format!(
                    "joint {i}: axis norm {} is not 1",
                    j.axis.norm()
                )));
            }
            if let JointLimits::Limited { lower, upper } = j.limits {
                if !(lower < upper) {
                    return Err(Error::invalid(format!(
                        "joint {i}: lower limit {lower} must be below upper limit {upper}"
                    )));
                }
            }
            if !j.offset.iter().all(|v| v.is_finite()) {
                return Err(Error::invalid(format!("joint {i}: non-finite offset")));
            }
        }
        for (i, c) in capsules.iter().enumerate() {
            if c.link > joints.len() {
                return Err(Error::invalid(format!(
                    "capsule {i}: link {} out of range (chain has {} links)",
                    c.link,
                    joints.len() + 1
                )));
            }
            if !(c.radius >= 0.0) {
                return Err(Error::invalid(format!("capsule {i}: negative radius")));
            }
        }
        if planar {
            let z = Vector3::z();
            let keeps_z = |r: &UnitQuaternion<f64>| (r * z - z).norm() < 1e-9;
            if joints.iter().any(|j| (j.axis.z.abs() - 1.0).abs() > AXIS_NORM_TOL) {
                return Err(Error::invalid("planar chain requires every axis along z"));
            }
            if !keeps_z(&base.rotation) || !keeps_z(&end_effector.rotation) {
                return Err(Error::invalid(
                    "planar chain requires base and end-effector rotations about z",
                ));
            }
        }
        Ok(KinematicChain {
            joints,
            capsules,
            base,
            end_effector,
            planar,
        })
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn capsules(&self) -> &[Capsule] {
        &self.capsules
    }

    pub fn base(&self) -> &Isometry3<f64> {
        &self.base
    }

    pub fn end_effector(&self) -> &Isometry3<f64> {
        &self.end_effector
    }

    pub fn is_planar(&self) -> bool {
        self.planar
    }

    /// Number of task coordinates constrained in `mode`.
    pub fn task_dim(&self, mode: TaskMode) -> usize {
        match (self.planar, mode) {
            (true, TaskMode::Position) => 2,
            (true, TaskMode::FixedOrientation) => 3,
            (false, TaskMode::Position) => 3,
            (false, TaskMode::FixedOrientation) => 6,
        }
    }

    pub fn check_len(&self, q: &Configuration) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::invalid(format!(
                "configuration has {} values, chain has {} joints",
                q.len(),
                self.dof()
            )));
        }
        Ok(())
    }

    /// Length check plus limit and normalization invariants.
    pub fn validate(&self, q: &Configuration) -> Result<()> {
        self.check_len(q)?;
        for (i, (j, &v)) in self.joints.iter().zip(q.values()).enumerate() {
            if !v.is_finite() {
                return Err(Error::invalid(format!("joint {i}: non-finite value")));
            }
            match j.limits {
                JointLimits::Continuous => {
                    if !(-std::f64::consts::PI..std::f64::consts::PI).contains(&v) {
                        return Err(Error::invalid(format!(
                            "joint {i}: continuous value {v} not normalized"
                        )));
                    }
                }
                JointLimits::Limited { lower, upper } => {
                    if v < lower || v > upper {
                        return Err(Error::invalid(format!(
                            "joint {i}: value {v} outside [{lower}, {upper}]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Wraps continuous joints and clamps limited ones in place.
    pub fn normalize(&self, q: &mut Configuration) {
        for (j, v) in self.joints.iter().zip(q.values_mut()) {
            *v = match j.limits {
                JointLimits::Continuous => wrap_angle(*v),
                JointLimits::Limited { lower, upper } => v.clamp(lower, upper),
            };
        }
    }

    pub fn normalized(&self, mut q: Configuration) -> Configuration {
        self.normalize(&mut q);
        q
    }

    pub(crate) fn frames_unchecked(&self, q: &[f64]) -> ChainFrames {
        let mut t = self.base;
        let mut joints = Vec::with_capacity(self.joints.len());
        for (j, &v) in self.joints.iter().zip(q) {
            let rot = UnitQuaternion::from_scaled_axis(j.axis * v);
            t *= rot;
            joints.push(t);
            t.translation.vector += t.rotation * j.offset;
        }
        let tool = t * self.end_effector;
        ChainFrames { joints, tool }
    }

    pub fn frames(&self, q: &Configuration) -> Result<ChainFrames> {
        self.check_len(q)?;
        Ok(self.frames_unchecked(q.values()))
    }

    pub(crate) fn tool_pose_unchecked(&self, q: &[f64]) -> Isometry3<f64> {
        let mut t = self.base;
        for (j, &v) in self.joints.iter().zip(q) {
            t *= UnitQuaternion::from_scaled_axis(j.axis * v);
            t.translation.vector += t.rotation * j.offset;
        }
        t * self.end_effector
    }

    pub fn tool_pose(&self, q: &Configuration) -> Result<Isometry3<f64>> {
        self.check_len(q)?;
        Ok(self.tool_pose_unchecked(q.values()))
    }

    /// Tool point with its full orientation. Planar chains report the
    /// orientation as a rotation about the plane normal.
    pub fn forward_kinematics(&self, q: &Configuration) -> Result<TaskPoint> {
        let pose = self.tool_pose(q)?;
        Ok(self.pose_to_point(&pose))
    }

    fn pose_to_point(&self, pose: &Isometry3<f64>) -> TaskPoint {
        let orientation = if self.planar {
            planar_orientation(pose.rotation.scaled_axis().z)
        } else {
            pose.rotation
        };
        TaskPoint::with_orientation(pose.translation.vector, orientation)
    }

    /// Tool point restricted to the coordinates of `mode`.
    pub fn task_point(&self, q: &Configuration, mode: TaskMode) -> Result<TaskPoint> {
        Ok(self.forward_kinematics(q)?.restricted(mode, None))
    }

    pub(crate) fn task_point_unchecked(&self, q: &[f64], mode: TaskMode) -> TaskPoint {
        self.point_from_pose(&self.tool_pose_unchecked(q), mode)
    }

    pub(crate) fn point_from_pose(&self, pose: &Isometry3<f64>, mode: TaskMode) -> TaskPoint {
        match mode {
            TaskMode::Position => TaskPoint::position(pose.translation.vector),
            TaskMode::FixedOrientation => self.pose_to_point(pose),
        }
    }

    /// Geometric Jacobian over the active task coordinates of `mode`.
    ///
    /// Rows are `x, y` (planar) or `x, y, z` (spatial), followed in
    /// fixed-orientation mode by the angular rate about the plane normal
    /// (planar) or the full angular velocity (spatial).
    pub fn jacobian(&self, q: &Configuration, mode: TaskMode) -> Result<DMatrix<f64>> {
        self.check_len(q)?;
        Ok(self.jacobian_unchecked(q.values(), mode))
    }

    pub(crate) fn jacobian_unchecked(&self, q: &[f64], mode: TaskMode) -> DMatrix<f64> {
        let frames = self.frames_unchecked(q);
        self.jacobian_from_frames(&frames, mode)
    }

    pub(crate) fn jacobian_from_frames(&self, frames: &ChainFrames, mode: TaskMode) -> DMatrix<f64> {
        let rows = self.task_dim(mode);
        let tip = frames.tool.translation.vector;
        let mut jac = DMatrix::zeros(rows, self.dof());
        for (i, (f, j)) in frames.joints.iter().zip(&self.joints).enumerate() {
            let axis = f.rotation * j.axis;
            let lin = axis.cross(&(tip - f.translation.vector));
            if self.planar {
                jac[(0, i)] = lin.x;
                jac[(1, i)] = lin.y;
                if mode == TaskMode::FixedOrientation {
                    jac[(2, i)] = axis.z;
                }
            } else {
                jac.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
                if mode == TaskMode::FixedOrientation {
                    jac.fixed_view_mut::<3, 1>(3, i).copy_from(&axis);
                }
            }
        }
        jac
    }

    /// Task error `target - current` in the row layout of [`jacobian`].
    /// Orientation error is the scaled rotation axis taking the current tool
    /// orientation onto the target one.
    ///
    /// [`jacobian`]: KinematicChain::jacobian
    pub fn task_residual(&self, current: &Isometry3<f64>, target: &TaskPoint) -> DVector<f64> {
        let mode = target.mode();
        let dt = target.translation - current.translation.vector;
        let mut r = DVector::zeros(self.task_dim(mode));
        if self.planar {
            r[0] = dt.x;
            r[1] = dt.y;
        } else {
            r.fixed_rows_mut::<3>(0).copy_from(&dt);
        }
        if let Some(o) = &target.orientation {
            let err = (o * current.rotation.inverse()).scaled_axis();
            if self.planar {
                r[2] = err.z;
            } else {
                r.fixed_rows_mut::<3>(3).copy_from(&err);
            }
        }
        r
    }

    /// Wraparound-aware Euclidean joint distance.
    pub fn config_distance(&self, a: &Configuration, b: &Configuration) -> Result<f64> {
        self.check_len(a)?;
        self.check_len(b)?;
        Ok(self.distance_unchecked(a.values(), b.values()))
    }

    pub(crate) fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        self.joints
            .iter()
            .zip(a.iter().zip(b))
            .map(|(j, (&x, &y))| {
                let d = if j.is_continuous() { angle_diff(x, y) } else { y - x };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Per-joint midpoint; continuous joints go halfway along the shorter arc.
    pub fn bisect_q(&self, a: &Configuration, b: &Configuration) -> Result<Configuration> {
        self.check_len(a)?;
        self.check_len(b)?;
        Ok(self.bisect_unchecked(a.values(), b.values()))
    }

    pub(crate) fn bisect_unchecked(&self, a: &[f64], b: &[f64]) -> Configuration {
        let v = self
            .joints
            .iter()
            .zip(a.iter().zip(b))
            .map(|(j, (&x, &y))| {
                if j.is_continuous() {
                    wrap_angle(x + 0.5 * angle_diff(x, y))
                } else {
                    0.5 * (x + y)
                }
            })
            .collect();
        Configuration::new(v)
    }

    /// Weighted mean of configurations: arithmetic for limited joints,
    /// circular (phasor sum) for continuous joints.
    pub fn weighted_average(&self, qs: &[Configuration], ws: &[f64]) -> Result<Configuration> {
        if qs.is_empty() {
            return Err(Error::invalid("weighted average of zero configurations"));
        }
        if qs.len() != ws.len() {
            return Err(Error::invalid(format!(
                "{} configurations but {} weights",
                qs.len(),
                ws.len()
            )));
        }
        if ws.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        let total: f64 = ws.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
        }
        for q in qs {
            self.check_len(q)?;
        }
        Ok(self.weighted_average_unchecked(qs, ws))
    }

    pub(crate) fn weighted_average_unchecked(&self, qs: &[Configuration], ws: &[f64]) -> Configuration {
        // first maximum wins ties so the fallback is deterministic
        let heaviest = ws
            .iter()
            .enumerate()
            .fold(0, |best, (i, &w)| if w > ws[best] { i } else { best });
        let v = self
            .joints
            .iter()
            .enumerate()
            .map(|(k, j)| {
                if j.is_continuous() {
                    let (s, c) = qs
                        .iter()
                        .zip(ws)
                        .fold((0.0, 0.0), |(s, c), (q, &w)| (s + w * q[k].sin(), c + w * q[k].cos()));
                    if s.hypot(c) < 1e-9 {
                        qs[heaviest][k]
                    } else {
                        wrap_angle(s.atan2(c))
                    }
                } else {
                    qs.iter().zip(ws).map(|(q, &w)| w * q[k]).sum()
                }
            })
            .collect();
        Configuration::new(v)
    }

    /// True iff no pair of non-adjacent link capsules overlaps.
    pub fn self_collision_free(&self, q: &Configuration) -> Result<bool> {
        self.check_len(q)?;
        Ok(self.collision_free_unchecked(q.values()))
    }

    pub(crate) fn collision_free_unchecked(&self, q: &[f64]) -> bool {
        if self.capsules.len() < 2 || self.capsules.iter().all(|c| c.radius == 0.0) {
            return true;
        }
        let frames = self.frames_unchecked(q);
        let link_frame = |link: usize| if link == 0 { self.base } else { frames.joints[link - 1] };
        let world: Vec<(usize, Point3<f64>, Point3<f64>, f64)> = self
            .capsules
            .iter()
            .map(|c| {
                let f = link_frame(c.link);
                (c.link, f * Point3::from(c.a), f * Point3::from(c.b), c.radius)
            })
            .collect();
        for (i, ca) in world.iter().enumerate() {
            for cb in &world[i + 1..] {
                if ca.0.abs_diff(cb.0) <= 1 {
                    continue;
                }
                if segment_distance(&ca.1, &ca.2, &cb.1, &cb.2) < ca.3 + cb.3 {
                    return false;
                }
            }
        }
        true
    }

    /// Lengths of the joint offsets followed by the tool offset.
    pub(crate) fn link_lengths(&self) -> Vec<f64> {
        let mut l: Vec<f64> = self.joints.iter().map(|j| j.offset.norm()).collect();
        l.push(self.end_effector.translation.vector.norm());
        l
    }
}
