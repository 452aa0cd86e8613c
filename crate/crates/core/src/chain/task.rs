use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which task coordinates a [`TaskPoint`] constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskMode {
    Position,
    FixedOrientation,
}

/// A point of the task space: tool translation plus, in fixed-orientation
/// mode, the tool orientation.
///
/// Planar chains keep the translation in the plane of the base frame, so the
/// `z` component is constant across all points of one task space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskPoint {
    pub translation: Vector3<f64>,
    pub orientation: Option<UnitQuaternion<f64>>,
}

impl TaskPoint {
    pub fn position(translation: Vector3<f64>) -> Self {
        TaskPoint {
            translation,
            orientation: None,
        }
    }

    pub fn planar(x: f64, y: f64) -> Self {
        Self::position(Vector3::new(x, y, 0.0))
    }

    pub fn with_orientation(translation: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        TaskPoint {
            translation,
            orientation: Some(orientation),
        }
    }

    /// Builds a point from a raw `(w, x, y, z)` quaternion, which must already
    /// be unit length within 1e-9.
    pub fn from_raw_quaternion(translation: Vector3<f64>, wxyz: [f64; 4]) -> Result<Self> {
        let q = Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
        if (q.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "orientation quaternion has norm {}, expected 1",
                q.norm()
            )));
        }
        Ok(Self::with_orientation(
            translation,
            UnitQuaternion::new_unchecked(q),
        ))
    }

    pub fn mode(&self) -> TaskMode {
        match self.orientation {
            Some(_) => TaskMode::FixedOrientation,
            None => TaskMode::Position,
        }
    }

    /// Same point restricted to `mode`: drops the orientation for position
    /// mode, or substitutes `orientation` for fixed-orientation mode.
    pub fn restricted(&self, mode: TaskMode, orientation: Option<&UnitQuaternion<f64>>) -> Self {
        match mode {
            TaskMode::Position => Self::position(self.translation),
            TaskMode::FixedOrientation => TaskPoint {
                translation: self.translation,
                orientation: orientation.copied().or(self.orientation),
            },
        }
    }
}

/// Rotation about the plane normal, as used for planar tool orientations.
pub fn planar_orientation(angle: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vector3::z_axis(), angle)
}
