use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// A vector of joint angles in radians, one per joint of the chain it
/// belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(Vec<f64>);

impl Configuration {
    pub fn new(values: Vec<f64>) -> Self {
        Configuration(values)
    }

    pub fn zeros(n: usize) -> Self {
        Configuration(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for Configuration {
    fn from(v: Vec<f64>) -> Self {
        Configuration(v)
    }
}

impl std::ops::Index<usize> for Configuration {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a - 2.0 * PI * ((a + PI) / (2.0 * PI)).floor();
    // floor rounding can leave w == pi for inputs just below an odd multiple
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Signed shortest angular difference `to - from`, in `[-pi, pi)`.
pub fn angle_diff(from: f64, to: f64) -> f64 {
    wrap_angle(to - from)
}
