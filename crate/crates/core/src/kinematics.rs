//! Forward kinematics of the 3-link arm.
//!
//! Joint 1 rotates about the world +z axis. Joints 2 and 3 tilt their links
//! away from +z inside the vertical plane selected by joint 1. The base sits
//! at the world origin and the first link runs straight up to the shoulder,
//! so every height below includes the `L1` offset.

use std::ops::Index;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cartesian position in world coordinates.
pub type Point3 = Vector3<f64>;

/// Number of revolute joints in the chain.
pub const JOINTS: usize = 3;

/// Joint angles `(t1, t2, t3)` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointConfig(pub [f64; JOINTS]);

impl JointConfig {
    pub const fn new(t1: f64, t2: f64, t3: f64) -> Self {
        Self([t1, t2, t3])
    }

    pub fn from_degrees(deg: [f64; JOINTS]) -> Self {
        Self(deg.map(f64::to_radians))
    }

    pub fn to_degrees(self) -> [f64; JOINTS] {
        self.0.map(f64::to_degrees)
    }

    pub fn angles(&self) -> &[f64; JOINTS] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }
}

impl Index<usize> for JointConfig {
    type Output = f64;

    fn index(&self, joint: usize) -> &f64 {
        &self.0[joint]
    }
}

impl From<[f64; JOINTS]> for JointConfig {
    fn from(angles: [f64; JOINTS]) -> Self {
        Self(angles)
    }
}

/// Closed joint interval in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimit {
    pub min: f64,
    pub max: f64,
}

impl JointLimit {
    pub fn from_degrees(min: f64, max: f64) -> Self {
        Self {
            min: min.to_radians(),
            max: max.to_radians(),
        }
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.min <= angle && angle <= self.max
    }
}

/// Geometric and inertial constants of the arm.
///
/// Masses are lumped at the distal joint of each link. Fields are public so
/// that idealised models (for example `L1 = 0`) can be built directly;
/// [`ArmModel::validate`] enforces the invariants required for planning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub link_lengths: [f64; JOINTS],
    pub masses: [f64; JOINTS],
    pub inertias: [f64; JOINTS],
    pub gravity: f64,
    pub joint_limits: [JointLimit; JOINTS],
    /// Largest joint change allowed in one unit-time step, radians.
    pub max_step: f64,
}

impl Default for ArmModel {
    fn default() -> Self {
        Self::new(
            DEFAULT_LINK_LENGTHS,
            DEFAULT_MASSES,
            None,
            1.0,
            default_joint_limits(),
            DEFAULT_MAX_STEP_DEG.to_radians(),
        )
        .expect("default arm is valid")
    }
}

pub const DEFAULT_LINK_LENGTHS: [f64; JOINTS] = [1.0, 1.0, 1.0];
pub const DEFAULT_MASSES: [f64; JOINTS] = [0.1, 0.1, 0.1];
pub const DEFAULT_MAX_STEP_DEG: f64 = 20.0;
/// Joint bounds in degrees: ±160, ±110, ±135.
pub const DEFAULT_JOINT_LIMITS_DEG: [[f64; 2]; JOINTS] =
    [[-160.0, 160.0], [-110.0, 110.0], [-135.0, 135.0]];

pub fn default_joint_limits() -> [JointLimit; JOINTS] {
    DEFAULT_JOINT_LIMITS_DEG.map(|[lo, hi]| JointLimit::from_degrees(lo, hi))
}

impl ArmModel {
    /// Builds and validates an arm. Missing inertias default to `m_k * L_k^2`.
    pub fn new(
        link_lengths: [f64; JOINTS],
        masses: [f64; JOINTS],
        inertias: Option<[f64; JOINTS]>,
        gravity: f64,
        joint_limits: [JointLimit; JOINTS],
        max_step: f64,
    ) -> Result<Self> {
        let inertias = inertias.unwrap_or_else(|| default_inertias(&link_lengths, &masses));
        let arm = Self {
            link_lengths,
            masses,
            inertias,
            gravity,
            joint_limits,
            max_step,
        };
        arm.validate()?;
        Ok(arm)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.link_lengths) || self.link_lengths.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidArm(format!(
                "link lengths must be finite and > 0, got {:?}",
                self.link_lengths
            )));
        }
        if !finite(&self.masses) || self.masses.iter().any(|&m| m < 0.0) {
            return Err(Error::InvalidArm(format!(
                "masses must be finite and >= 0, got {:?}",
                self.masses
            )));
        }
        if !finite(&self.inertias) || self.inertias.iter().any(|&i| i < 0.0) {
            return Err(Error::InvalidArm(format!(
                "inertias must be finite and >= 0, got {:?}",
                self.inertias
            )));
        }
        if !self.gravity.is_finite() {
            return Err(Error::InvalidArm("gravity must be finite".into()));
        }
        if !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(Error::InvalidArm(format!(
                "max step must be finite and > 0, got {}",
                self.max_step
            )));
        }
        for (k, lim) in self.joint_limits.iter().enumerate() {
            if !(lim.min.is_finite() && lim.max.is_finite() && lim.min < lim.max) {
                return Err(Error::InvalidArm(format!(
                    "joint {} limit requires min < max, got [{}, {}]",
                    k + 1,
                    lim.min,
                    lim.max
                )));
            }
        }
        Ok(())
    }

    pub fn within_limits(&self, q: &JointConfig) -> bool {
        self.joint_limits
            .iter()
            .zip(q.0.iter())
            .all(|(lim, &a)| lim.contains(a))
    }
}

pub fn default_inertias(link_lengths: &[f64; JOINTS], masses: &[f64; JOINTS]) -> [f64; JOINTS] {
    std::array::from_fn(|k| masses[k] * link_lengths[k] * link_lengths[k])
}

/// Base, shoulder, elbow and end-effector positions.
///
/// Consecutive pairs are the three collidable segments.
pub fn joint_points(arm: &ArmModel, q: &JointConfig) -> [Point3; 4] {
    let [l1, l2, l3] = arm.link_lengths;
    let [t1, t2, t3] = q.0;
    let (s1, c1) = t1.sin_cos();
    let (s2, c2) = t2.sin_cos();
    let (s23, c23) = (t2 + t3).sin_cos();

    let base = Point3::zeros();
    let shoulder = Point3::new(0.0, 0.0, l1);
    let elbow = shoulder + Point3::new(s1 * l2 * s2, c1 * l2 * s2, l2 * c2);
    let reach = l2 * s2 + l3 * s23;
    let tip = Point3::new(s1 * reach, c1 * reach, l1 + l2 * c2 + l3 * c23);
    [base, shoulder, elbow, tip]
}

/// Position of the end effector (treated as a point).
pub fn end_effector(arm: &ArmModel, q: &JointConfig) -> Point3 {
    joint_points(arm, q)[3]
}

/// Unit-time finite difference `|next - prev|` per joint.
pub fn angular_velocity(prev: &JointConfig, next: &JointConfig) -> [f64; JOINTS] {
    std::array::from_fn(|k| (next.0[k] - prev.0[k]).abs())
}
