//! Mechanical energy of the arm and the differential energy cost.
//!
//! Each link carries a point mass at its distal joint. Potential energy is
//! `sum m_k g z_k`; kinetic energy is `sum 1/2 I_k w_k^2` with `w` the
//! unit-step joint difference.

use crate::kinematics::{angular_velocity, joint_points, ArmModel, JointConfig, JOINTS};

/// Energy quantities for one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyTerms {
    pub potential: f64,
    pub kinetic: f64,
    pub delta_potential: f64,
}

impl EnergyTerms {
    pub fn between(arm: &ArmModel, prev: &JointConfig, next: &JointConfig) -> Self {
        let potential = potential_energy(arm, next);
        Self {
            potential,
            kinetic: kinetic_energy(arm, &angular_velocity(prev, next)),
            delta_potential: (potential - potential_energy(arm, prev)).abs(),
        }
    }

    /// The energy contribution to the step cost, `|dP| + K`.
    pub fn cost(&self) -> f64 {
        self.delta_potential + self.kinetic
    }
}

pub fn potential_energy(arm: &ArmModel, q: &JointConfig) -> f64 {
    let pts = joint_points(arm, q);
    (0..JOINTS)
        .map(|k| arm.masses[k] * arm.gravity * pts[k + 1].z)
        .sum()
}

pub fn kinetic_energy(arm: &ArmModel, omega: &[f64; JOINTS]) -> f64 {
    (0..JOINTS)
        .map(|k| 0.5 * arm.inertias[k] * omega[k] * omega[k])
        .sum()
}

/// `|P(next) - P(prev)| + K(|next - prev|)`.
pub fn energy_cost(arm: &ArmModel, prev: &JointConfig, next: &JointConfig) -> f64 {
    EnergyTerms::between(arm, prev, next).cost()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::default_inertias;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn unit_arm(l1: f64, masses: [f64; 3]) -> ArmModel {
        let link_lengths = [l1, 1.0, 1.0];
        ArmModel {
            link_lengths,
            masses,
            inertias: default_inertias(&link_lengths, &masses),
            gravity: 1.0,
            ..ArmModel::default()
        }
    }

    #[test]
    fn potential_of_vertical_arm() {
        let arm = unit_arm(0.0, [1.0, 1.0, 1.0]);
        assert_eq!(potential_energy(&arm, &JointConfig::default()), 3.0);
    }

    #[test]
    fn zero_gravity_has_no_potential() {
        let mut arm = unit_arm(1.0, [1.0, 2.0, 3.0]);
        arm.gravity = 0.0;
        assert_eq!(
            potential_energy(&arm, &JointConfig::new(0.4, -1.0, 2.0)),
            0.0
        );
    }

    #[test]
    fn kinetic_cases() {
        let mut arm = unit_arm(1.0, [1.0; 3]);
        arm.inertias = [1.0; 3];
        assert_eq!(kinetic_energy(&arm, &[0.0; 3]), 0.0);
        assert_eq!(kinetic_energy(&arm, &[1.0, 2.0, 3.0]), 7.0);
        let w = [0.3, 0.1, 0.7];
        assert_eq!(
            kinetic_energy(&arm, &w.map(|x| 2.0 * x)),
            4.0 * kinetic_energy(&arm, &w)
        );
    }

    #[test]
    fn swing_to_horizontal() {
        // Frozen from a standalone evaluation: dP = 3, K = pi^2 / 8.
        let arm = unit_arm(0.0, [0.0, 1.0, 1.0]);
        let cost = energy_cost(
            &arm,
            &JointConfig::default(),
            &JointConfig::new(0.0, FRAC_PI_2, 0.0),
        );
        assert!((cost - 4.23370055013617).abs() < 1e-12);
    }

    #[test]
    fn no_motion_no_cost() {
        let arm = unit_arm(1.0, [1.0; 3]);
        let q = JointConfig::new(0.2, 0.5, -0.3);
        assert_eq!(energy_cost(&arm, &q, &q), 0.0);
    }

    fn angle() -> impl Strategy<Value = f64> {
        -3.0f64..3.0
    }

    fn config() -> impl Strategy<Value = JointConfig> {
        (angle(), angle(), angle()).prop_map(|(a, b, c)| JointConfig::new(a, b, c))
    }

    proptest! {
        #[test]
        fn energy_cost_symmetric_and_nonnegative(a in config(), b in config()) {
            let arm = unit_arm(1.0, [0.3, 0.5, 0.7]);
            let ab = energy_cost(&arm, &a, &b);
            prop_assert_eq!(ab, energy_cost(&arm, &b, &a));
            prop_assert!(ab >= 0.0);
            if a != b {
                prop_assert!(ab > 0.0);
            }
        }

        #[test]
        fn potential_ignores_base_rotation(q in config(), d in angle()) {
            let arm = unit_arm(1.0, [0.3, 0.5, 0.7]);
            let turned = JointConfig::new(q[0] + d, q[1], q[2]);
            prop_assert_eq!(potential_energy(&arm, &q), potential_energy(&arm, &turned));
        }

        #[test]
        fn delta_potential_triangle(a in config(), b in config(), c in config()) {
            let arm = unit_arm(1.0, [0.3, 0.5, 0.7]);
            let p = |q: &JointConfig| potential_energy(&arm, q);
            // exact up to the rounding of the three subtractions
            let slack = 4.0 * f64::EPSILON * (p(&a).abs() + p(&b).abs() + p(&c).abs());
            prop_assert!((p(&a) - p(&c)).abs() <= (p(&a) - p(&b)).abs() + (p(&b) - p(&c)).abs() + slack);
        }

        #[test]
        fn kinetic_monotone(w in prop::array::uniform3(0.0f64..2.0), k in 0usize..3, bump in 0.0f64..1.0) {
            let arm = unit_arm(1.0, [0.3, 0.5, 0.7]);
            let mut w2 = w;
            w2[k] += bump;
            prop_assert!(kinetic_energy(&arm, &w2) >= kinetic_energy(&arm, &w));
        }
    }
}
