//! Moving spherical obstacles and the segment clearance penalty.
//!
//! Each arm segment `AB` is tested against each obstacle center `C`. The
//! perpendicular distance `d = |AB x AC| / |AB|` only counts when the foot
//! of the perpendicular falls inside the segment, which is detected by
//! checking that the two Pythagorean legs `AD` and `BD` add up to `|AB|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{joint_points, ArmModel, JointConfig, Point3, JOINTS};

/// Relative tolerance of the `AD + BD = |AB|` test.
pub const WITHIN_SEGMENT_TOL: f64 = 1e-9;
/// Segments shorter than this are rejected.
pub const MIN_SEGMENT_LENGTH: f64 = 1e-12;

/// A sphere moving with constant velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub initial_center: Point3,
    pub radius: f64,
    pub velocity: Point3,
}

impl Obstacle {
    pub fn new(initial_center: Point3, radius: f64, velocity: Point3) -> Result<Self> {
        let obs = Self {
            initial_center,
            radius,
            velocity,
        };
        obs.validate()?;
        Ok(obs)
    }

    /// Sphere circumscribing an axis-aligned cube of the given edge.
    pub fn from_cube(center: Point3, edge: f64, velocity: Point3) -> Result<Self> {
        if !(edge.is_finite() && edge > 0.0) {
            return Err(Error::field(
                "edge",
                format!("cube edge must be > 0, got {edge}"),
            ));
        }
        Self::new(center, circumsphere_radius_of_cube(edge), velocity)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::field(
                "radius",
                format!("must be > 0, got {}", self.radius),
            ));
        }
        let finite = |p: &Point3| p.iter().all(|x| x.is_finite());
        if !finite(&self.initial_center) {
            return Err(Error::field("center", "components must be finite"));
        }
        if !finite(&self.velocity) {
            return Err(Error::field("velocity", "components must be finite"));
        }
        Ok(())
    }

    /// Center after `t` unit-time steps: `C0 + t V`.
    pub fn center_at(&self, t: u32) -> Point3 {
        obstacle_center_at(self, t)
    }
}

pub fn obstacle_center_at(obs: &Obstacle, t: u32) -> Point3 {
    obs.initial_center + obs.velocity * f64::from(t)
}

/// `(sqrt(3) / 2) s`.
pub fn circumsphere_radius_of_cube(edge: f64) -> f64 {
    0.5 * 3f64.sqrt() * edge
}

/// Geometry of one point against one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentClearance {
    /// Distance from the point to the infinite line through the segment.
    pub d: f64,
    /// `AD`, distance from `A` to the perpendicular foot.
    pub leg_a: f64,
    /// `BD`, distance from `B` to the perpendicular foot.
    pub leg_b: f64,
    /// Foot lies on the closed segment.
    pub within: bool,
    /// `min(|AC|, |BC|)`.
    pub endpoint_distance: f64,
}

impl SegmentClearance {
    /// Closest distance from the point to the closed segment.
    pub fn segment_distance(&self) -> f64 {
        if self.within {
            self.d
        } else {
            self.endpoint_distance
        }
    }
}

pub fn segment_clearance(a: &Point3, b: &Point3, c: &Point3) -> Result<SegmentClearance> {
    let ab = b - a;
    let len = ab.norm();
    if !(len > MIN_SEGMENT_LENGTH) {
        return Err(Error::DegenerateSegment { length: len });
    }
    let ac = c - a;
    let bc = c - b;
    let d = ab.cross(&ac).norm() / len;
    let d2 = d * d;
    let leg_a = (ac.norm_squared() - d2).max(0.0).sqrt();
    let leg_b = (bc.norm_squared() - d2).max(0.0).sqrt();
    let within = (leg_a + leg_b - len).abs() <= WITHIN_SEGMENT_TOL * len;
    Ok(SegmentClearance {
        d,
        leg_a,
        leg_b,
        within,
        endpoint_distance: ac.norm().min(bc.norm()),
    })
}

/// How non-threatening segment/obstacle pairs contribute to the penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AvoidanceMode {
    /// Safe pairs add nothing.
    #[default]
    ZeroWhenSafe,
    /// Safe pairs add their perpendicular distance `d`.
    PaperLiteral,
}

/// One (segment, obstacle) measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairClearance {
    pub segment: usize,
    pub obstacle: usize,
    pub geometry: SegmentClearance,
    pub radius: f64,
    pub threat: bool,
}

impl PairClearance {
    /// Surface-to-segment gap (negative when the sphere overlaps the segment).
    pub fn surface_gap(&self) -> f64 {
        self.geometry.segment_distance() - self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClearanceReport {
    pub pairs: Vec<PairClearance>,
    pub penalty: f64,
    pub threat: bool,
}

impl ClearanceReport {
    /// Smallest surface gap per obstacle; `n_obstacles` entries.
    pub fn min_gap_per_obstacle(&self, n_obstacles: usize) -> Vec<f64> {
        let mut gaps = vec![f64::INFINITY; n_obstacles];
        for p in &self.pairs {
            gaps[p.obstacle] = gaps[p.obstacle].min(p.surface_gap());
        }
        gaps
    }

    pub fn min_gap(&self) -> f64 {
        self.pairs
            .iter()
            .map(PairClearance::surface_gap)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Penalty parameters shared by every evaluation of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvoidanceParams<'a> {
    pub thresholds: &'a [f64; JOINTS],
    pub n_f: f64,
    pub mode: AvoidanceMode,
}

/// Sums `n_f + d` over every threatening pair at time `t`.
///
/// A pair is a threat when `d < Th_i + R_j` and the perpendicular foot lies
/// on the segment.
pub fn avoidance_penalty(
    arm: &ArmModel,
    q: &JointConfig,
    obstacles: &[Obstacle],
    t: u32,
    params: AvoidanceParams<'_>,
) -> Result<ClearanceReport> {
    let mut report = ClearanceReport {
        pairs: Vec::with_capacity(JOINTS * obstacles.len()),
        ..Default::default()
    };
    if obstacles.is_empty() {
        return Ok(report);
    }
    let pts = joint_points(arm, q);
    for (j, obs) in obstacles.iter().enumerate() {
        let center = obs.center_at(t);
        for i in 0..JOINTS {
            let geometry = segment_clearance(&pts[i], &pts[i + 1], &center)?;
            let threat = geometry.within && geometry.d < params.thresholds[i] + obs.radius;
            if threat {
                report.penalty += params.n_f + geometry.d;
                report.threat = true;
            } else if params.mode == AvoidanceMode::PaperLiteral {
                report.penalty += geometry.d;
            }
            report.pairs.push(PairClearance {
                segment: i,
                obstacle: j,
                geometry,
                radius: obs.radius,
                threat,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn static_and_moving_centers() {
        let fixed = Obstacle::new(p(1.0, 0.0, 0.0), 0.5, Point3::zeros()).unwrap();
        for t in [0, 1, 17] {
            assert_eq!(fixed.center_at(t), p(1.0, 0.0, 0.0));
        }
        let moving = Obstacle::new(p(1.0, 0.0, 0.0), 0.5, p(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(moving.center_at(2), p(1.0, 2.0, 0.0));

        let drift = Obstacle::new(p(0.0, 0.0, 0.0), 0.5, p(0.25, -0.5, 2.0)).unwrap();
        for t in 0..100 {
            assert_eq!(drift.center_at(t + 1) - drift.center_at(t), drift.velocity);
        }
    }

    #[test]
    fn cube_circumsphere() {
        assert_abs_diff_eq!(
            circumsphere_radius_of_cube(2.0),
            3f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(Obstacle::from_cube(Point3::zeros(), 0.0, Point3::zeros()).is_err());
        assert!(Obstacle::from_cube(Point3::zeros(), -1.0, Point3::zeros()).is_err());
    }

    #[test]
    fn cube_corners_lie_on_circumsphere() {
        for (edge, c) in [(2.0, p(0.0, 0.0, 0.0)), (0.37, p(1.5, -2.0, 0.25))] {
            let r = circumsphere_radius_of_cube(edge);
            let h = edge / 2.0;
            for corner in 0..8 {
                let s = |bit: usize| if corner & bit == 0 { -h } else { h };
                let v = c + p(s(1), s(2), s(4));
                assert_abs_diff_eq!((v - c).norm(), r, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn midpoint_case() {
        let g = segment_clearance(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(0.5, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(g.d, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.leg_a, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(g.leg_b, 0.5, epsilon = 1e-12);
        assert!(g.within);
    }

    #[test]
    fn foot_beyond_endpoint() {
        let g = segment_clearance(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(2.0, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(g.d, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.leg_a, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.leg_b, 1.0, epsilon = 1e-12);
        assert!(!g.within);
        assert_abs_diff_eq!(g.endpoint_distance, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn degenerate_segment_rejected() {
        let a = p(1.0, 1.0, 1.0);
        assert!(matches!(
            segment_clearance(&a, &a, &p(0.0, 0.0, 0.0)),
            Err(Error::DegenerateSegment { .. })
        ));
    }

    #[test]
    fn point_on_line_has_zero_distance() {
        let g = segment_clearance(&p(0.0, 0.0, 0.0), &p(0.0, 0.0, 2.0), &p(0.0, 0.0, 1.3)).unwrap();
        assert_eq!(g.d, 0.0);
        assert!(g.within);
    }

    fn arm() -> ArmModel {
        ArmModel::default()
    }

    fn params(th: &[f64; 3], mode: AvoidanceMode) -> AvoidanceParams<'_> {
        AvoidanceParams {
            thresholds: th,
            n_f: 10000.0,
            mode,
        }
    }

    #[test]
    fn no_obstacles_no_penalty() {
        let th = [0.1; 3];
        for mode in [AvoidanceMode::ZeroWhenSafe, AvoidanceMode::PaperLiteral] {
            let r = avoidance_penalty(&arm(), &JointConfig::default(), &[], 0, params(&th, mode))
                .unwrap();
            assert_eq!(r.penalty, 0.0);
            assert!(!r.threat);
        }
    }

    #[test]
    fn threat_on_segment_interior() {
        // Vertical arm: elbow segment spans z in [2, 3] (default L = 1, 1, 1).
        // Obstacle at distance 0.05 from the upper segment, radius 0.05, Th = 0.05.
        let th = [0.05; 3];
        let obs = Obstacle::new(p(0.05, 0.0, 2.5), 0.05, Point3::zeros()).unwrap();
        let r = avoidance_penalty(
            &arm(),
            &JointConfig::default(),
            &[obs],
            0,
            params(&th, AvoidanceMode::ZeroWhenSafe),
        )
        .unwrap();
        assert!(r.threat);
        assert_abs_diff_eq!(r.penalty, 10000.05, epsilon = 1e-9);
        assert_eq!(r.pairs.iter().filter(|p| p.threat).count(), 1);
    }

    #[test]
    fn beyond_endpoint_is_not_a_threat() {
        // Above the tip: d = 0.05 from the line but the foot is beyond z = 3.
        let th = [0.05; 3];
        let obs = Obstacle::new(p(0.05, 0.0, 3.4), 0.05, Point3::zeros()).unwrap();
        let r = avoidance_penalty(
            &arm(),
            &JointConfig::default(),
            &[obs],
            0,
            params(&th, AvoidanceMode::ZeroWhenSafe),
        )
        .unwrap();
        assert!(!r.threat);
        assert_eq!(r.penalty, 0.0);

        let lit = avoidance_penalty(
            &arm(),
            &JointConfig::default(),
            &[obs],
            0,
            params(&th, AvoidanceMode::PaperLiteral),
        )
        .unwrap();
        assert!(!lit.threat);
        // every pair has d = 0.05 to the common vertical line
        assert_abs_diff_eq!(lit.penalty, 0.15, epsilon = 1e-12);
    }

    #[test]
    fn obstacle_positions_follow_time() {
        let th = [0.1; 3];
        // starts far away, reaches the lower link at t = 4
        let obs = Obstacle::new(p(4.0, 0.0, 0.5), 0.1, p(-1.0, 0.0, 0.0)).unwrap();
        let run = |t| {
            avoidance_penalty(
                &arm(),
                &JointConfig::default(),
                &[obs],
                t,
                params(&th, AvoidanceMode::ZeroWhenSafe),
            )
            .unwrap()
        };
        assert!(!run(0).threat);
        assert!(run(4).threat);
    }

    fn pt() -> impl Strategy<Value = Point3> {
        prop::array::uniform3(-5.0f64..5.0).prop_map(Point3::from)
    }

    proptest! {
        #[test]
        fn clearance_bounds(a in pt(), b in pt(), c in pt()) {
            prop_assume!((b - a).norm() > 1e-3);
            let g = segment_clearance(&a, &b, &c).unwrap();
            prop_assert!(g.d >= 0.0);
            prop_assert!(g.d <= (c - a).norm() + 1e-12);
            prop_assert!(g.d <= (c - b).norm() + 1e-12);
            if g.within {
                let len = (b - a).norm();
                prop_assert!((g.leg_a + g.leg_b - len).abs() <= WITHIN_SEGMENT_TOL * len);
            }
        }

        #[test]
        fn clearance_translation_invariant(a in pt(), b in pt(), c in pt(), shift in pt()) {
            prop_assume!((b - a).norm() > 1e-3);
            let g = segment_clearance(&a, &b, &c).unwrap();
            let h = segment_clearance(&(a + shift), &(b + shift), &(c + shift)).unwrap();
            prop_assert!((g.d - h.d).abs() <= 1e-12 * (1.0 + g.d) * 100.0);
            prop_assert!((g.leg_a - h.leg_a).abs() <= 1e-9);
            prop_assert!((g.leg_b - h.leg_b).abs() <= 1e-9);
        }

        #[test]
        fn growing_radius_keeps_threats(
            q in prop::array::uniform3(-1.5f64..1.5),
            c in pt(),
            r in 0.01f64..1.0,
            grow in 0.0f64..1.0,
        ) {
            let th = [0.1; 3];
            let arm = ArmModel::default();
            let q = JointConfig(q);
            let small = Obstacle::new(c, r, Point3::zeros()).unwrap();
            let big = Obstacle::new(c, r + grow, Point3::zeros()).unwrap();
            let p = params(&th, AvoidanceMode::ZeroWhenSafe);
            let rs = avoidance_penalty(&arm, &q, &[small], 0, p).unwrap();
            let rb = avoidance_penalty(&arm, &q, &[big], 0, p).unwrap();
            for (s, b) in rs.pairs.iter().zip(&rb.pairs) {
                prop_assert!(!s.threat || b.threat);
            }
            if rs.threat {
                prop_assert!(rs.penalty >= 10000.0);
            } else {
                prop_assert_eq!(rs.penalty, 0.0);
            }
        }
    }
}
