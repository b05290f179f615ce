//! Energy-aware waypoint planning for a 3-link arm among moving spherical
//! obstacles.
//!
//! The planner advances one unit-time step at a time. At every step a
//! Differential Evolution search picks the next joint configuration inside the
//! speed-limited window, minimising
//!
//! ```text
//! |P_i - P_{i-1}| + K_i + D_i + A_vd
//! ```
//!
//! where `P` is potential energy, `K` kinetic energy of the step, `D` the
//! end-effector distance to the goal and `A_vd` the obstacle penalty.

pub mod bench;
pub mod collision;
pub mod de;
pub mod energy;
pub mod error;
pub mod kinematics;
pub mod montecarlo;
pub mod output;
pub mod planner;
pub mod scenario;
pub mod seed;

pub use collision::{AvoidanceMode, ClearanceReport, Obstacle};
pub use de::{DeParams, DeResult};
pub use error::{Error, Result};
pub use kinematics::{ArmModel, JointConfig, JointLimit, Point3};
pub use planner::{plan, CostBreakdown, DeSettings, Outcome, Scenario, Trajectory};
