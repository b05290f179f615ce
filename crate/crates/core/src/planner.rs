//! Waypoint-by-waypoint planning.
//!
//! Each unit-time step runs one DE search over the next joint configuration,
//! restricted to the window the joint speed limit allows, and scores
//! candidates by energy, distance to goal and obstacle penalty with the
//! obstacles advanced to that step's time.

use serde::{Deserialize, Serialize};

use crate::collision::{
    avoidance_penalty, AvoidanceMode, AvoidanceParams, ClearanceReport, Obstacle,
};
use crate::de::{self, DeParams, DeResult};
use crate::energy::EnergyTerms;
use crate::error::{Error, Result};
use crate::kinematics::{end_effector, ArmModel, JointConfig, Point3, JOINTS};
use crate::seed::derive_seed;

pub const DEFAULT_HORIZON: u32 = 20;
pub const DEFAULT_N_F: f64 = 10_000.0;
pub const DEFAULT_GOAL_TOLERANCE: f64 = 0.1;
pub const DEFAULT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub energy: f64,
    pub distance: f64,
    pub avoidance: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            energy: 1.0,
            distance: 1.0,
            avoidance: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub start: JointConfig,
    pub goal: Point3,
    pub obstacles: Vec<Obstacle>,
    /// Maximum number of unit-time steps.
    pub horizon: u32,
    pub thresholds: [f64; JOINTS],
    pub n_f: f64,
    pub goal_tolerance: f64,
    pub avoidance_mode: AvoidanceMode,
    pub weights: CostWeights,
}

impl Scenario {
    pub fn new(start: JointConfig, goal: Point3) -> Self {
        Self {
            start,
            goal,
            obstacles: Vec::new(),
            horizon: DEFAULT_HORIZON,
            thresholds: [DEFAULT_THRESHOLD; JOINTS],
            n_f: DEFAULT_N_F,
            goal_tolerance: DEFAULT_GOAL_TOLERANCE,
            avoidance_mode: AvoidanceMode::default(),
            weights: CostWeights::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() {
            return Err(Error::field("start", "angles must be finite"));
        }
        if !self.goal.iter().all(|x| x.is_finite()) {
            return Err(Error::field("goal", "components must be finite"));
        }
        if self.horizon == 0 {
            return Err(Error::field("horizon", "must be >= 1"));
        }
        if self.thresholds.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::field(
                "thresholds",
                format!("must be finite and > 0, got {:?}", self.thresholds),
            ));
        }
        if !(self.n_f.is_finite() && self.n_f > 0.0) {
            return Err(Error::field(
                "n_f",
                format!("must be > 0, got {}", self.n_f),
            ));
        }
        if !(self.goal_tolerance.is_finite() && self.goal_tolerance > 0.0) {
            return Err(Error::field(
                "goal_tolerance",
                format!("must be > 0, got {}", self.goal_tolerance),
            ));
        }
        let w = self.weights;
        if [w.energy, w.distance, w.avoidance]
            .iter()
            .any(|&x| !(x.is_finite() && x >= 0.0))
        {
            return Err(Error::field(
                "cost_weights",
                "weights must be finite and >= 0",
            ));
        }
        for (j, obs) in self.obstacles.iter().enumerate() {
            obs.validate().map_err(|e| match e {
                Error::InvalidField { field, reason } => {
                    Error::field(format!("obstacles[{j}].{field}"), reason)
                }
                other => other,
            })?;
        }
        Ok(())
    }

    fn avoidance(&self) -> AvoidanceParams<'_> {
        AvoidanceParams {
            thresholds: &self.thresholds,
            n_f: self.n_f,
            mode: self.avoidance_mode,
        }
    }
}

/// DE settings that stay fixed across planning steps; bounds are per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeSettings {
    pub population_size: usize,
    pub scale_factor: f64,
    pub crossover_prob: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for DeSettings {
    fn default() -> Self {
        Self {
            population_size: de::DEFAULT_POPULATION,
            scale_factor: de::DEFAULT_SCALE_FACTOR,
            crossover_prob: de::DEFAULT_CROSSOVER,
            max_iterations: de::DEFAULT_MAX_ITERATIONS,
            seed: 0,
        }
    }
}

impl DeSettings {
    pub fn params(&self, lower: Vec<f64>, upper: Vec<f64>, seed: u64) -> DeParams {
        DeParams {
            population_size: self.population_size,
            scale_factor: self.scale_factor,
            crossover_prob: self.crossover_prob,
            max_iterations: self.max_iterations,
            lower_bounds: lower,
            upper_bounds: upper,
            seed,
            target_cost: None,
            updating: de::Updating::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params(vec![0.0], vec![1.0], self.seed).validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub delta_potential: f64,
    pub kinetic: f64,
    pub distance: f64,
    pub avoidance: f64,
    pub total: f64,
}

pub fn distance_to_goal(arm: &ArmModel, q: &JointConfig, goal: &Point3) -> f64 {
    (end_effector(arm, q) - goal).norm()
}

/// Cost of moving from `prev` to `candidate` during the step ending at `t`.
pub fn step_cost(
    candidate: &JointConfig,
    prev: &JointConfig,
    scenario: &Scenario,
    arm: &ArmModel,
    t: u32,
) -> Result<(CostBreakdown, ClearanceReport)> {
    let energy = EnergyTerms::between(arm, prev, candidate);
    let distance = distance_to_goal(arm, candidate, &scenario.goal);
    let report = avoidance_penalty(arm, candidate, &scenario.obstacles, t, scenario.avoidance())?;
    let w = scenario.weights;
    let breakdown = CostBreakdown {
        delta_potential: energy.delta_potential,
        kinetic: energy.kinetic,
        distance,
        avoidance: report.penalty,
        total: w.energy * energy.cost() + w.distance * distance + w.avoidance * report.penalty,
    };
    Ok((breakdown, report))
}

/// Diagnostics for one waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Time index; 0 is the start configuration.
    pub step: u32,
    pub config: JointConfig,
    pub end_effector: Point3,
    pub cost: CostBreakdown,
    /// Smallest surface gap to each obstacle, in obstacle order.
    pub min_gap_per_obstacle: Vec<f64>,
    pub threat: bool,
    /// DE best-so-far cost per generation (empty for the start row).
    pub history: Vec<f64>,
}

impl StepRecord {
    fn new(
        step: u32,
        config: JointConfig,
        arm: &ArmModel,
        cost: CostBreakdown,
        report: &ClearanceReport,
        n_obstacles: usize,
        history: Vec<f64>,
    ) -> Self {
        Self {
            step,
            config,
            end_effector: end_effector(arm, &config),
            cost,
            min_gap_per_obstacle: report.min_gap_per_obstacle(n_obstacles),
            threat: report.threat,
            history,
        }
    }

    pub fn distance(&self) -> f64 {
        self.cost.distance
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap_per_obstacle
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// One record per waypoint; index 0 is the start.
    pub records: Vec<StepRecord>,
    pub outcome: Outcome,
}

impl Trajectory {
    pub fn waypoints(&self) -> impl Iterator<Item = JointConfig> + '_ {
        self.records.iter().map(|r| r.config)
    }

    pub fn steps(&self) -> usize {
        self.records.len() - 1
    }

    pub fn initial_distance(&self) -> f64 {
        self.records[0].distance()
    }

    pub fn final_distance(&self) -> f64 {
        self.records.last().map_or(f64::NAN, StepRecord::distance)
    }

    /// Any planned (non-start) waypoint flagged as a collision threat.
    pub fn threat_accepted(&self) -> bool {
        self.records[1..].iter().any(|r| r.threat)
    }

    pub fn is_success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    /// Sum of the energy terms over planned steps.
    pub fn total_energy(&self) -> f64 {
        self.records[1..]
            .iter()
            .map(|r| r.cost.delta_potential + r.cost.kinetic)
            .sum()
    }
}

/// Per-joint search window `[max(min, q - w), min(max, q + w)]`.
pub fn step_window(arm: &ArmModel, current: &JointConfig) -> Result<[(f64, f64); JOINTS]> {
    let mut window = [(0.0, 0.0); JOINTS];
    for (k, lim) in arm.joint_limits.iter().enumerate() {
        let mut lower = lim.min.max(current[k] - arm.max_step);
        let mut upper = lim.max.min(current[k] + arm.max_step);
        // rounding in q +/- w can overshoot the step bound by one ulp
        while current[k] - lower > arm.max_step {
            lower = lower.next_up();
        }
        while upper - current[k] > arm.max_step {
            upper = upper.next_down();
        }
        if !(lower <= upper) {
            return Err(Error::InfeasibleJointState {
                joint: k + 1,
                lower,
                upper,
            });
        }
        window[k] = (lower, upper);
    }
    Ok(window)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedStep {
    pub next: JointConfig,
    pub cost: CostBreakdown,
    pub report: ClearanceReport,
    pub de: DeResult,
}

/// Runs one DE search for the waypoint reached at time `t`.
///
/// Joints whose window has collapsed to a point are pinned and left out of
/// the search; when every joint is pinned no search runs.
pub fn plan_step(
    current: &JointConfig,
    scenario: &Scenario,
    arm: &ArmModel,
    settings: &DeSettings,
    t: u32,
) -> Result<PlannedStep> {
    let window = step_window(arm, current)?;
    let free: Vec<usize> = (0..JOINTS).filter(|&k| window[k].0 < window[k].1).collect();
    let base = JointConfig(window.map(|(lo, _)| lo));
    let assemble = |x: &[f64]| {
        let mut q = base;
        for (&k, &v) in free.iter().zip(x) {
            q.0[k] = v;
        }
        q
    };

    let de = if free.is_empty() {
        let (cost, _) = step_cost(&base, current, scenario, arm, t)?;
        DeResult {
            best_vector: Vec::new(),
            best_cost: cost.total,
            history: vec![cost.total],
            evaluations: 1,
        }
    } else {
        let params = settings.params(
            free.iter().map(|&k| window[k].0).collect(),
            free.iter().map(|&k| window[k].1).collect(),
            derive_seed(settings.seed, u64::from(t)),
        );
        de::run(
            |x| step_cost(&assemble(x), current, scenario, arm, t).map(|(c, _)| c.total),
            &params,
        )?
    };

    let next = assemble(&de.best_vector);
    let (cost, report) = step_cost(&next, current, scenario, arm, t)?;
    Ok(PlannedStep {
        next,
        cost,
        report,
        de,
    })
}

/// Plans from `scenario.start` until the goal tolerance or the horizon is hit.
pub fn plan(scenario: &Scenario, arm: &ArmModel, settings: &DeSettings) -> Result<Trajectory> {
    scenario.validate()?;
    arm.validate()?;
    settings.validate()?;
    if !arm.within_limits(&scenario.start) {
        return Err(Error::field(
            "start",
            "start configuration violates joint limits",
        ));
    }

    let n_obs = scenario.obstacles.len();
    let (cost0, report0) = step_cost(&scenario.start, &scenario.start, scenario, arm, 0)?;
    let mut records = vec![StepRecord::new(
        0,
        scenario.start,
        arm,
        cost0,
        &report0,
        n_obs,
        Vec::new(),
    )];

    let mut current = scenario.start;
    let mut t = 0;
    while t < scenario.horizon && records.last().unwrap().distance() > scenario.goal_tolerance {
        t += 1;
        let step = plan_step(&current, scenario, arm, settings, t)?;
        current = step.next;
        records.push(StepRecord::new(
            t,
            current,
            arm,
            step.cost,
            &step.report,
            n_obs,
            step.de.history,
        ));
    }

    let mut trajectory = Trajectory {
        records,
        outcome: Outcome::Failure,
    };
    if trajectory.final_distance() <= scenario.goal_tolerance && !trajectory.threat_accepted() {
        trajectory.outcome = Outcome::Success;
    }
    Ok(trajectory)
}
