//! Seeded Monte-Carlo evaluation of the planner over random scenarios.
//!
//! Every trial draws from its own ChaCha8 stream seeded with
//! `derive_seed(config.seed, trial_index)`, so trials can run in parallel
//! without changing results.
//!
//! Sampling rules:
//! - the goal is the end-effector position of a joint configuration drawn
//!   uniformly inside the joint limits, kept only when its distance from the
//!   shoulder lies in `goal_shell`;
//! - each obstacle center is drawn uniformly in direction and in distance
//!   from the shoulder (`center_shell`), with radius and speed uniform in
//!   their ranges and a uniformly random heading;
//! - an obstacle is redrawn when, at time 0, any start-pose segment is closer
//!   than `R + Th_max` to its center, or when the goal point is closer than
//!   `R + Th_max` to its center at any time `0..=T`, or when it comes closer
//!   than `R + Th_1` to the base link (which no joint can move) at any time
//!   `0..=T`.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{segment_clearance, Obstacle};
use crate::error::{Error, Result};
use crate::kinematics::{end_effector, joint_points, ArmModel, JointConfig, Point3, JOINTS};
use crate::planner::{plan, DeSettings, Scenario, Trajectory};
use crate::scenario::LoadedScenario;
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub seed: u64,
    /// Allowed goal distance from the shoulder, `[min, max]`.
    pub goal_shell: [f64; 2],
    pub obstacle_count: usize,
    /// Allowed obstacle center distance from the shoulder, `[min, max]`.
    pub center_shell: [f64; 2],
    pub radius_range: [f64; 2],
    pub speed_range: [f64; 2],
    /// Redraw budget per sampled quantity.
    pub max_attempts: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            goal_shell: [0.8, 1.9],
            obstacle_count: 3,
            center_shell: [0.8, 2.2],
            radius_range: [0.1, 0.25],
            speed_range: [0.0, 0.05],
            max_attempts: 10_000,
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        let range = |name: &str, [lo, hi]: [f64; 2], min: f64| {
            if lo.is_finite() && hi.is_finite() && lo >= min && lo <= hi {
                Ok(())
            } else {
                Err(Error::field(
                    name,
                    format!("need {min} <= min <= max, got [{lo}, {hi}]"),
                ))
            }
        };
        if self.trials == 0 {
            return Err(Error::field("trials", "must be >= 1"));
        }
        if self.max_attempts == 0 {
            return Err(Error::field("max_attempts", "must be >= 1"));
        }
        range("goal_shell", self.goal_shell, 0.0)?;
        range("center_shell", self.center_shell, 0.0)?;
        range("radius_range", self.radius_range, 0.0)?;
        range("speed_range", self.speed_range, 0.0)?;
        if self.radius_range[0] <= 0.0 {
            return Err(Error::field("radius_range", "radii must be > 0"));
        }
        if self.goal_shell[1] <= 0.0 || self.center_shell[1] <= 0.0 {
            return Err(Error::field(
                "goal_shell",
                "shell must have positive outer radius",
            ));
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Point3 {
    // uniform on the sphere
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    Point3::new(r * phi.cos(), r * phi.sin(), z)
}

fn shoulder(arm: &ArmModel) -> Point3 {
    Point3::new(0.0, 0.0, arm.link_lengths[0])
}

fn sample_goal(rng: &mut ChaCha8Rng, arm: &ArmModel, config: &MonteCarloConfig) -> Result<Point3> {
    for _ in 0..config.max_attempts {
        let q = JointConfig(std::array::from_fn(|k| {
            let lim = arm.joint_limits[k];
            rng.random_range(lim.min..=lim.max)
        }));
        let p = end_effector(arm, &q);
        let r = (p - shoulder(arm)).norm();
        if config.goal_shell[0] <= r && r <= config.goal_shell[1] {
            return Ok(p);
        }
    }
    Err(Error::field(
        "goal_shell",
        "no reachable goal found within the attempt budget",
    ))
}

/// Closest distance from `point` to the arm pose `q`.
fn arm_distance(arm: &ArmModel, q: &JointConfig, point: &Point3) -> Result<f64> {
    let pts = joint_points(arm, q);
    (0..JOINTS).try_fold(f64::INFINITY, |acc, i| {
        Ok(acc.min(segment_clearance(&pts[i], &pts[i + 1], point)?.segment_distance()))
    })
}

fn margin(scenario: &Scenario) -> f64 {
    scenario.thresholds.iter().copied().fold(f64::MIN, f64::max)
}

/// `true` when `obs` satisfies every obstacle rejection rule for this scenario.
pub fn obstacle_admissible(obs: &Obstacle, scenario: &Scenario, arm: &ArmModel) -> Result<bool> {
    let clearance = obs.radius + margin(scenario);
    if arm_distance(arm, &scenario.start, &obs.center_at(0))? < clearance {
        return Ok(false);
    }
    let base = Point3::zeros();
    let top = shoulder(arm);
    let base_clearance = obs.radius + scenario.thresholds[0];
    for t in 0..=scenario.horizon {
        let c = obs.center_at(t);
        if (c - scenario.goal).norm() < clearance
            || segment_clearance(&base, &top, &c)?.segment_distance() < base_clearance
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks every sampling rule for a generated trial scenario.
pub fn satisfies_rules(
    scenario: &Scenario,
    arm: &ArmModel,
    config: &MonteCarloConfig,
) -> Result<bool> {
    let r = (scenario.goal - shoulder(arm)).norm();
    if !(config.goal_shell[0] <= r && r <= config.goal_shell[1]) {
        return Ok(false);
    }
    for obs in &scenario.obstacles {
        if !obstacle_admissible(obs, scenario, arm)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Scenario and DE settings of trial `index`.
pub fn generate_trial(
    config: &MonteCarloConfig,
    template: &LoadedScenario,
    index: usize,
) -> Result<(Scenario, DeSettings)> {
    let arm = &template.arm;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, index as u64));
    let mut scenario = template.scenario.clone();
    scenario.goal = sample_goal(&mut rng, arm, config)?;
    scenario.obstacles.clear();

    for _ in 0..config.obstacle_count {
        let mut placed = None;
        for _ in 0..config.max_attempts {
            let center =
                shoulder(arm) + unit_vector(&mut rng) * uniform(&mut rng, config.center_shell);
            let radius = uniform(&mut rng, config.radius_range);
            let velocity = unit_vector(&mut rng) * uniform(&mut rng, config.speed_range);
            let obs = Obstacle::new(center, radius, velocity)?;
            if obstacle_admissible(&obs, &scenario, arm)? {
                placed = Some(obs);
                break;
            }
        }
        scenario.obstacles.push(placed.ok_or_else(|| {
            Error::field(
                "obstacles",
                "no admissible obstacle found within the attempt budget",
            )
        })?);
    }
    debug_assert!(satisfies_rules(&scenario, arm, config).unwrap_or(false));

    let de = DeSettings {
        seed: rng.random(),
        ..template.de
    };
    Ok((scenario, de))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub index: usize,
    pub scenario: Option<Scenario>,
    pub de: Option<DeSettings>,
    pub trajectory: std::result::Result<Trajectory, String>,
}

impl TrialResult {
    pub fn success(&self) -> bool {
        self.trajectory.as_ref().is_ok_and(Trajectory::is_success)
    }
}

pub fn run_trial(
    config: &MonteCarloConfig,
    template: &LoadedScenario,
    index: usize,
) -> TrialResult {
    match generate_trial(config, template, index) {
        Ok((scenario, de)) => {
            let trajectory = plan(&scenario, &template.arm, &de).map_err(|e| e.to_string());
            TrialResult {
                index,
                scenario: Some(scenario),
                de: Some(de),
                trajectory,
            }
        }
        Err(e) => TrialResult {
            index,
            scenario: None,
            de: None,
            trajectory: Err(e.to_string()),
        },
    }
}

/// Runs every trial; order of the result follows trial index.
pub fn run_trials(
    config: &MonteCarloConfig,
    template: &LoadedScenario,
) -> Result<Vec<TrialResult>> {
    config.validate()?;
    Ok((0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, template, i))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloStats {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean final end-effector distance over trials that produced a trajectory.
    pub mean_final_distance: f64,
    /// Mean of `|dP| + K` over all planned steps.
    pub mean_step_energy: f64,
    /// Fraction of trials that accepted at least one threatening waypoint.
    pub threat_rate: f64,
    pub errors: usize,
}

#[derive(Debug, Clone)]
pub struct MonteCarloReport {
    pub stats: MonteCarloStats,
    pub elapsed: Duration,
}

pub fn summarize(results: &[TrialResult]) -> MonteCarloStats {
    let planned: Vec<&Trajectory> = results
        .iter()
        .filter_map(|r| r.trajectory.as_ref().ok())
        .collect();
    let successes = results.iter().filter(|r| r.success()).count();
    let steps: usize = planned.iter().map(|t| t.steps()).sum();
    let energy: f64 = planned.iter().map(|t| t.total_energy()).sum();
    let n = results.len().max(1) as f64;
    MonteCarloStats {
        trials: results.len(),
        successes,
        success_rate: successes as f64 / n,
        mean_final_distance: if planned.is_empty() {
            f64::NAN
        } else {
            planned.iter().map(|t| t.final_distance()).sum::<f64>() / planned.len() as f64
        },
        mean_step_energy: if steps == 0 {
            0.0
        } else {
            energy / steps as f64
        },
        threat_rate: planned.iter().filter(|t| t.threat_accepted()).count() as f64 / n,
        errors: results.len() - planned.len(),
    }
}

pub fn montecarlo(
    config: &MonteCarloConfig,
    template: &LoadedScenario,
) -> Result<MonteCarloReport> {
    let started = Instant::now();
    let results = run_trials(config, template)?;
    Ok(MonteCarloReport {
        stats: summarize(&results),
        elapsed: started.elapsed(),
    })
}

/// Template with the default arm, start pose and DE settings.
pub fn default_template() -> LoadedScenario {
    LoadedScenario {
        scenario: Scenario::new(JointConfig::default(), Point3::zeros()),
        arm: ArmModel::default(),
        de: DeSettings::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (MonteCarloConfig, LoadedScenario) {
        let config = MonteCarloConfig {
            trials: 6,
            seed: 9,
            ..MonteCarloConfig::default()
        };
        let mut template = default_template();
        template.de.population_size = 30;
        template.de.max_iterations = 30;
        (config, template)
    }

    #[test]
    fn generated_trials_follow_rules() {
        let (config, template) = small();
        for i in 0..50 {
            let (s, _) = generate_trial(&config, &template, i).unwrap();
            assert_eq!(s.obstacles.len(), 3);
            assert!(satisfies_rules(&s, &template.arm, &config).unwrap());
            for o in &s.obstacles {
                assert!((config.radius_range[0]..=config.radius_range[1]).contains(&o.radius));
                assert!(o.velocity.norm() <= config.speed_range[1] + 1e-12);
            }
        }
    }

    #[test]
    fn trial_generation_is_deterministic() {
        let (config, template) = small();
        assert_eq!(
            generate_trial(&config, &template, 3).unwrap(),
            generate_trial(&config, &template, 3).unwrap()
        );
        assert_ne!(
            generate_trial(&config, &template, 3).unwrap(),
            generate_trial(&config, &template, 4).unwrap()
        );
    }

    #[test]
    fn same_seed_same_report() {
        let (config, template) = small();
        let a = montecarlo(&config, &template).unwrap();
        let b = montecarlo(&config, &template).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.stats.trials, 6);
    }

    #[test]
    fn invalid_config_rejected() {
        let (mut config, template) = small();
        config.trials = 0;
        assert!(montecarlo(&config, &template).is_err());
        let (mut config, _) = small();
        config.radius_range = [0.3, 0.1];
        assert!(config.validate().is_err());
    }

    #[test]
    fn unreachable_shell_is_a_trial_error() {
        let (mut config, template) = small();
        config.goal_shell = [5.0, 6.0];
        config.max_attempts = 50;
        let results = run_trials(&config, &template).unwrap();
        assert!(results.iter().all(|r| r.trajectory.is_err()));
        assert_eq!(summarize(&results).errors, config.trials);
    }
}
