//! Scenario files.
//!
//! Scenarios are TOML documents. Angles are written in degrees and converted
//! to radians on load; cube obstacles are replaced by their circumscribed
//! sphere. Everything except `arm.link_lengths`, `start_deg` and `goal` is
//! optional.
//!
//! ```toml
//! start_deg = [0.0, 0.0, 0.0]
//! goal = [1.0, 0.5, 1.2]
//! horizon = 20
//!
//! [arm]
//! link_lengths = [1.0, 1.0, 1.0]
//!
//! [[obstacles]]
//! shape = "cube"
//! center = [1.0, 0.0, 1.0]
//! edge = 0.2
//! velocity = [0.0, 0.05, 0.0]
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collision::{AvoidanceMode, Obstacle};
use crate::error::{Error, Result};
use crate::kinematics::{
    default_inertias, ArmModel, JointConfig, JointLimit, Point3, DEFAULT_JOINT_LIMITS_DEG,
    DEFAULT_MASSES, DEFAULT_MAX_STEP_DEG, JOINTS,
};
use crate::planner::{
    CostWeights, DeSettings, Scenario, DEFAULT_GOAL_TOLERANCE, DEFAULT_HORIZON, DEFAULT_N_F,
    DEFAULT_THRESHOLD,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub start_deg: [f64; JOINTS],
    pub goal: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<[f64; JOINTS]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avoidance_mode: Option<AvoidanceMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_weights: Option<CostWeights>,
    pub arm: ArmSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de: Option<DeSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub obstacles: Vec<ObstacleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSection {
    pub link_lengths: [f64; JOINTS],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<[f64; JOINTS]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertias: Option<[f64; JOINTS]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_limits_deg: Option<[[f64; 2]; JOINTS]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ObstacleEntry {
    Sphere {
        center: [f64; 3],
        radius: f64,
        #[serde(default)]
        velocity: [f64; 3],
    },
    Cube {
        center: [f64; 3],
        edge: f64,
        #[serde(default)]
        velocity: [f64; 3],
    },
}

/// Validated domain objects built from a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub arm: ArmModel,
    pub de: DeSettings,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<LoadedScenario> {
    ScenarioFile::read(path)?.into_domain()
}

fn check_finite(field: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::field(field, "values must be finite"))
    }
}

impl ScenarioFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    /// Same document with every default spelled out.
    pub fn canonical(&self) -> Self {
        let de = self.de.clone().unwrap_or_default();
        let defaults = DeSettings::default();
        let masses = self.arm.masses.unwrap_or(DEFAULT_MASSES);
        Self {
            start_deg: self.start_deg,
            goal: self.goal,
            horizon: Some(self.horizon.unwrap_or(DEFAULT_HORIZON)),
            thresholds: Some(self.thresholds.unwrap_or([DEFAULT_THRESHOLD; JOINTS])),
            n_f: Some(self.n_f.unwrap_or(DEFAULT_N_F)),
            goal_tolerance: Some(self.goal_tolerance.unwrap_or(DEFAULT_GOAL_TOLERANCE)),
            avoidance_mode: Some(self.avoidance_mode.unwrap_or_default()),
            cost_weights: Some(self.cost_weights.unwrap_or_default()),
            arm: ArmSection {
                link_lengths: self.arm.link_lengths,
                masses: Some(masses),
                inertias: Some(
                    self.arm
                        .inertias
                        .unwrap_or_else(|| default_inertias(&self.arm.link_lengths, &masses)),
                ),
                gravity: Some(self.arm.gravity.unwrap_or(1.0)),
                joint_limits_deg: Some(
                    self.arm
                        .joint_limits_deg
                        .unwrap_or(DEFAULT_JOINT_LIMITS_DEG),
                ),
                max_step_deg: Some(self.arm.max_step_deg.unwrap_or(DEFAULT_MAX_STEP_DEG)),
            },
            de: Some(DeSection {
                population_size: Some(de.population_size.unwrap_or(defaults.population_size)),
                scale_factor: Some(de.scale_factor.unwrap_or(defaults.scale_factor)),
                crossover_prob: Some(de.crossover_prob.unwrap_or(defaults.crossover_prob)),
                max_iterations: Some(de.max_iterations.unwrap_or(defaults.max_iterations)),
                seed: Some(de.seed.unwrap_or(defaults.seed)),
            }),
            obstacles: self.obstacles.clone(),
        }
    }

    /// Describes already-built domain objects. Obstacles are written as spheres.
    pub fn from_domain(scenario: &Scenario, arm: &ArmModel, de: &DeSettings) -> Self {
        let v = |p: &Point3| [p.x, p.y, p.z];
        Self {
            start_deg: scenario.start.to_degrees(),
            goal: v(&scenario.goal),
            horizon: Some(scenario.horizon),
            thresholds: Some(scenario.thresholds),
            n_f: Some(scenario.n_f),
            goal_tolerance: Some(scenario.goal_tolerance),
            avoidance_mode: Some(scenario.avoidance_mode),
            cost_weights: Some(scenario.weights),
            arm: ArmSection {
                link_lengths: arm.link_lengths,
                masses: Some(arm.masses),
                inertias: Some(arm.inertias),
                gravity: Some(arm.gravity),
                joint_limits_deg: Some(
                    arm.joint_limits
                        .map(|l| [l.min.to_degrees(), l.max.to_degrees()]),
                ),
                max_step_deg: Some(arm.max_step.to_degrees()),
            },
            de: Some(DeSection {
                population_size: Some(de.population_size),
                scale_factor: Some(de.scale_factor),
                crossover_prob: Some(de.crossover_prob),
                max_iterations: Some(de.max_iterations),
                seed: Some(de.seed),
            }),
            obstacles: scenario
                .obstacles
                .iter()
                .map(|o| ObstacleEntry::Sphere {
                    center: v(&o.initial_center),
                    radius: o.radius,
                    velocity: v(&o.velocity),
                })
                .collect(),
        }
    }

    pub fn into_domain(&self) -> Result<LoadedScenario> {
        let c = self.canonical();
        let arm_sec = &c.arm;

        check_finite("arm.link_lengths", &arm_sec.link_lengths)?;
        if let Some(k) = arm_sec.link_lengths.iter().position(|&l| l <= 0.0) {
            return Err(Error::field(
                format!("arm.link_lengths[{k}]"),
                "must be > 0",
            ));
        }
        let masses = arm_sec.masses.unwrap();
        check_finite("arm.masses", &masses)?;
        if let Some(k) = masses.iter().position(|&m| m < 0.0) {
            return Err(Error::field(format!("arm.masses[{k}]"), "must be >= 0"));
        }
        let inertias = arm_sec.inertias.unwrap();
        check_finite("arm.inertias", &inertias)?;
        if let Some(k) = inertias.iter().position(|&i| i < 0.0) {
            return Err(Error::field(format!("arm.inertias[{k}]"), "must be >= 0"));
        }
        let gravity = arm_sec.gravity.unwrap();
        check_finite("arm.gravity", &[gravity])?;
        let limits_deg = arm_sec.joint_limits_deg.unwrap();
        for (k, [lo, hi]) in limits_deg.iter().enumerate() {
            check_finite("arm.joint_limits_deg", &[*lo, *hi])?;
            if lo >= hi {
                return Err(Error::field(
                    format!("arm.joint_limits_deg[{k}]"),
                    format!("min must be < max, got [{lo}, {hi}]"),
                ));
            }
        }
        let max_step_deg = arm_sec.max_step_deg.unwrap();
        if !(max_step_deg.is_finite() && max_step_deg > 0.0) {
            return Err(Error::field(
                "arm.max_step_deg",
                format!("must be > 0, got {max_step_deg}"),
            ));
        }
        let arm = ArmModel::new(
            arm_sec.link_lengths,
            masses,
            Some(inertias),
            gravity,
            limits_deg.map(|[lo, hi]| JointLimit::from_degrees(lo, hi)),
            max_step_deg.to_radians(),
        )?;

        check_finite("start_deg", &c.start_deg)?;
        check_finite("goal", &c.goal)?;
        let mut scenario =
            Scenario::new(JointConfig::from_degrees(c.start_deg), Point3::from(c.goal));
        scenario.horizon = c.horizon.unwrap();
        scenario.thresholds = c.thresholds.unwrap();
        scenario.n_f = c.n_f.unwrap();
        scenario.goal_tolerance = c.goal_tolerance.unwrap();
        scenario.avoidance_mode = c.avoidance_mode.unwrap();
        scenario.weights = c.cost_weights.unwrap();
        scenario.obstacles = c
            .obstacles
            .iter()
            .enumerate()
            .map(|(j, entry)| {
                let built = match *entry {
                    ObstacleEntry::Sphere {
                        center,
                        radius,
                        velocity,
                    } => Obstacle::new(center.into(), radius, velocity.into()),
                    ObstacleEntry::Cube {
                        center,
                        edge,
                        velocity,
                    } => Obstacle::from_cube(center.into(), edge, velocity.into()),
                };
                built.map_err(|e| match e {
                    Error::InvalidField { field, reason } => {
                        Error::field(format!("obstacles[{j}].{field}"), reason)
                    }
                    other => other,
                })
            })
            .collect::<Result<_>>()?;
        scenario.validate()?;
        if !arm.within_limits(&scenario.start) {
            return Err(Error::field(
                "start_deg",
                "start configuration violates joint limits",
            ));
        }

        let de_sec = c.de.unwrap();
        let de = DeSettings {
            population_size: de_sec.population_size.unwrap(),
            scale_factor: de_sec.scale_factor.unwrap(),
            crossover_prob: de_sec.crossover_prob.unwrap(),
            max_iterations: de_sec.max_iterations.unwrap(),
            seed: de_sec.seed.unwrap(),
        };
        de.validate()
            .map_err(|e| Error::field("de", e.to_string()))?;

        Ok(LoadedScenario { scenario, arm, de })
    }
}
