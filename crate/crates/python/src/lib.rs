//! Python bindings for the `armplan` planner.
//!
//! Angles are radians except where a name ends in `_deg`. Points are
//! `(x, y, z)` tuples.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use armplan::bench::{de_bench as run_bench, BenchFunction};
use armplan::collision::{self, AvoidanceMode, Obstacle};
use armplan::de::{self, DeParams};
use armplan::energy;
use armplan::kinematics::{self, ArmModel, JointConfig, JointLimit, Point3};
use armplan::montecarlo::{self, MonteCarloConfig};
use armplan::output;
use armplan::planner::{self, DeSettings, Scenario, StepRecord, Trajectory};
use armplan::scenario::load_scenario;

type Vec3 = (f64, f64, f64);

fn err(e: armplan::Error) -> PyErr {
    match e {
        armplan::Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn point(p: Vec3) -> Point3 {
    Point3::new(p.0, p.1, p.2)
}

fn tuple(p: &Point3) -> Vec3 {
    (p.x, p.y, p.z)
}

fn config(q: Vec3) -> JointConfig {
    JointConfig::new(q.0, q.1, q.2)
}

fn parse_mode(name: &str) -> PyResult<AvoidanceMode> {
    match name {
        "zero_when_safe" => Ok(AvoidanceMode::ZeroWhenSafe),
        "paper_literal" => Ok(AvoidanceMode::PaperLiteral),
        _ => Err(PyValueError::new_err(format!(
            "unknown avoidance mode `{name}`"
        ))),
    }
}

/// Three-link arm: lengths, point masses, joint limits and step cap.
#[pyclass(name = "Arm", module = "armplan_py", frozen)]
pub struct PyArm {
    inner: ArmModel,
}

#[pymethods]
impl PyArm {
    #[new]
    #[pyo3(signature = (
        link_lengths = (1.0, 1.0, 1.0),
        masses = (0.1, 0.1, 0.1),
        inertias = None,
        gravity = 1.0,
        joint_limits_deg = None,
        max_step_deg = 20.0,
    ))]
    fn new(
        link_lengths: Vec3,
        masses: Vec3,
        inertias: Option<Vec3>,
        gravity: f64,
        joint_limits_deg: Option<[(f64, f64); 3]>,
        max_step_deg: f64,
    ) -> PyResult<Self> {
        let limits = match joint_limits_deg {
            Some(l) => l.map(|(lo, hi)| JointLimit::from_degrees(lo, hi)),
            None => kinematics::default_joint_limits(),
        };
        let inner = ArmModel::new(
            link_lengths.into(),
            masses.into(),
            inertias.map(Into::into),
            gravity,
            limits,
            max_step_deg.to_radians(),
        )
        .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn link_lengths(&self) -> [f64; 3] {
        self.inner.link_lengths
    }

    #[getter]
    fn masses(&self) -> [f64; 3] {
        self.inner.masses
    }

    #[getter]
    fn inertias(&self) -> [f64; 3] {
        self.inner.inertias
    }

    #[getter]
    fn gravity(&self) -> f64 {
        self.inner.gravity
    }

    /// `(min, max)` per joint in radians.
    #[getter]
    fn joint_limits(&self) -> [(f64, f64); 3] {
        self.inner.joint_limits.map(|l| (l.min, l.max))
    }

    #[getter]
    fn max_step(&self) -> f64 {
        self.inner.max_step
    }

    fn end_effector(&self, q: Vec3) -> Vec3 {
        tuple(&kinematics::end_effector(&self.inner, &config(q)))
    }

    /// Base, shoulder, elbow and end effector.
    fn joint_points(&self, q: Vec3) -> Vec<Vec3> {
        kinematics::joint_points(&self.inner, &config(q))
            .iter()
            .map(tuple)
            .collect()
    }

    fn within_limits(&self, q: Vec3) -> bool {
        self.inner.within_limits(&config(q))
    }

    fn potential_energy(&self, q: Vec3) -> f64 {
        energy::potential_energy(&self.inner, &config(q))
    }

    /// `|dP| + K` for the step `prev -> next`.
    fn energy_cost(&self, prev: Vec3, next: Vec3) -> f64 {
        energy::energy_cost(&self.inner, &config(prev), &config(next))
    }

    fn __repr__(&self) -> String {
        format!(
            "Arm(link_lengths={:?}, masses={:?}, gravity={})",
            self.inner.link_lengths, self.inner.masses, self.inner.gravity
        )
    }
}

/// Sphere moving with constant velocity per unit time.
#[pyclass(name = "Obstacle", module = "armplan_py", frozen)]
pub struct PyObstacle {
    inner: Obstacle,
}

#[pymethods]
impl PyObstacle {
    #[new]
    #[pyo3(signature = (center, radius, velocity = (0.0, 0.0, 0.0)))]
    fn new(center: Vec3, radius: f64, velocity: Vec3) -> PyResult<Self> {
        let inner = Obstacle::new(point(center), radius, point(velocity)).map_err(err)?;
        Ok(Self { inner })
    }

    /// Sphere circumscribing a cube of edge `edge`.
    #[staticmethod]
    #[pyo3(signature = (center, edge, velocity = (0.0, 0.0, 0.0)))]
    fn cube(center: Vec3, edge: f64, velocity: Vec3) -> PyResult<Self> {
        let inner = Obstacle::from_cube(point(center), edge, point(velocity)).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn center(&self) -> Vec3 {
        tuple(&self.inner.initial_center)
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius
    }

    #[getter]
    fn velocity(&self) -> Vec3 {
        tuple(&self.inner.velocity)
    }

    fn center_at(&self, t: u32) -> Vec3 {
        tuple(&self.inner.center_at(t))
    }

    fn __repr__(&self) -> String {
        format!(
            "Obstacle(center={:?}, radius={}, velocity={:?})",
            self.center(),
            self.inner.radius,
            self.velocity()
        )
    }
}

/// Planned waypoints with per-step diagnostics.
#[pyclass(name = "Trajectory", module = "armplan_py", frozen)]
pub struct PyTrajectory {
    inner: Trajectory,
}

impl PyTrajectory {
    fn column<T>(&self, f: impl Fn(&StepRecord) -> T) -> Vec<T> {
        self.inner.records.iter().map(f).collect()
    }
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn success(&self) -> bool {
        self.inner.is_success()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }

    #[getter]
    fn waypoints(&self) -> Vec<[f64; 3]> {
        self.column(|r| r.config.0)
    }

    #[getter]
    fn end_effectors(&self) -> Vec<Vec3> {
        self.column(|r| tuple(&r.end_effector))
    }

    #[getter]
    fn distances(&self) -> Vec<f64> {
        self.column(StepRecord::distance)
    }

    #[getter]
    fn threats(&self) -> Vec<bool> {
        self.column(|r| r.threat)
    }

    /// DE best-so-far cost per generation, one list per planned step.
    #[getter]
    fn histories(&self) -> Vec<Vec<f64>> {
        self.inner.records[1..]
            .iter()
            .map(|r| r.history.clone())
            .collect()
    }

    #[getter]
    fn initial_distance(&self) -> f64 {
        self.inner.initial_distance()
    }

    #[getter]
    fn final_distance(&self) -> f64 {
        self.inner.final_distance()
    }

    #[getter]
    fn total_energy(&self) -> f64 {
        self.inner.total_energy()
    }

    /// Cost terms of every waypoint as a list of dicts.
    fn costs<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .records
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("delta_potential", r.cost.delta_potential)?;
                d.set_item("kinetic", r.cost.kinetic)?;
                d.set_item("distance", r.cost.distance)?;
                d.set_item("avoidance", r.cost.avoidance)?;
                d.set_item("total", r.cost.total)?;
                d.set_item("min_clearance", r.min_gap())?;
                Ok(d)
            })
            .collect()
    }

    fn trajectory_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        output::write_trajectory_to(&self.inner, &mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    fn trace_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        output::write_trace_to(&self.inner, &mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(success={}, steps={}, final_distance={})",
            self.inner.is_success(),
            self.inner.steps(),
            self.inner.final_distance()
        )
    }
}

/// Closed-segment clearance between segment `a`-`b` and point `c`.
#[pyfunction]
fn segment_clearance<'py>(
    py: Python<'py>,
    a: Vec3,
    b: Vec3,
    c: Vec3,
) -> PyResult<Bound<'py, PyDict>> {
    let g = collision::segment_clearance(&point(a), &point(b), &point(c)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("d", g.d)?;
    d.set_item("leg_a", g.leg_a)?;
    d.set_item("leg_b", g.leg_b)?;
    d.set_item("within", g.within)?;
    d.set_item("endpoint_distance", g.endpoint_distance)?;
    d.set_item("segment_distance", g.segment_distance())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (
    arm, start, goal, obstacles = Vec::new(), *,
    horizon = 20, thresholds = (0.1, 0.1, 0.1), n_f = 10_000.0, goal_tolerance = 0.1,
    avoidance_mode = "zero_when_safe",
    population_size = 150, scale_factor = 0.8, crossover_prob = 0.96, max_iterations = 100,
    seed = 0,
))]
#[allow(clippy::too_many_arguments)]
fn plan(
    py: Python<'_>,
    arm: PyRef<'_, PyArm>,
    start: Vec3,
    goal: Vec3,
    obstacles: Vec<PyRef<'_, PyObstacle>>,
    horizon: u32,
    thresholds: Vec3,
    n_f: f64,
    goal_tolerance: f64,
    avoidance_mode: &str,
    population_size: usize,
    scale_factor: f64,
    crossover_prob: f64,
    max_iterations: usize,
    seed: u64,
) -> PyResult<PyTrajectory> {
    let mut scenario = Scenario::new(config(start), point(goal));
    scenario.obstacles = obstacles.iter().map(|o| o.inner).collect();
    scenario.horizon = horizon;
    scenario.thresholds = thresholds.into();
    scenario.n_f = n_f;
    scenario.goal_tolerance = goal_tolerance;
    scenario.avoidance_mode = parse_mode(avoidance_mode)?;
    let settings = DeSettings {
        population_size,
        scale_factor,
        crossover_prob,
        max_iterations,
        seed,
    };
    let arm = arm.inner.clone();
    let inner = py
        .detach(|| planner::plan(&scenario, &arm, &settings))
        .map_err(err)?;
    Ok(PyTrajectory { inner })
}

/// Loads a TOML scenario file and plans it.
#[pyfunction]
#[pyo3(signature = (path, seed = None))]
fn plan_file(
    py: Python<'_>,
    path: std::path::PathBuf,
    seed: Option<u64>,
) -> PyResult<PyTrajectory> {
    let mut loaded = load_scenario(&path).map_err(err)?;
    if let Some(seed) = seed {
        loaded.de.seed = seed;
    }
    let inner = py
        .detach(|| planner::plan(&loaded.scenario, &loaded.arm, &loaded.de))
        .map_err(err)?;
    Ok(PyTrajectory { inner })
}

fn de_result<'py>(py: Python<'py>, r: &de::DeResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("best_vector", r.best_vector.clone())?;
    d.set_item("best_cost", r.best_cost)?;
    d.set_item("history", r.history.clone())?;
    d.set_item("evaluations", r.evaluations)?;
    Ok(d)
}

/// Minimises a Python callable over a box with DE/rand/1/bin.
#[pyfunction]
#[pyo3(signature = (
    func, lower, upper, *,
    population_size = 150, scale_factor = 0.8, crossover_prob = 0.96, max_iterations = 100,
    seed = 0, target_cost = None,
))]
#[allow(clippy::too_many_arguments)]
fn minimize<'py>(
    py: Python<'py>,
    func: Bound<'py, PyAny>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    population_size: usize,
    scale_factor: f64,
    crossover_prob: f64,
    max_iterations: usize,
    seed: u64,
    target_cost: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let params = DeParams {
        population_size,
        scale_factor,
        crossover_prob,
        max_iterations,
        target_cost,
        ..DeParams::new(lower, upper, seed)
    };
    let mut raised = None;
    let result = de::run(
        |x| match func.call1((x.to_vec(),)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => Ok(v),
            Err(e) => {
                raised = Some(e);
                Err(armplan::Error::NonFiniteCost(f64::NAN))
            }
        },
        &params,
    );
    if let Some(e) = raised {
        return Err(e);
    }
    de_result(py, &result.map_err(err)?)
}

/// Runs DE on `sphere`, `rosenbrock` or `rastrigin`.
#[pyfunction]
#[pyo3(signature = (
    function, dim = 6, *,
    population_size = 150, scale_factor = 0.8, crossover_prob = 0.96, max_iterations = 100,
    seed = 0,
))]
#[allow(clippy::too_many_arguments)]
fn de_bench<'py>(
    py: Python<'py>,
    function: &str,
    dim: usize,
    population_size: usize,
    scale_factor: f64,
    crossover_prob: f64,
    max_iterations: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let function: BenchFunction = function.parse().map_err(err)?;
    let mut params = function.params(dim, seed);
    params.population_size = population_size;
    params.scale_factor = scale_factor;
    params.crossover_prob = crossover_prob;
    params.max_iterations = max_iterations;
    let r = py.detach(|| run_bench(function, &params)).map_err(err)?;
    de_result(py, &r)
}

/// Seeded random trials with the default arm; returns summary statistics.
#[pyfunction]
#[pyo3(signature = (trials = 100, seed = 0, obstacles = 3))]
fn monte_carlo<'py>(
    py: Python<'py>,
    trials: usize,
    seed: u64,
    obstacles: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let config = MonteCarloConfig {
        trials,
        seed,
        obstacle_count: obstacles,
        ..MonteCarloConfig::default()
    };
    let template = montecarlo::default_template();
    let report = py
        .detach(|| montecarlo::montecarlo(&config, &template))
        .map_err(err)?;
    let s = report.stats;
    let d = PyDict::new(py);
    d.set_item("trials", s.trials)?;
    d.set_item("successes", s.successes)?;
    d.set_item("success_rate", s.success_rate)?;
    d.set_item("mean_final_distance", s.mean_final_distance)?;
    d.set_item("mean_step_energy", s.mean_step_energy)?;
    d.set_item("threat_rate", s.threat_rate)?;
    d.set_item("errors", s.errors)?;
    d.set_item("elapsed_s", report.elapsed.as_secs_f64())?;
    Ok(d)
}

#[pymodule]
pub fn armplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyArm>()?;
    m.add_class::<PyObstacle>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(segment_clearance, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(plan_file, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(de_bench, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    Ok(())
}
