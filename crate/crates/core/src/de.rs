//! Box-constrained Differential Evolution (rand/1/bin).
//!
//! All randomness comes from one ChaCha8 stream seeded by
//! [`DeParams::seed`]. Draw order is fixed so runs are reproducible across
//! platforms:
//!
//! 1. initial population, individual by individual, coordinate by coordinate;
//! 2. per generation and per target `i`: donor indices `r1, r2, r3`
//!    (rejection sampled), then `j_rand`, then one uniform per coordinate for
//!    the crossover test.
//!
//! With [`Updating::Immediate`] (the default) a winning trial replaces its
//! target before the next target is processed; [`Updating::Deferred`] builds
//! every trial of a generation from the previous population first. The RNG
//! draw order is the same in both modes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type DeRng = ChaCha8Rng;

pub const DEFAULT_POPULATION: usize = 150;
pub const DEFAULT_SCALE_FACTOR: f64 = 0.8;
pub const DEFAULT_CROSSOVER: f64 = 0.96;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct DeParams {
    pub population_size: usize,
    pub scale_factor: f64,
    pub crossover_prob: f64,
    pub max_iterations: usize,
    pub lower_bounds: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    pub seed: u64,
    /// Stop once the best cost is at or below this value.
    pub target_cost: Option<f64>,
    pub updating: Updating,
}

/// When a winning trial enters the population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Updating {
    /// Replaces its target at once, so later mutants of the same generation
    /// can already draw on it.
    #[default]
    Immediate,
    /// All trials of a generation are built from the previous population.
    Deferred,
}

impl DeParams {
    /// Population and control settings default to 150 / 0.8 / 0.96 / 100.
    pub fn new(lower_bounds: Vec<f64>, upper_bounds: Vec<f64>, seed: u64) -> Self {
        Self {
            population_size: DEFAULT_POPULATION,
            scale_factor: DEFAULT_SCALE_FACTOR,
            crossover_prob: DEFAULT_CROSSOVER,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            lower_bounds,
            upper_bounds,
            seed,
            target_cost: None,
            updating: Updating::default(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.lower_bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDeParams(msg));
        if self.population_size < 4 {
            return bad(format!(
                "population size must be >= 4, got {}",
                self.population_size
            ));
        }
        if self.dimension() == 0 {
            return bad("dimension must be >= 1".into());
        }
        if self.lower_bounds.len() != self.upper_bounds.len() {
            return bad(format!(
                "bound lengths differ: {} vs {}",
                self.lower_bounds.len(),
                self.upper_bounds.len()
            ));
        }
        if !(0.0..=2.0).contains(&self.scale_factor) {
            return bad(format!("F must lie in [0, 2], got {}", self.scale_factor));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad(format!(
                "Cr must lie in [0, 1], got {}",
                self.crossover_prob
            ));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be >= 1".into());
        }
        for (j, (lo, hi)) in self.lower_bounds.iter().zip(&self.upper_bounds).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!(
                    "bounds of dimension {j} need lower < upper, got [{lo}, {hi}]"
                ));
            }
        }
        Ok(())
    }

    pub fn rng(&self) -> DeRng {
        DeRng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub best_vector: Vec<f64>,
    pub best_cost: f64,
    /// Best-so-far cost after each generation.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

/// Uniform population covering the box.
pub fn init_population(params: &DeParams, rng: &mut DeRng) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    Ok((0..params.population_size)
        .map(|_| {
            params
                .lower_bounds
                .iter()
                .zip(&params.upper_bounds)
                .map(|(&lo, &hi)| rng.random_range(lo..=hi))
                .collect()
        })
        .collect())
}

/// Three mutually distinct indices in `0..np`, all different from `target`.
pub fn pick_donors(np: usize, target: usize, rng: &mut DeRng) -> [usize; 3] {
    debug_assert!(np >= 4 && target < np);
    let mut picked = [usize::MAX; 3];
    for k in 0..3 {
        loop {
            let r = rng.random_range(0..np);
            if r != target && !picked[..k].contains(&r) {
                picked[k] = r;
                break;
            }
        }
    }
    picked
}

/// `x_r1 + F (x_r2 - x_r3)` clamped to the box.
pub fn mutate(
    population: &[Vec<f64>],
    target: usize,
    scale_factor: f64,
    lower: &[f64],
    upper: &[f64],
    rng: &mut DeRng,
) -> Vec<f64> {
    let [r1, r2, r3] = pick_donors(population.len(), target, rng);
    debug_assert!(r1 != r2 && r2 != r3 && r1 != r3 && ![r1, r2, r3].contains(&target));
    differential_mutant(
        &population[r1],
        &population[r2],
        &population[r3],
        scale_factor,
    )
    .into_iter()
    .zip(lower.iter().zip(upper))
    .map(|(v, (&lo, &hi))| v.clamp(lo, hi))
    .collect()
}

/// Unclamped rand/1 mutant.
pub fn differential_mutant(
    base: &[f64],
    plus: &[f64],
    minus: &[f64],
    scale_factor: f64,
) -> Vec<f64> {
    base.iter()
        .zip(plus.iter().zip(minus))
        .map(|(&b, (&p, &m))| b + scale_factor * (p - m))
        .collect()
}

/// Binomial crossover; coordinate `j_rand` always comes from the mutant.
pub fn crossover(target: &[f64], mutant: &[f64], crossover_prob: f64, rng: &mut DeRng) -> Vec<f64> {
    let j_rand = rng.random_range(0..target.len());
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&x, &v))| {
            let u: f64 = rng.random();
            if u <= crossover_prob || j == j_rand {
                v
            } else {
                x
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Survivor {
    Target,
    Trial,
}

/// Greedy one-to-one selection. Ties go to the trial.
pub fn select(target_cost: f64, trial_cost: f64) -> Result<Survivor> {
    for c in [target_cost, trial_cost] {
        if !c.is_finite() {
            return Err(Error::NonFiniteCost(c));
        }
    }
    Ok(if trial_cost <= target_cost {
        Survivor::Trial
    } else {
        Survivor::Target
    })
}

fn checked(cost: f64) -> Result<f64> {
    if cost.is_finite() {
        Ok(cost)
    } else {
        Err(Error::NonFiniteCost(cost))
    }
}

fn make_trial(population: &[Vec<f64>], i: usize, params: &DeParams, rng: &mut DeRng) -> Vec<f64> {
    let mutant = mutate(
        population,
        i,
        params.scale_factor,
        &params.lower_bounds,
        &params.upper_bounds,
        rng,
    );
    crossover(&population[i], &mutant, params.crossover_prob, rng)
}

/// Minimizes `cost` over the box described by `params`.
pub fn run<F>(mut cost: F, params: &DeParams) -> Result<DeResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut rng = params.rng();
    let mut population = init_population(params, &mut rng)?;
    let mut costs = population
        .iter()
        .map(|x| cost(x).and_then(checked))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = population.len();

    let best_index = |costs: &[f64]| {
        // first minimum wins
        costs
            .iter()
            .enumerate()
            .fold(0, |best, (i, &c)| if c < costs[best] { i } else { best })
    };
    let mut best = best_index(&costs);
    let mut history = Vec::with_capacity(params.max_iterations);

    for _ in 0..params.max_iterations {
        match params.updating {
            Updating::Immediate => {
                for i in 0..population.len() {
                    let trial = make_trial(&population, i, params, &mut rng);
                    let trial_cost = cost(&trial)?;
                    evaluations += 1;
                    if select(costs[i], trial_cost)? == Survivor::Trial {
                        population[i] = trial;
                        costs[i] = trial_cost;
                    }
                }
            }
            Updating::Deferred => {
                let trials: Vec<Vec<f64>> = (0..population.len())
                    .map(|i| make_trial(&population, i, params, &mut rng))
                    .collect();
                for (i, trial) in trials.into_iter().enumerate() {
                    let trial_cost = cost(&trial)?;
                    evaluations += 1;
                    if select(costs[i], trial_cost)? == Survivor::Trial {
                        population[i] = trial;
                        costs[i] = trial_cost;
                    }
                }
            }
        }
        best = best_index(&costs);
        history.push(costs[best]);
        if params
            .target_cost
            .is_some_and(|target| costs[best] <= target)
        {
            break;
        }
    }

    Ok(DeResult {
        best_vector: population.swap_remove(best),
        best_cost: costs[best],
        history,
        evaluations,
    })
}
