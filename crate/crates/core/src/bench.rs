//! Standard test functions for exercising the optimizer in isolation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::de::{self, DeParams, DeResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchFunction {
    Sphere,
    Rosenbrock,
    Rastrigin,
}

impl BenchFunction {
    pub const ALL: [BenchFunction; 3] = [Self::Sphere, Self::Rosenbrock, Self::Rastrigin];

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Self::Sphere => x.iter().map(|v| v * v).sum(),
            Self::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum(),
            Self::Rastrigin => {
                10.0 * x.len() as f64
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
        }
    }

    /// Conventional symmetric search half-width.
    pub fn half_width(self) -> f64 {
        match self {
            Self::Sphere | Self::Rosenbrock => 5.0,
            Self::Rastrigin => 5.12,
        }
    }

    pub fn params(self, dim: usize, seed: u64) -> DeParams {
        let w = self.half_width();
        DeParams::new(vec![-w; dim], vec![w; dim], seed)
    }
}

impl fmt::Display for BenchFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sphere => "sphere",
            Self::Rosenbrock => "rosenbrock",
            Self::Rastrigin => "rastrigin",
        })
    }
}

impl FromStr for BenchFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sphere" => Ok(Self::Sphere),
            "rosenbrock" => Ok(Self::Rosenbrock),
            "rastrigin" => Ok(Self::Rastrigin),
            _ => Err(Error::UnknownFunction(s.to_string())),
        }
    }
}

pub fn de_bench(function: BenchFunction, params: &DeParams) -> Result<DeResult> {
    de::run(|x| Ok(function.eval(x)), params)
}
