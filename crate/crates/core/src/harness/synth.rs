//! Synthetic test functions and noisy mod-1 data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circle::{mod1, Mod1Value};
use crate::error::{Error, Result};
use crate::grid::{GridField, UniformGrid};
use crate::rng;

/// One term `a cos(2π⟨ω, x⟩ + φ)` of a planted function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTerm {
    pub amplitude: f64,
    pub frequency: Vec<f64>,
    pub phase: f64,
}

/// `f(x) = offset + Σ a cos(2π⟨ω, x⟩ + φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedFunction {
    pub terms: Vec<PlantedTerm>,
    pub offset: f64,
}

impl PlantedFunction {
    /// Random trigonometric polynomial on `[0,1]^d` with integer frequencies
    /// in `[-max_freq, max_freq]` and amplitudes rescaled so the ℓ∞-Lipschitz
    /// constant equals `lipschitz`.
    pub fn random(d: usize, n_terms: usize, max_freq: i64, lipschitz: f64, seed: u64) -> Self {
        let mut draw = 0u64;
        let mut next = || {
            draw += 1;
            rng::uniform(seed, draw)
        };
        let span = (2 * max_freq + 1) as f64;
        let mut terms: Vec<PlantedTerm> = (0..n_terms)
            .map(|_| {
                let mut frequency: Vec<f64> = (0..d).map(|_| ((next() * span).floor() as i64 - max_freq) as f64).collect();
                if frequency.iter().all(|&w| w == 0.0) {
                    frequency[0] = 1.0;
                }
                PlantedTerm {
                    amplitude: 0.5 + next(),
                    frequency,
                    phase: 2.0 * PI * next(),
                }
            })
            .collect();
        let raw = PlantedFunction { terms: terms.clone(), offset: 0.0 }.lipschitz();
        for t in &mut terms {
            t.amplitude *= lipschitz / raw;
        }
        PlantedFunction { terms, offset: 2.0 * next() - 1.0 }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.offset
            + self
                .terms
                .iter()
                .map(|t| {
                    let dot: f64 = t.frequency.iter().zip(x).map(|(w, xi)| w * xi).sum();
                    t.amplitude * (2.0 * PI * dot + t.phase).cos()
                })
                .sum::<f64>()
    }

    /// `Σ 2π|a| ‖ω‖₁`, a Lipschitz constant w.r.t. ℓ∞.
    pub fn lipschitz(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| 2.0 * PI * t.amplitude.abs() * t.frequency.iter().map(|w| w.abs()).sum::<f64>())
            .sum()
    }

    fn dimension(&self) -> Option<usize> {
        self.terms.first().map(|t| t.frequency.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TestFunction {
    /// `sin(4πx)` on `[0, 1]`.
    Example1,
    /// `4x cos²(2πx) - 2 sin²(2πx) + 4.7` on `[0, 1]`.
    Example2,
    Planted(PlantedFunction),
}

pub fn example1(x: f64) -> f64 {
    (4.0 * PI * x).sin()
}

pub fn example2(x: f64) -> f64 {
    let (s, c) = (2.0 * PI * x).sin_cos();
    4.0 * x * c * c - 2.0 * s * s + 4.7
}

/// Largest absolute forward difference of `example2` on a `10⁵`-point grid,
/// times the number of intervals.
pub fn example2_lipschitz_numeric() -> f64 {
    const POINTS: usize = 100_000;
    let h = 1.0 / (POINTS - 1) as f64;
    (1..POINTS)
        .map(|i| (example2(i as f64 * h) - example2((i - 1) as f64 * h)).abs())
        .fold(0.0, f64::max)
        * (POINTS - 1) as f64
}

impl TestFunction {
    pub fn check_dimension(&self, d: usize) -> Result<()> {
        match self {
            TestFunction::Example1 | TestFunction::Example2 if d != 1 => {
                Err(Error::invalid(format!("example functions are one-dimensional, got d = {d}")))
            }
            TestFunction::Planted(p) if p.dimension().is_some_and(|pd| pd != d) => Err(Error::invalid(format!(
                "planted function has dimension {}, grid has d = {d}",
                p.dimension().unwrap_or(0)
            ))),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Example1 => example1(x[0]),
            TestFunction::Example2 => example2(x[0]),
            TestFunction::Planted(p) => p.eval(x),
        }
    }

    /// Lipschitz constant w.r.t. ℓ∞; numeric for `Example2`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            TestFunction::Example1 => 4.0 * PI,
            TestFunction::Example2 => example2_lipschitz_numeric(),
            TestFunction::Planted(p) => p.lipschitz(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TestFunction::Example1 => "example1",
            TestFunction::Example2 => "example2",
            TestFunction::Planted(_) => "planted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub function: TestFunction,
    pub d: usize,
    pub m: usize,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub truth: GridField<f64>,
    pub noisy_mod: GridField<Mod1Value>,
}

/// Gaussian noise `η_i ~ N(0, σ²)` keyed by `(seed, lexicographic index)`.
pub fn noise(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    (0..n as u64).map(|i| sigma * rng::standard_normal(seed, i)).collect()
}

/// Adds seeded noise to `truth` and reduces modulo 1.
pub fn corrupt(truth: &GridField<f64>, sigma: f64, seed: u64) -> Result<GridField<Mod1Value>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma = {sigma} must be non-negative")));
    }
    let values = if sigma == 0.0 {
        truth.values().iter().map(|&f| mod1(f)).collect::<Result<Vec<_>>>()?
    } else {
        let eta = noise(truth.values().len(), sigma, seed);
        truth.values().iter().zip(&eta).map(|(&f, &e)| mod1(f + e)).collect::<Result<Vec<_>>>()?
    };
    GridField::new(truth.grid(), values)
}

/// Samples the test function on the grid and returns clean and noisy
/// mod-1 fields.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.function.check_dimension(spec.d)?;
    let grid = UniformGrid::new(spec.d, spec.m)?;
    let truth = GridField::from_fn(grid, |x| spec.function.eval(x));
    let noisy_mod = corrupt(&truth, spec.sigma, spec.seed)?;
    Ok(SyntheticData { truth, noisy_mod })
}
