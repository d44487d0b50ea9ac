//! Tensor-product multilinear interpolation of grid samples, used to turn
//! unwrapped samples into an estimate of `f` on the whole cube.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridField, UniformGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolantModel {
    samples: GridField<f64>,
}

/// Stores the samples; evaluation is linear in them.
pub fn fit(ftilde: &GridField<f64>) -> InterpolantModel {
    InterpolantModel {
        samples: ftilde.clone(),
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else {
        a + t * (b - a)
    }
}

impl InterpolantModel {
    pub fn grid(&self) -> UniformGrid {
        self.samples.grid()
    }

    pub fn samples(&self) -> &GridField<f64> {
        &self.samples
    }

    /// Multilinear interpolation over the cell containing `x`. The result
    /// lies between the smallest and largest corner values of that cell.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let grid = self.grid();
        let (d, m) = (grid.d(), grid.m());
        if x.len() != d {
            return Err(Error::invalid(format!("point has {} coordinates, grid has d = {d}", x.len())));
        }
        if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::domain(format!("coordinate {bad} outside [0, 1]")));
        }
        let mut base = 0usize;
        let mut weights = Vec::with_capacity(d);
        for (axis, &xj) in x.iter().enumerate() {
            let mut s = xj * (m - 1) as f64;
            let nearest = s.round();
            if (s - nearest).abs() <= 1e-12 * m as f64 {
                s = nearest;
            }
            let cell = (s.floor() as usize).min(m - 2);
            weights.push(s - cell as f64);
            base += cell * grid.stride(axis);
        }
        let values = self.samples.values();
        let mut corners: Vec<f64> = (0..1usize << d)
            .map(|code| {
                let offset: usize = (0..d)
                    .filter(|axis| code >> (d - 1 - axis) & 1 == 1)
                    .map(|axis| grid.stride(axis))
                    .sum();
                values[base + offset]
            })
            .collect();
        let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // corners are in lexicographic order, so the last axis pairs adjacent entries
        for axis in (0..d).rev() {
            let t = weights[axis];
            corners = corners.chunks(2).map(|p| lerp(p[0], p[1], t)).collect();
        }
        Ok(corners[0].clamp(lo, hi))
    }

    pub fn evaluate_many(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.iter().map(|p| self.evaluate(p)).collect()
    }
}
