//! Terrain demo: scale an elevation map down, observe it modulo 1 with
//! noise, and compare denoise-then-unwrap against unwrapping the raw
//! samples.

use serde::{Deserialize, Serialize};

use super::metrics::{metrics, Method, TrialResult};
use super::run_pipeline;
use super::synth::corrupt;
use crate::circle::Mod1Value;
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::grid::{GridField, UniformGrid};
use crate::unwrap::{itoh_check, unwrap_multid, ItohCheck};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElevationOptions {
    /// Elevations are divided by this before reduction modulo 1.
    pub scale: f64,
    pub sigma: f64,
    pub k: usize,
    pub seed: u64,
}

impl Default for ElevationOptions {
    fn default() -> Self {
        ElevationOptions {
            scale: 500.0,
            sigma: 0.1,
            k: 40,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElevationDemo {
    pub m: usize,
    pub truth: GridField<f64>,
    pub noisy: GridField<Mod1Value>,
    pub denoised: GridField<Mod1Value>,
    pub unwrapped: GridField<f64>,
    /// Unwrapping of the noisy samples without denoising.
    pub naive_unwrapped: GridField<f64>,
    pub metrics: TrialResult,
    pub naive_metrics: TrialResult,
    /// Largest change of the scaled terrain between grid neighbours
    /// (diagonals included).
    pub clean_step: f64,
    /// Noise-free unwrapping condition with `M = clean_step·(m-1)`.
    pub clean_itoh: ItohCheck,
}

/// A cone of the given height centred in an `m × m` map.
pub fn cone_terrain(m: usize, height: f64) -> Vec<Vec<f64>> {
    let c = (m - 1) as f64 / 2.0;
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let r = ((i as f64 - c).powi(2) + (j as f64 - c).powi(2)).sqrt() / c.max(1.0);
                    height * (1.0 - r).max(0.0)
                })
                .collect()
        })
        .collect()
}

fn square_field(rows: &[Vec<f64>], scale: f64) -> Result<GridField<f64>> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::invalid("elevation map is empty"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != rows[0].len()) {
        return Err(Error::Format {
            line: i + 1,
            msg: format!("row has {} values, first row has {}", rows[i].len(), rows[0].len()),
        });
    }
    if rows[0].len() != m {
        return Err(Error::invalid(format!(
            "elevation map is {m} × {}; crop it to a square first",
            rows[0].len()
        )));
    }
    let grid = UniformGrid::new(2, m)?;
    GridField::new(grid, rows.iter().flatten().map(|v| v / scale).collect())
}

fn max_neighbour_step(field: &GridField<f64>) -> Result<f64> {
    let graph = GraphSpec::grid_linf(field.grid(), 1)?;
    let v = field.values();
    Ok(graph.edges().iter().map(|&(a, b)| (v[a] - v[b]).abs()).fold(0.0, f64::max))
}

pub fn elevation_demo(rows: &[Vec<f64>], opts: &ElevationOptions) -> Result<ElevationDemo> {
    if !(opts.scale > 0.0 && opts.scale.is_finite()) {
        return Err(Error::invalid(format!("scale = {} must be positive", opts.scale)));
    }
    let truth = square_field(rows, opts.scale)?;
    let m = truth.grid().m();
    let noisy = corrupt(&truth, opts.sigma, opts.seed)?;
    let out = run_pipeline(&noisy, opts.k)?;
    let naive = unwrap_multid(&noisy);
    let clean_step = max_neighbour_step(&truth)?;
    let clean_itoh = if clean_step > 0.0 {
        itoh_check(0.0, clean_step * (m - 1) as f64, m)?
    } else {
        ItohCheck {
            satisfied: true,
            margin: 0.5,
        }
    };
    Ok(ElevationDemo {
        m,
        metrics: metrics(&out.ftilde, &out.ghat, &noisy, &truth, Method::Knn, opts.seed)?,
        naive_metrics: metrics(&naive.ftilde, &noisy, &noisy, &truth, Method::Knn, opts.seed)?,
        denoised: out.ghat,
        unwrapped: out.ftilde,
        naive_unwrapped: naive.ftilde,
        truth,
        noisy,
        clean_step,
        clean_itoh,
    })
}
