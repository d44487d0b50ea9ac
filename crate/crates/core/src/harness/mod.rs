//! Synthetic experiments: data generation, the denoise-then-unwrap
//! pipeline, metrics, Monte Carlo sweeps and the elevation demo.

pub mod elevation;
pub mod mc;
pub mod metrics;
pub mod synth;

use serde::{Deserialize, Serialize};

use crate::baselines::{solve_trs, solve_ucqp};
use crate::circle::{CircleSignal, Mod1Value};
use crate::error::Result;
use crate::graph::GraphSpec;
use crate::grid::GridField;
use crate::knn::denoise;
use crate::unwrap::{unwrap_multid, BranchCounts};

pub use elevation::{cone_terrain, elevation_demo, ElevationDemo, ElevationOptions};
pub use mc::{monte_carlo, rate_fit, GraphChoice, McConfig, McOutcome, McSummary, RateFit};
pub use metrics::{align, metrics, Method, TrialResult};
pub use synth::{generate, PlantedFunction, SyntheticData, SyntheticSpec, TestFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub ghat: GridField<Mod1Value>,
    pub ftilde: GridField<f64>,
    pub zero_resultants: usize,
    pub branch_counts: BranchCounts,
    pub itoh_margin: f64,
}

/// kNN denoising followed by unwrapping.
pub fn run_pipeline(noisy_mod: &GridField<Mod1Value>, k: usize) -> Result<PipelineOutput> {
    let den = denoise(noisy_mod, k)?;
    Ok(finish(den.field, den.zero_resultants))
}

/// Unwraps an already denoised field.
pub fn unwrap_denoised(ghat: GridField<Mod1Value>) -> PipelineOutput {
    finish(ghat, 0)
}

fn finish(ghat: GridField<Mod1Value>, zero_resultants: usize) -> PipelineOutput {
    let un = unwrap_multid(&ghat);
    PipelineOutput {
        ghat,
        ftilde: un.ftilde,
        zero_resultants,
        branch_counts: un.branch_counts,
        itoh_margin: un.itoh_margin,
    }
}

/// Denoises with a relaxed baseline on `graph`, reads the result back as
/// mod-1 values, and unwraps it.
pub fn run_baseline_pipeline(
    noisy_mod: &GridField<Mod1Value>,
    method: Method,
    graph: &GraphSpec,
    lambda: f64,
) -> Result<PipelineOutput> {
    let z = CircleSignal::from_mod1(noisy_mod.values());
    let signal = match method {
        Method::Knn => return Err(crate::Error::invalid("kNN is not a graph baseline")),
        Method::Ucqp => solve_ucqp(&z, graph, lambda, 1e-12)?.ghat,
        Method::Trs => solve_trs(&z, graph, lambda, 1e-12, 1e-10)?.ghat,
    };
    let ghat = GridField::new(noisy_mod.grid(), signal.to_mod1())?;
    Ok(unwrap_denoised(ghat))
}
