//! Recovery of a smooth real function from noisy modulo-1 samples on a
//! uniform grid: kNN denoising on the circle, grid unwrapping, a
//! graph-regularized QCQP denoiser with SDP tightness certificates, and a
//! simulation harness.

// `!(x >= 0.0)` style guards are deliberate: NaN has to fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod certificate;
pub mod circle;
pub mod error;
pub mod graph;
pub mod harness;
pub mod hermitian;
pub mod interp;
pub mod io;
pub mod grid;
pub mod knn;
pub mod qcqp;
pub mod rng;
pub mod unwrap;

pub use circle::{CircleSignal, Mod1Value, UnitComplex};
pub use error::{Error, Result};
pub use graph::GraphSpec;
pub use grid::{GridField, MultiIndex, UniformGrid};
pub use qcqp::{QcqpProblem, SolveOptions, SolveReport};
