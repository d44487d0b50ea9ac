//! kNN denoising of mod-1 samples on the circle, together with the
//! bandwidth rules and the risk bounds that go with it.
//!
//! Each sample is embedded as `z = exp(ι2πy)`, averaged over its ℓ∞ kNN
//! ball, projected back to the circle and read off as an angle. Ties at the
//! kNN radius are kept, so the average runs over `|𝒩_k(x)| ≥ k` points.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{arg_raw, embed_raw, project_raw, Mod1Value};
use crate::error::{Error, Result};
use crate::grid::{GridField, UniformGrid};

/// Neighbourhood averages shorter than this are treated as cancelled; their
/// direction is pure rounding noise.
const ZERO_RESULTANT_TOL: f64 = 1e-12;

/// Output of [`denoise`].
#[derive(Debug, Clone, PartialEq)]
pub struct Denoised {
    pub field: GridField<Mod1Value>,
    /// Grid points whose neighbourhood average vanished exactly; these are
    /// reported as `0.0`.
    pub zero_resultants: usize,
}

/// Denoises mod-1 samples with uniform kNN weights on the circle.
pub fn denoise(y: &GridField<Mod1Value>, k: usize) -> Result<Denoised> {
    let (estimates, zero_resultants) = circle_average(y, k)?;
    let values = estimates.iter().map(|&h| Mod1Value::new(arg_raw(h))).collect::<Result<_>>()?;
    Ok(Denoised {
        field: GridField::new(y.grid(), values)?,
        zero_resultants,
    })
}

/// The normalized circle estimates `ĥ_k(x_j)` at every grid point.
pub fn circle_estimates(y: &GridField<Mod1Value>, k: usize) -> Result<GridField<Complex64>> {
    let (estimates, _) = circle_average(y, k)?;
    GridField::new(y.grid(), estimates)
}

fn circle_average(y: &GridField<Mod1Value>, k: usize) -> Result<(Vec<Complex64>, usize)> {
    let grid = y.grid();
    let n = grid.n();
    if k < 1 || k > n {
        return Err(Error::invalid(format!("k = {k} outside [1, n = {n}]")));
    }
    let z: Vec<Complex64> = y.values().iter().map(|v| embed_raw(v.get())).collect();
    let results: Vec<(Complex64, bool)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let nbhd = grid.knn_box(j, k).expect("k and position validated");
            let positions = nbhd.positions();
            // fixed lexicographic summation order: identical under any scheduling
            let sum: Complex64 = positions.iter().map(|&i| z[i]).sum();
            let mean = sum / positions.len() as f64;
            if mean.norm() <= ZERO_RESULTANT_TOL {
                (Complex64::new(1.0, 0.0), true)
            } else {
                (project_raw(mean), false)
            }
        })
        .collect();
    let zeros = results.iter().filter(|(_, z)| *z).count();
    Ok((results.into_iter().map(|(h, _)| h).collect(), zeros))
}

/// Circle estimate `ĥ_k(x)` at an arbitrary point of the cube.
pub fn circle_estimate_at(y: &GridField<Mod1Value>, x: &[f64], k: usize) -> Result<Complex64> {
    let grid = y.grid();
    let members = grid.knn_set(x, k)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for idx in &members {
        sum += embed_raw(y.get(idx)?.get());
    }
    Ok(project_raw(sum / members.len() as f64))
}

/// How the number of neighbours is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum KRule {
    Explicit { k: usize },
    /// Minimizes the pointwise expected-risk bound.
    ExpectedRisk { sigma: f64, lipschitz: f64 },
    /// Minimizes the in-sample sup-norm bound.
    SupNorm { sigma: f64, lipschitz: f64 },
    /// `k = ⌈C n^{2/(d+2)} (log n)^{d/(d+2)}⌉`.
    Practical { c: f64 },
}

impl KRule {
    /// Resolves the rule to a concrete `k` for a grid of `n = m^d` points.
    pub fn resolve(&self, grid: UniformGrid) -> Result<usize> {
        let (d, n) = (grid.d(), grid.n());
        match *self {
            KRule::Explicit { k } => {
                if k < 1 || k > n {
                    return Err(Error::invalid(format!("k = {k} outside [1, n = {n}]")));
                }
                Ok(k)
            }
            KRule::ExpectedRisk { sigma, lipschitz } => {
                Ok(choose_k_expected_risk(d, sigma, lipschitz, n)?.k)
            }
            KRule::SupNorm { sigma, lipschitz } => {
                Ok(choose_k_sup_norm(d, sigma, lipschitz, n)?.k)
            }
            KRule::Practical { c } => choose_k_practical(n, d, c),
        }
    }
}

/// Result of a bandwidth rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KChoice {
    pub k: usize,
    /// Unrounded `k⋆`.
    pub k_star: f64,
    /// Set when `σ = 0` and only the bias term remains.
    pub bias_only: bool,
}

fn clamp_k(k_star: f64, n: usize) -> usize {
    if !(k_star >= 1.0) {
        return 1;
    }
    let k = k_star.ceil();
    if k >= n as f64 {
        n
    } else {
        k as usize
    }
}

fn check_sigma_lipschitz(sigma: f64, lipschitz: f64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma = {sigma} must be non-negative")));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid(format!("Lipschitz constant {lipschitz} must be positive")));
    }
    Ok(())
}

fn check_sample_count(d: usize, n: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if (n as f64) < 2f64.powi(d as i32) {
        return Err(Error::invalid(format!("n = {n} must be at least 2^d = {}", 1u64 << d)));
    }
    Ok(())
}

/// `k⋆ = (dσ²/(4M²))^{d/(d+2)} n^{2/(d+2)}`, the minimizer of the
/// expected-risk bound.
pub fn choose_k_expected_risk(d: usize, sigma: f64, lipschitz: f64, n: usize) -> Result<KChoice> {
    check_sigma_lipschitz(sigma, lipschitz)?;
    check_sample_count(d, n)?;
    let df = d as f64;
    let k_star = (df * sigma * sigma / (4.0 * lipschitz * lipschitz)).powf(df / (df + 2.0))
        * (n as f64).powf(2.0 / (df + 2.0));
    Ok(KChoice {
        k: clamp_k(k_star, n),
        k_star,
        bias_only: sigma == 0.0,
    })
}

/// Result of [`choose_k_sup_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNormChoice {
    pub k: usize,
    pub k_star: f64,
    /// `k⋆ ≥ log n`, the hypothesis under which the bound simplifies.
    pub k_star_ge_log_n: bool,
    /// `n / log n ≥ (πM / (2d c_σ))^d`.
    pub sample_size_ok: bool,
}

/// `c_σ = (4π²σ² + 2)/3 + πσ`, the constant shared by the sup-norm results.
fn sup_norm_constant(sigma: f64) -> f64 {
    (4.0 * PI * PI * sigma * sigma + 2.0) / 3.0 + PI * sigma
}

/// `k⋆ = n^{2/(d+2)} (log n)^{d/(d+2)} (d c_σ / (πM))^{2d/(d+2)}`.
pub fn choose_k_sup_norm(d: usize, sigma: f64, lipschitz: f64, n: usize) -> Result<SupNormChoice> {
    check_sigma_lipschitz(sigma, lipschitz)?;
    check_sample_count(d, n)?;
    let df = d as f64;
    let nf = n as f64;
    let log_n = nf.ln();
    let c = sup_norm_constant(sigma);
    let k_star = nf.powf(2.0 / (df + 2.0))
        * log_n.powf(df / (df + 2.0))
        * (df * c / (PI * lipschitz)).powf(2.0 * df / (df + 2.0));
    let threshold = (PI * lipschitz / (2.0 * df * c)).powf(df);
    Ok(SupNormChoice {
        k: clamp_k(k_star, n),
        k_star,
        k_star_ge_log_n: k_star >= log_n,
        sample_size_ok: nf / log_n >= threshold,
    })
}

/// `k = ⌈C n^{2/(d+2)} (log n)^{d/(d+2)}⌉`, clamped to `[1, n]`.
pub fn choose_k_practical(n: usize, d: usize, c: f64) -> Result<usize> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("C = {c} must be positive")));
    }
    if n < 2 || d == 0 {
        return Err(Error::invalid(format!("need n >= 2 and d >= 1, got n = {n}, d = {d}")));
    }
    let df = d as f64;
    let nf = n as f64;
    let k_star = c * nf.powf(2.0 / (df + 2.0)) * nf.ln().powf(df / (df + 2.0));
    Ok(clamp_k(k_star, n))
}

/// Parameters of the risk bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskBoundInputs {
    pub d: usize,
    pub sigma: f64,
    /// Lipschitz constant of `f` w.r.t. ℓ∞.
    pub lipschitz: f64,
    pub n: usize,
    pub k: usize,
}

impl RiskBoundInputs {
    /// Almost-sure bound `K = 1 + e^{2π²σ²}` on the centered summands.
    pub fn bernstein_k(&self) -> f64 {
        1.0 + (2.0 * PI * PI * self.sigma * self.sigma).exp()
    }

    /// Variance `S² = e^{4π²σ²} - 1` of the rescaled summands.
    pub fn bernstein_s2(&self) -> f64 {
        (4.0 * PI * PI * self.sigma * self.sigma).exp() - 1.0
    }

    /// Whether `σ ≤ 1/(2π)` and `n ≥ 2^d` hold.
    pub fn hypotheses_hold(&self) -> bool {
        self.sigma <= 1.0 / (2.0 * PI) && (self.n as f64) >= 2f64.powi(self.d as i32)
    }
}

/// A bound value and whether the hypotheses behind it were met.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub hypotheses_hold: bool,
}

/// `64π²M²(k/n)^{2/d} + 32π²σ²/k`, bounding `E|ĥ_k(x) - h(x)|²`.
pub fn expected_risk_bound(inputs: &RiskBoundInputs) -> BoundValue {
    let RiskBoundInputs { d, sigma, lipschitz, n, k } = *inputs;
    let ratio = k as f64 / n as f64;
    let value = 64.0 * PI * PI * lipschitz * lipschitz * ratio.powf(2.0 / d as f64)
        + 32.0 * PI * PI * sigma * sigma / k as f64;
    BoundValue {
        value,
        hypotheses_hold: inputs.hypotheses_hold(),
    }
}

/// `8πM(k/n)^{1/d} + (64/3)(2π²σ²+1) log n / k + 32πσ √(log n / k)`, the
/// in-sample sup-norm bound holding with probability at least `1 - 1/n`.
pub fn sup_norm_bound(inputs: &RiskBoundInputs) -> BoundValue {
    let RiskBoundInputs { d, sigma, lipschitz, n, k } = *inputs;
    let kf = k as f64;
    let log_n = (n as f64).ln();
    let value = 8.0 * PI * lipschitz * (kf / n as f64).powf(1.0 / d as f64)
        + 64.0 / 3.0 * (2.0 * PI * PI * sigma * sigma + 1.0) * log_n / kf
        + 32.0 * PI * sigma * (log_n / kf).sqrt();
    BoundValue {
        value,
        hypotheses_hold: inputs.hypotheses_hold(),
    }
}

/// The recovery radius `δ(n)` of the full pipeline and its two gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaN {
    pub value: f64,
    /// `γ` such that `δ(n) = γ (log n / n)^{1/(d+2)}`.
    pub gamma: f64,
    /// `δ(n) ≤ 2`: the denoised samples are within `δ(n)/4` in wrap distance.
    pub denoise_gate: bool,
    /// `δ(n) + 2M/(m-1) < 1`: the unwrapped samples inherit the same bound.
    pub unwrap_gate: bool,
    pub hypotheses_hold: bool,
}

/// `δ(n) = 6(8πM)^{d/(d+2)} (32 c_σ)^{2/(d+2)} (log n / n)^{1/(d+2)}`.
pub fn delta_n(d: usize, sigma: f64, lipschitz: f64, n: usize) -> Result<DeltaN> {
    check_sigma_lipschitz(sigma, lipschitz)?;
    if d == 0 || n < 2 {
        return Err(Error::invalid(format!("need d >= 1 and n >= 2, got d = {d}, n = {n}")));
    }
    let df = d as f64;
    let nf = n as f64;
    let gamma = 6.0
        * (8.0 * PI * lipschitz).powf(df / (df + 2.0))
        * (32.0 * sup_norm_constant(sigma)).powf(2.0 / (df + 2.0));
    let value = gamma * (nf.ln() / nf).powf(1.0 / (df + 2.0));
    let m = nf.powf(1.0 / df).round();
    Ok(DeltaN {
        value,
        gamma,
        denoise_gate: value <= 2.0,
        unwrap_gate: m >= 2.0 && value + 2.0 * lipschitz / (m - 1.0) < 1.0,
        hypotheses_hold: sigma <= 1.0 / (2.0 * PI) && nf >= 2f64.powi(d as i32),
    })
}
