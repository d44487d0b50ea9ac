//! Alignment of unwrapped samples with ground truth, and trial metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circle::{frac, wrap_distance_raw, Mod1Value};
use crate::error::{Error, Result};
use crate::grid::GridField;

/// Denoiser used in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Knn,
    Ucqp,
    Trs,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Knn => "knn",
            Method::Ucqp => "ucqp",
            Method::Trs => "trs",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(Method::Knn),
            "ucqp" => Ok(Method::Ucqp),
            "trs" => Ok(Method::Trs),
            other => Err(Error::invalid(format!("unknown method '{other}' (expected knn, ucqp or trs)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// Mean squared wrap distance between the noisy samples and `f mod 1`.
    pub wrap_mse_noisy: f64,
    /// Mean squared wrap distance between the denoised samples and `f mod 1`.
    pub wrap_mse_denoised: f64,
    /// Largest wrap distance between the denoised samples and `f mod 1`.
    pub max_wrap_denoised: f64,
    /// Mean of `(f̃ + q⋆ - f)²`.
    pub aligned_mse: f64,
    pub q_star: i64,
    pub method: Method,
    pub seed: u64,
}

fn check_same_grid<A, B>(a: &GridField<A>, b: &GridField<B>) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::invalid("fields live on different grids"));
    }
    Ok(())
}

fn aligned_mse(ftilde: &[f64], truth: &[f64], q: i64) -> f64 {
    ftilde.iter().zip(truth).map(|(a, f)| (a + q as f64 - f).powi(2)).sum::<f64>() / truth.len() as f64
}

/// The integer offset of `f̃` relative to `f`: the mode of `round(f̃ - f)`
/// over the grid, ties going to the offset with the smaller aligned MSE.
/// The alignment integer `q⋆` with `f̃ + q⋆ ≈ f` is its negative.
pub fn align(ftilde: &GridField<f64>, truth: &GridField<f64>) -> Result<i64> {
    check_same_grid(ftilde, truth)?;
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for (a, f) in ftilde.values().iter().zip(truth.values()) {
        *counts.entry((a - f).round() as i64).or_default() += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    let candidates = counts.into_iter().filter(|&(_, c)| c == top).map(|(q, _)| q);
    let mut best: Option<(i64, f64)> = None;
    for q in candidates {
        let err = aligned_mse(ftilde.values(), truth.values(), -q);
        if best.is_none_or(|(_, e)| err < e) {
            best = Some((q, err));
        }
    }
    Ok(best.map(|(q, _)| q).unwrap_or(0))
}

fn wrap_stats(estimate: &[Mod1Value], truth: &[f64]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    for (y, f) in estimate.iter().zip(truth) {
        let dw = wrap_distance_raw(y.get(), frac(*f));
        sum += dw * dw;
        max = max.max(dw);
    }
    (sum / truth.len() as f64, max)
}

/// Wrap-around and aligned errors of one pipeline run.
pub fn metrics(
    ftilde: &GridField<f64>,
    ghat: &GridField<Mod1Value>,
    noisy_mod: &GridField<Mod1Value>,
    truth: &GridField<f64>,
    method: Method,
    seed: u64,
) -> Result<TrialResult> {
    check_same_grid(ftilde, truth)?;
    check_same_grid(ghat, truth)?;
    check_same_grid(noisy_mod, truth)?;
    let (wrap_mse_noisy, _) = wrap_stats(noisy_mod.values(), truth.values());
    let (wrap_mse_denoised, max_wrap_denoised) = wrap_stats(ghat.values(), truth.values());
    let q_star = -align(ftilde, truth)?;
    Ok(TrialResult {
        wrap_mse_noisy,
        wrap_mse_denoised,
        max_wrap_denoised,
        aligned_mse: aligned_mse(ftilde.values(), truth.values(), q_star),
        q_star,
        method,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::mod1;
    use crate::grid::UniformGrid;

    fn field(values: Vec<f64>) -> GridField<f64> {
        GridField::new(UniformGrid::new(1, values.len()).unwrap(), values).unwrap()
    }

    fn modf(values: &[f64]) -> GridField<Mod1Value> {
        GridField::new(UniformGrid::new(1, values.len()).unwrap(), values.iter().map(|&v| mod1(v).unwrap()).collect()).unwrap()
    }

    #[test]
    fn align_examples() {
        let truth = field((0..20).map(|i| (i as f64 * 0.3).sin() * 2.0).collect());
        let shifted = truth.map(|v| v + 3.0);
        assert_eq!(align(&shifted, &truth).unwrap(), 3);
        let noisy = field(truth.values().iter().enumerate().map(|(i, v)| v + 0.35 * ((i as f64).cos())).collect());
        assert_eq!(align(&noisy, &truth).unwrap(), 0);
        let mut half = truth.values().to_vec();
        for v in half.iter_mut().take(8) {
            *v += 1.0;
        }
        assert_eq!(align(&field(half), &truth).unwrap(), 0);
    }

    #[test]
    fn align_tie_break() {
        // two points each way; the -1 shift explains the data better
        let truth = field(vec![0.0, 0.0, 0.0, 0.0]);
        let ftilde = field(vec![1.1, 1.1, -0.4, -0.4]);
        // round(f̃ - f): 1, 1, 0, 0; offset 1 leaves (0.01·2 + 1.96·2)/4, offset 0 leaves (1.21·2 + 0.16·2)/4
        assert_eq!(align(&ftilde, &truth).unwrap(), 0);
        let ftilde = field(vec![1.45, 1.45, -0.02, -0.02]);
        assert_eq!(align(&ftilde, &truth).unwrap(), 1);
    }

    #[test]
    fn metric_examples() {
        let truth = field(vec![0.2, 1.7, -0.3, 2.45]);
        let ghat = modf(&[0.2, 1.7, -0.3, 2.45]);
        let r = metrics(&truth, &ghat, &ghat, &truth, Method::Knn, 1).unwrap();
        assert_eq!((r.wrap_mse_noisy, r.wrap_mse_denoised, r.aligned_mse, r.q_star), (0.0, 0.0, 0.0, 0));

        let off = modf(&[0.3, 1.8, -0.2, 2.55]);
        let r = metrics(&truth, &off, &ghat, &truth, Method::Ucqp, 1).unwrap();
        assert!((r.wrap_mse_denoised - 0.01).abs() < 1e-12);
        assert!((r.max_wrap_denoised - 0.1).abs() < 1e-12);
    }

    #[test]
    fn metrics_match_direct_loop() {
        let n = 50;
        let truth = field((0..n).map(|i| 3.0 * (i as f64 / 7.0).sin()).collect());
        let noisy_vals: Vec<f64> = (0..n).map(|i| 3.0 * (i as f64 / 7.0).sin() + 0.2 * (i as f64 * 1.7).cos()).collect();
        let noisy = modf(&noisy_vals);
        let ghat_vals: Vec<f64> = (0..n).map(|i| 3.0 * (i as f64 / 7.0).sin() + 0.05 * (i as f64 * 0.3).sin()).collect();
        let ghat = modf(&ghat_vals);
        let ftilde = field(ghat_vals.iter().map(|v| v - 2.0).collect());
        let r = metrics(&ftilde, &ghat, &noisy, &truth, Method::Trs, 3).unwrap();
        let mut wn = 0.0;
        let mut wd = 0.0;
        for i in 0..n {
            let f = truth.values()[i];
            let e1 = (noisy_vals[i] - f) - (noisy_vals[i] - f).round();
            let e2 = (ghat_vals[i] - f) - (ghat_vals[i] - f).round();
            wn += e1 * e1;
            wd += e2 * e2;
        }
        assert!((r.wrap_mse_noisy - wn / n as f64).abs() < 1e-12);
        assert!((r.wrap_mse_denoised - wd / n as f64).abs() < 1e-12);
        assert_eq!(r.q_star, 2);
        let direct = (0..n).map(|i| (ftilde.values()[i] + 2.0 - truth.values()[i]).powi(2)).sum::<f64>() / n as f64;
        assert!((r.aligned_mse - direct).abs() < 1e-12);
    }
}
