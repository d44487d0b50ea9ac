//! Monte Carlo sweeps over grid sizes and denoisers, and rate fitting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, Method, TrialResult};
use super::synth::{generate, SyntheticSpec, TestFunction};
use super::{run_baseline_pipeline, run_pipeline};
use crate::baselines::lambda_schedule;
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::grid::UniformGrid;
use crate::knn::KRule;

/// Graph used by the relaxed baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GraphChoice {
    /// Path for `d = 1`, ℓ∞ radius-1 grid graph otherwise.
    Auto,
    /// Path through the grid in lexicographic order.
    Path,
    GridLinf { radius: usize },
}

impl GraphChoice {
    pub fn build(&self, grid: UniformGrid) -> Result<GraphSpec> {
        match *self {
            GraphChoice::Auto if grid.d() == 1 => GraphSpec::path(grid.n()),
            GraphChoice::Auto => GraphSpec::grid_linf(grid, 1),
            GraphChoice::Path => GraphSpec::path(grid.n()),
            GraphChoice::GridLinf { radius } => GraphSpec::grid_linf(grid, radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub function: TestFunction,
    pub d: usize,
    pub sigma: f64,
    /// Numbers of grid points; each must be a perfect `d`-th power.
    pub n_sweep: Vec<usize>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub base_seed: u64,
    pub k_rule: KRule,
    /// `λ = κ n^{10/12}` for the baselines.
    pub kappa: f64,
    pub graph: GraphChoice,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            function: TestFunction::Example1,
            d: 1,
            sigma: 0.12,
            n_sweep: vec![250, 1000, 4000],
            methods: vec![Method::Knn],
            trials: 50,
            base_seed: 0,
            k_rule: KRule::Practical { c: 0.09 },
            kappa: 0.04,
            graph: GraphChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    /// Number of neighbours (kNN) or regularization weight (baselines).
    pub parameter: Option<f64>,
    pub result: Option<TrialResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std: f64,
}

impl MetricSummary {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(MetricSummary { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub n: usize,
    pub method: Method,
    pub trials: usize,
    pub failures: usize,
    pub wrap_mse_noisy: Option<MetricSummary>,
    pub wrap_mse_denoised: Option<MetricSummary>,
    pub max_wrap_denoised: Option<MetricSummary>,
    pub aligned_mse: Option<MetricSummary>,
}

impl SummaryEntry {
    /// `(metric name, summary)` pairs in a fixed order.
    pub fn metrics(&self) -> [(&'static str, Option<MetricSummary>); 4] {
        [
            ("wrap_mse_noisy", self.wrap_mse_noisy),
            ("wrap_mse_denoised", self.wrap_mse_denoised),
            ("max_wrap_denoised", self.max_wrap_denoised),
            ("aligned_mse", self.aligned_mse),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub n_values: Vec<usize>,
    pub trials: usize,
    /// One entry per `(n, method)`, ordered by `n` then method.
    pub entries: Vec<SummaryEntry>,
}

impl McSummary {
    pub fn entry(&self, n: usize, method: Method) -> Option<&SummaryEntry> {
        self.entries.iter().find(|e| e.n == n && e.method == method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOutcome {
    /// Ordered by `n`, then trial, then method.
    pub records: Vec<TrialRecord>,
    pub summary: McSummary,
}

/// Side length `m` with `m^d = n`.
pub fn side_length(n: usize, d: usize) -> Result<usize> {
    let m = (n as f64).powf(1.0 / d as f64).round() as usize;
    for cand in [m.saturating_sub(1), m, m + 1] {
        if cand >= 2 && cand.checked_pow(d as u32) == Some(n) {
            return Ok(cand);
        }
    }
    Err(Error::invalid(format!("n = {n} is not a perfect power m^{d} with m >= 2")))
}

fn run_trial(cfg: &McConfig, n: usize, trial: usize, methods: &[Method]) -> Vec<TrialRecord> {
    let seed = cfg.base_seed.wrapping_add(trial as u64);
    let fail = |method, parameter, e: &Error| TrialRecord {
        n,
        trial,
        seed,
        method,
        parameter,
        result: None,
        error: Some(e.to_string()),
    };
    let m = match side_length(n, cfg.d) {
        Ok(m) => m,
        Err(e) => return methods.iter().map(|&me| fail(me, None, &e)).collect(),
    };
    let spec = SyntheticSpec {
        function: cfg.function.clone(),
        d: cfg.d,
        m,
        sigma: cfg.sigma,
        seed,
    };
    let data = match generate(&spec) {
        Ok(d) => d,
        Err(e) => return methods.iter().map(|&me| fail(me, None, &e)).collect(),
    };
    methods
        .iter()
        .map(|&method| {
            let (parameter, out) = match method {
                Method::Knn => match cfg.k_rule.resolve(data.noisy_mod.grid()) {
                    Ok(k) => (Some(k as f64), run_pipeline(&data.noisy_mod, k)),
                    Err(e) => (None, Err(e)),
                },
                _ => {
                    let grid = data.noisy_mod.grid();
                    match (lambda_schedule(cfg.kappa, n), cfg.graph.build(grid)) {
                        (Ok(lambda), Ok(graph)) => (Some(lambda), run_baseline_pipeline(&data.noisy_mod, method, &graph, lambda)),
                        (Err(e), _) | (_, Err(e)) => (None, Err(e)),
                    }
                }
            };
            let res = out.and_then(|o| metrics(&o.ftilde, &o.ghat, &data.noisy_mod, &data.truth, method, seed));
            match res {
                Ok(r) => TrialRecord {
                    n,
                    trial,
                    seed,
                    method,
                    parameter,
                    result: Some(r),
                    error: None,
                },
                Err(e) => fail(method, parameter, &e),
            }
        })
        .collect()
}

/// Runs `trials` seeded trials per grid size and method. Trial `t` uses seed
/// `base_seed + t` for every method, so methods see identical data. Trial
/// failures are recorded rather than propagated.
pub fn monte_carlo(cfg: &McConfig) -> Result<McOutcome> {
    if cfg.n_sweep.is_empty() {
        return Err(Error::invalid("n sweep is empty"));
    }
    if cfg.methods.is_empty() {
        return Err(Error::invalid("no methods selected"));
    }
    if cfg.trials == 0 {
        return Err(Error::invalid("trial count must be positive"));
    }
    cfg.function.check_dimension(cfg.d)?;
    for &n in &cfg.n_sweep {
        side_length(n, cfg.d)?;
    }
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let mut n_values = cfg.n_sweep.clone();
    n_values.sort_unstable();
    n_values.dedup();

    let tasks: Vec<(usize, usize)> = n_values.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    let records: Vec<TrialRecord> = tasks
        .par_iter()
        .map(|&(n, t)| run_trial(cfg, n, t, &methods))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let mut entries = Vec::new();
    for &n in &n_values {
        for &method in &methods {
            let rows: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n && r.method == method).collect();
            let ok: Vec<&TrialResult> = rows.iter().filter_map(|r| r.result.as_ref()).collect();
            let collect = |f: fn(&TrialResult) -> f64| MetricSummary::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            entries.push(SummaryEntry {
                n,
                method,
                trials: rows.len(),
                failures: rows.len() - ok.len(),
                wrap_mse_noisy: collect(|r| r.wrap_mse_noisy),
                wrap_mse_denoised: collect(|r| r.wrap_mse_denoised),
                max_wrap_denoised: collect(|r| r.max_wrap_denoised),
                aligned_mse: collect(|r| r.aligned_mse),
            });
        }
    }
    Ok(McOutcome {
        records,
        summary: McSummary {
            n_values,
            trials: cfg.trials,
            entries,
        },
    })
}

/// Least-squares slopes of `log(error)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Against `log(log n / n)`; the theoretical rate gives `1/(d+2)`.
    pub slope_vs_log_ratio: f64,
    /// Against `log n`.
    pub slope_vs_log_n: f64,
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn rate_fit(ns: &[usize], errors: &[f64]) -> Result<RateFit> {
    if ns.len() != errors.len() {
        return Err(Error::invalid("sizes and errors differ in length"));
    }
    if ns.len() < 3 {
        return Err(Error::invalid("rate fit needs at least 3 points"));
    }
    if ns.iter().any(|&n| n < 2) || errors.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::invalid("rate fit needs n >= 2 and positive finite errors"));
    }
    let mut distinct = ns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::invalid("rate fit needs at least two distinct n"));
    }
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let ratio: Vec<f64> = ns.iter().map(|&n| ((n as f64).ln() / n as f64).ln()).collect();
    let logn: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    Ok(RateFit {
        slope_vs_log_ratio: ls_slope(&ratio, &ly),
        slope_vs_log_n: ls_slope(&logn, &ly),
    })
}
