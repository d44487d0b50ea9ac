//! Relaxed baselines for the torus-constrained denoiser: the unconstrained
//! quadratic problem (UCQP) and the sphere-constrained trust-region
//! subproblem (TRS). Both use conjugate gradients on `αI + λL`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::CircleSignal;
use crate::error::{Error, Result};
use crate::graph::GraphSpec;

/// Smallest shift tried before declaring the TRS hard case.
const MIN_SHIFT: f64 = 1e-14;
const MAX_BISECTIONS: usize = 400;
const MAX_CG_RESTARTS: usize = 5;

/// `λ = κ n^{10/12}`.
pub fn lambda_schedule(kappa: f64, n: usize) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa = {kappa} must be positive")));
    }
    Ok(kappa * (n as f64).powf(10.0 / 12.0))
}

/// `λ = (σ² n^{10/3} / M²)^{1/4}`, the schedule before folding constants
/// into `κ`.
pub fn lambda_schedule_raw(sigma: f64, lipschitz: f64, n: usize) -> Result<f64> {
    if !(sigma >= 0.0 && lipschitz > 0.0) {
        return Err(Error::invalid("need sigma >= 0 and a positive Lipschitz constant"));
    }
    Ok((sigma * sigma * (n as f64).powf(10.0 / 3.0) / (lipschitz * lipschitz)).powf(0.25))
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `(shift·I + λL) x`.
fn shifted_apply(graph: &GraphSpec, lambda: f64, shift: f64, x: &[Complex64]) -> Vec<Complex64> {
    let lx = graph.laplacian_apply_unchecked(x);
    x.iter().zip(&lx).map(|(&xi, &li)| shift * xi + lambda * li).collect()
}

/// Conjugate gradients for `(shift·I + λL) x = b`, stopped on the true
/// relative residual.
fn cg_solve(graph: &GraphSpec, lambda: f64, shift: f64, b: &[Complex64], x0: Vec<Complex64>, tol: f64) -> Result<(Vec<Complex64>, usize)> {
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = x0;
    if bnorm == 0.0 {
        return Ok((vec![Complex64::new(0.0, 0.0); n], 0));
    }
    let max_iter = 10 * n;
    let mut total = 0;
    for _ in 0..=MAX_CG_RESTARTS {
        let ax = shifted_apply(graph, lambda, shift, &x);
        let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let mut rr: f64 = r.iter().map(|v| v.norm_sqr()).sum();
        if rr.sqrt() <= tol * bnorm {
            return Ok((x, total));
        }
        let mut p = r.clone();
        for _ in 0..max_iter {
            let ap = shifted_apply(graph, lambda, shift, &p);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| (a.conj() * b).re).sum();
            if !(pap > 0.0) {
                break;
            }
            let alpha = rr / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            total += 1;
            let rr_new: f64 = r.iter().map(|v| v.norm_sqr()).sum();
            if rr_new.sqrt() <= tol * bnorm {
                break;
            }
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        if total > max_iter * (MAX_CG_RESTARTS + 1) {
            break;
        }
    }
    let ax = shifted_apply(graph, lambda, shift, &x);
    let res = norm2(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>());
    if res <= tol * bnorm {
        return Ok((x, total));
    }
    Err(Error::Numeric(format!(
        "conjugate gradients stalled at relative residual {:.3e} (target {tol:.1e})",
        res / bnorm
    )))
}

fn check_inputs(z: &CircleSignal, graph: &GraphSpec, lambda: f64) -> Result<()> {
    if z.len() != graph.n() {
        return Err(Error::invalid(format!("z has length {}, graph has {} vertices", z.len(), graph.n())));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda = {lambda} must be finite and non-negative")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcqpReport {
    /// Minimizer of `‖g - z‖² + λg*Lg` over `ℂⁿ`, before projection.
    pub g: Vec<Complex64>,
    /// `‖(I + λL)g - z‖∞`.
    pub residual_inf: f64,
    pub cg_iterations: usize,
    pub ghat: CircleSignal,
}

/// Solves `(I + λL)g = z` and projects onto the torus.
pub fn solve_ucqp(z: &CircleSignal, graph: &GraphSpec, lambda: f64, cg_tol: f64) -> Result<UcqpReport> {
    check_inputs(z, graph, lambda)?;
    if lambda == 0.0 {
        return Ok(UcqpReport {
            g: z.as_slice().to_vec(),
            residual_inf: 0.0,
            cg_iterations: 0,
            ghat: z.clone(),
        });
    }
    let zs = z.as_slice();
    let (g, iters) = cg_solve(graph, lambda, 1.0, zs, zs.to_vec(), cg_tol)?;
    let ag = shifted_apply(graph, lambda, 1.0, &g);
    let residual_inf = inf_norm(&ag.iter().zip(zs).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok(UcqpReport {
        ghat: CircleSignal::project(&g),
        g,
        residual_inf,
        cg_iterations: iters,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrsReport {
    /// Minimizer over the sphere `‖g‖² = n`, before projection.
    pub g: Vec<Complex64>,
    /// Multiplier `μ` in `(λL + μI)g = z`.
    pub mu: f64,
    /// `‖(λL + μI)g - z‖∞`.
    pub residual_inf: f64,
    /// `‖g‖² - n`.
    pub norm_gap: f64,
    pub ghat: CircleSignal,
}

/// Finds `μ > 0` with `‖(λL + μI)⁻¹z‖² = n` by bisection and projects the
/// resulting sphere point onto the torus.
pub fn solve_trs(z: &CircleSignal, graph: &GraphSpec, lambda: f64, cg_tol: f64, bisect_tol: f64) -> Result<TrsReport> {
    check_inputs(z, graph, lambda)?;
    let n = z.len() as f64;
    let zs = z.as_slice();
    if lambda == 0.0 {
        return Ok(TrsReport {
            g: zs.to_vec(),
            mu: 1.0,
            residual_inf: 0.0,
            norm_gap: 0.0,
            ghat: z.clone(),
        });
    }
    let solve_at = |mu: f64| -> Result<(Vec<Complex64>, f64)> {
        let x0 = zs.iter().map(|v| v / mu).collect();
        let (g, _) = cg_solve(graph, lambda, mu, zs, x0, cg_tol)?;
        let phi = g.iter().map(|v| v.norm_sqr()).sum::<f64>() - n;
        Ok((g, phi))
    };
    // ‖(λL + μI)⁻¹z‖ ≤ ‖z‖/μ = √n/μ, so φ(1) ≤ 0 and the root lies in (0, 1].
    let mut hi = 1.0;
    let (g_hi, phi_hi) = solve_at(hi)?;
    if phi_hi.abs() <= bisect_tol * n {
        return Ok(trs_report(graph, lambda, zs, g_hi, hi, phi_hi));
    }
    let mut lo = 0.5;
    loop {
        let (g, phi) = solve_at(lo)?;
        if phi.abs() <= bisect_tol * n {
            return Ok(trs_report(graph, lambda, zs, g, lo, phi));
        }
        if phi > 0.0 {
            break;
        }
        hi = lo;
        lo *= 0.5;
        if lo < MIN_SHIFT {
            return Err(Error::HardCase(format!(
                "‖(λL + μI)⁻¹z‖² stays below n down to μ = {lo:.1e}: z is (nearly) orthogonal to the constants"
            )));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo * hi).sqrt();
        let (g, phi) = solve_at(mid)?;
        if phi.abs() <= bisect_tol * n {
            return Ok(trs_report(graph, lambda, zs, g, mid, phi));
        }
        if phi > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(Error::Numeric(format!(
        "secular equation bisection did not reach |φ| ≤ {:.1e} (bracket [{lo:e}, {hi:e}])",
        bisect_tol * n
    )))
}

fn trs_report(graph: &GraphSpec, lambda: f64, z: &[Complex64], g: Vec<Complex64>, mu: f64, phi: f64) -> TrsReport {
    let ag = shifted_apply(graph, lambda, mu, &g);
    let residual_inf = inf_norm(&ag.iter().zip(z).map(|(a, b)| a - b).collect::<Vec<_>>());
    TrsReport {
        ghat: CircleSignal::project(&g),
        g,
        mu,
        residual_inf,
        norm_gap: phi,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    Ucqp,
    Trs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum LambdaRule {
    Explicit { lambda: f64 },
    /// `λ = κ n^{10/12}`.
    Schedule { kappa: f64 },
}

impl LambdaRule {
    pub fn resolve(&self, n: usize) -> Result<f64> {
        match *self {
            LambdaRule::Explicit { lambda } => {
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return Err(Error::invalid(format!("lambda = {lambda} must be finite and non-negative")));
                }
                Ok(lambda)
            }
            LambdaRule::Schedule { kappa } => lambda_schedule(kappa, n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub lambda_rule: LambdaRule,
    pub cg_tol: f64,
    pub bisect_tol: f64,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod, lambda_rule: LambdaRule) -> Self {
        BaselineConfig {
            method,
            lambda_rule,
            cg_tol: 1e-12,
            bisect_tol: 1e-10,
        }
    }

    /// Runs the configured method and returns the projected estimate.
    pub fn solve(&self, z: &CircleSignal, graph: &GraphSpec) -> Result<CircleSignal> {
        if !(self.cg_tol > 0.0 && self.bisect_tol > 0.0) {
            return Err(Error::invalid("solver tolerances must be positive"));
        }
        let lambda = self.lambda_rule.resolve(z.len())?;
        Ok(match self.method {
            BaselineMethod::Ucqp => solve_ucqp(z, graph, lambda, self.cg_tol)?.ghat,
            BaselineMethod::Trs => solve_trs(z, graph, lambda, self.cg_tol, self.bisect_tol)?.ghat,
        })
    }
}
