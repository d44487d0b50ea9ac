//! The graph-regularized denoiser `min_{g ∈ 𝕋ₙ} λ g*Lg - 2Re(g*z)`, its
//! Riemannian derivatives on the torus, a gradient-descent solver, and
//! the first- and second-order properties of its critical points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::CircleSignal;
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::rng;

/// Tolerance on `|Re(ġ_i ḡ_i)|` for a direction to count as tangent.
const TANGENT_TOL: f64 = 1e-9;
const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcqpProblem {
    z: CircleSignal,
    graph: GraphSpec,
    lambda: f64,
}

/// Componentwise `v_i - Re(v_i ḡ_i) g_i`, the projection onto `T_g 𝕋ₙ`.
pub fn tangent_project(g: &CircleSignal, v: &[Complex64]) -> Result<Vec<Complex64>> {
    if v.len() != g.len() {
        return Err(Error::invalid(format!("direction has length {}, point has {}", v.len(), g.len())));
    }
    Ok(project_raw(g.as_slice(), v))
}

fn project_raw(g: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    g.iter().zip(v).map(|(&gi, &vi)| vi - gi * (vi * gi.conj()).re).collect()
}

fn dot_re(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Options for [`QcqpProblem::solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Starting point; `z` when absent.
    pub init: Option<CircleSignal>,
    pub max_iter: usize,
    /// Stop once `‖grad F‖∞ ≤ tol`.
    pub tol: f64,
    /// Extra runs from uniformly random phases; the lowest objective wins.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            init: None,
            max_iter: 100_000,
            tol: 1e-9,
            restarts: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub ghat: CircleSignal,
    pub objective: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Properties every critical point must have.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointReport {
    /// `|Im(z*ĝ)|`.
    pub im_zg: f64,
    /// `Re(z*ĝ)`.
    pub re_zg: f64,
    /// `max_i |Im(ĝ_i* (z + λWĝ)_i)|`.
    pub max_im_local: f64,
    /// `min_i Re(ĝ_i* (z + λWĝ)_i)`.
    pub min_re_local: f64,
    pub tol: f64,
    pub imaginary_parts_vanish: bool,
    pub real_parts_nonnegative: bool,
}

impl CriticalPointReport {
    pub fn passed(&self) -> bool {
        self.imaginary_parts_vanish && self.real_parts_nonnegative
    }
}

impl QcqpProblem {
    pub fn new(z: CircleSignal, graph: GraphSpec, lambda: f64) -> Result<Self> {
        if z.len() != graph.n() {
            return Err(Error::invalid(format!("z has length {}, graph has {} vertices", z.len(), graph.n())));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda = {lambda} must be finite and non-negative")));
        }
        Ok(QcqpProblem { z, graph, lambda })
    }

    pub fn z(&self) -> &CircleSignal {
        &self.z
    }

    pub fn graph(&self) -> &GraphSpec {
        &self.graph
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::invalid(format!("vector of length {len}, problem has n = {}", self.n())));
        }
        Ok(())
    }

    fn edge_energy(&self, v: &[Complex64]) -> f64 {
        self.graph.edges().iter().map(|&(a, b)| (v[a] - v[b]).norm_sqr()).sum()
    }

    /// `F(g) = λ g*Lg - 2Re(g*z)`.
    pub fn objective(&self, g: &CircleSignal) -> Result<f64> {
        self.check(g.len())?;
        Ok(self.objective_raw(g.as_slice()))
    }

    fn objective_raw(&self, g: &[Complex64]) -> f64 {
        self.lambda * self.edge_energy(g) - 2.0 * dot_re(g, self.z.as_slice())
    }

    /// `λLg - z`, half the Euclidean gradient.
    fn half_euclidean_grad(&self, g: &[Complex64]) -> Vec<Complex64> {
        let lg = self.graph.laplacian_apply_unchecked(g);
        lg.iter().zip(self.z.as_slice()).map(|(&l, &z)| self.lambda * l - z).collect()
    }

    /// `P_g(2(λLg - z))`.
    pub fn riemannian_grad(&self, g: &CircleSignal) -> Result<Vec<Complex64>> {
        self.check(g.len())?;
        Ok(self.grad_raw(g.as_slice()))
    }

    fn grad_raw(&self, g: &[Complex64]) -> Vec<Complex64> {
        let e: Vec<Complex64> = self.half_euclidean_grad(g).into_iter().map(|v| 2.0 * v).collect();
        project_raw(g, &e)
    }

    /// `P_g(2(λLġ - Re[diag((λLg - z)g*)] ġ))` for tangent `ġ`.
    pub fn hessian_apply(&self, g: &CircleSignal, gdot: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(g.len())?;
        self.check(gdot.len())?;
        let gs = g.as_slice();
        if let Some(i) = (0..gs.len()).find(|&i| (gdot[i] * gs[i].conj()).re.abs() > TANGENT_TOL) {
            return Err(Error::invalid(format!("direction is not tangent at component {i}")));
        }
        let half = self.half_euclidean_grad(gs);
        let lgdot = self.graph.laplacian_apply_unchecked(gdot);
        let raw: Vec<Complex64> = (0..gs.len())
            .map(|i| 2.0 * (self.lambda * lgdot[i] - (half[i] * gs[i].conj()).re * gdot[i]))
            .collect();
        Ok(project_raw(gs, &raw))
    }

    /// Riemannian gradient descent with normalization retraction and Armijo
    /// backtracking. Never fails; `converged` reports whether `tol` was met.
    pub fn solve(&self, opts: &SolveOptions) -> Result<SolveReport> {
        if let Some(init) = &opts.init {
            self.check(init.len())?;
        }
        let start = opts.init.clone().unwrap_or_else(|| self.z.clone());
        let mut best = self.descend(start.into_inner(), opts);
        for r in 0..opts.restarts {
            let n = self.n() as u64;
            let angles: Vec<f64> = (0..n)
                .map(|i| 2.0 * std::f64::consts::PI * rng::uniform(opts.seed, (r as u64 + 1) * n + i))
                .collect();
            let run = self.descend(CircleSignal::from_angles(&angles).into_inner(), opts);
            if run.objective < best.objective {
                best = run;
            }
        }
        Ok(best)
    }

    fn descend(&self, mut g: Vec<Complex64>, opts: &SolveOptions) -> SolveReport {
        let eta0 = 1.0 / (1.0 + 2.0 * self.lambda * self.graph.max_degree() as f64);
        let mut iterations = 0;
        let mut converged = false;
        let mut grad;
        loop {
            let half = self.half_euclidean_grad(&g);
            let e: Vec<Complex64> = half.iter().map(|&v| 2.0 * v).collect();
            grad = project_raw(&g, &e);
            if inf_norm(&grad) <= opts.tol {
                converged = true;
                break;
            }
            if iterations >= opts.max_iter {
                break;
            }
            let gnorm2: f64 = grad.iter().map(|v| v.norm_sqr()).sum();
            // grad_i = ι t_i g_i, so (g_i - η grad_i)/|·| = g_i (1 - ιηt_i)/√(1 + η²t_i²)
            let t: Vec<f64> = g.iter().zip(&grad).map(|(gi, di)| (gi.conj() * di).im).collect();
            let mut eta = eta0;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let delta: Vec<Complex64> = g
                    .iter()
                    .zip(&t)
                    .map(|(&gi, &ti)| {
                        let r = (1.0 + (eta * ti).powi(2)).sqrt();
                        let a = 1.0 / r;
                        // a - 1 without cancellation
                        let a_minus_one = -(eta * ti).powi(2) / (r * (1.0 + r));
                        gi * Complex64::new(a_minus_one, -eta * ti * a)
                    })
                    .collect();
                // F(g + Δ) - F(g) = 2Re(Δ*(λLg - z)) + λ Δ*LΔ
                let change = 2.0 * dot_re(&delta, &half) + self.lambda * self.edge_energy(&delta);
                if change <= -ARMIJO_C * eta * gnorm2 {
                    let next = g.iter().zip(&delta).map(|(&gi, &di)| crate::circle::project_raw(gi + di)).collect();
                    accepted = Some(next);
                    break;
                }
                eta *= 0.5;
            }
            match accepted {
                Some(next) => g = next,
                None => break,
            }
            iterations += 1;
        }
        SolveReport {
            objective: self.objective_raw(&g),
            grad_inf_norm: inf_norm(&grad),
            ghat: CircleSignal::project(&g),
            iterations,
            converged,
        }
    }

    /// Evaluates the critical-point properties at `ghat` with tolerance
    /// `1e-7·n`.
    pub fn critical_point_checks(&self, ghat: &CircleSignal) -> Result<CriticalPointReport> {
        self.check(ghat.len())?;
        let g = ghat.as_slice();
        let z = self.z.as_slice();
        let zg: Complex64 = z.iter().zip(g).map(|(zi, gi)| zi.conj() * gi).sum();
        let wg = self.graph.adjacency_apply(g);
        let mut max_im: f64 = 0.0;
        let mut min_re = f64::INFINITY;
        for i in 0..g.len() {
            let local = g[i].conj() * (z[i] + self.lambda * wg[i]);
            max_im = max_im.max(local.im.abs());
            min_re = min_re.min(local.re);
        }
        let tol = 1e-7 * g.len() as f64;
        Ok(CriticalPointReport {
            im_zg: zg.im.abs(),
            re_zg: zg.re,
            max_im_local: max_im,
            min_re_local: min_re,
            tol,
            imaginary_parts_vanish: zg.im.abs() <= tol && max_im <= tol,
            real_parts_nonnegative: zg.re >= -tol && min_re >= -tol,
        })
    }

    /// `uᵀ{Re diag(zĝ*) + λ[diag(W_ĝ 1) - W_ĝ]}u` with `W_ĝ = W ∘ Re(ĝĝ*)`.
    pub fn second_order_quadform(&self, ghat: &CircleSignal, u: &[f64]) -> Result<f64> {
        self.check(ghat.len())?;
        self.check(u.len())?;
        let g = ghat.as_slice();
        let z = self.z.as_slice();
        let diag: f64 = (0..g.len()).map(|i| u[i] * u[i] * (z[i] * g[i].conj()).re).sum();
        let edges: f64 = self
            .graph
            .edges()
            .iter()
            .map(|&(a, b)| (g[a] * g[b].conj()).re * (u[a] - u[b]).powi(2))
            .sum();
        Ok(diag + self.lambda * edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_signal(seed: u64, n: usize) -> CircleSignal {
        CircleSignal::from_angles(&(0..n).map(|i| std::f64::consts::TAU * rng::uniform(seed, i as u64)).collect::<Vec<_>>())
    }

    #[test]
    fn objective_examples() {
        let z = random_signal(1, 6);
        let p = QcqpProblem::new(z.clone(), GraphSpec::path(6).unwrap(), 0.0).unwrap();
        assert!((p.objective(&z).unwrap() + 12.0).abs() < 1e-12);

        let h = CircleSignal::new(vec![c(0.6, 0.8); 5]).unwrap();
        let p = QcqpProblem::new(h.clone(), GraphSpec::path(5).unwrap(), 3.0).unwrap();
        assert!((p.objective(&h).unwrap() + 10.0).abs() < 1e-12);

        let z = CircleSignal::new(vec![c(1.0, 0.0); 2]).unwrap();
        let p = QcqpProblem::new(z, GraphSpec::path(2).unwrap(), 1.0).unwrap();
        let g = CircleSignal::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!((p.objective(&g).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let g = random_signal(2, 7);
        let out = tangent_project(&g, g.as_slice()).unwrap();
        assert!(inf_norm(&out) < 1e-15);
        let ig: Vec<Complex64> = g.as_slice().iter().map(|v| v * Complex64::i()).collect();
        let out = tangent_project(&g, &ig).unwrap();
        for (a, b) in out.iter().zip(&ig) {
            assert!((a - b).norm() < 1e-15);
        }
        let v: Vec<Complex64> = (0..7).map(|i| c(i as f64 - 3.0, 0.5 * i as f64)).collect();
        let once = tangent_project(&g, &v).unwrap();
        let twice = tangent_project(&g, &once).unwrap();
        for (i, (a, b)) in once.iter().zip(&twice).enumerate() {
            assert!((a - b).norm() < 1e-12);
            assert!((a * g.as_slice()[i].conj()).re.abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_vanishes_at_trivial_minimizers() {
        let z = random_signal(3, 5);
        let p = QcqpProblem::new(z.clone(), GraphSpec::path(5).unwrap(), 0.0).unwrap();
        assert!(inf_norm(&p.riemannian_grad(&z).unwrap()) < 1e-15);
        let h = CircleSignal::new(vec![c(0.0, -1.0); 5]).unwrap();
        let p = QcqpProblem::new(h.clone(), GraphSpec::path(5).unwrap(), 2.5).unwrap();
        assert!(inf_norm(&p.riemannian_grad(&h).unwrap()) < 1e-15);
    }

    #[test]
    fn hessian_at_lambda_zero() {
        let z = random_signal(4, 6);
        let p = QcqpProblem::new(z.clone(), GraphSpec::path(6).unwrap(), 0.0).unwrap();
        let iz: Vec<Complex64> = z.as_slice().iter().map(|v| v * Complex64::i()).collect();
        let h = p.hessian_apply(&z, &iz).unwrap();
        for (a, b) in h.iter().zip(&iz) {
            assert!((a - 2.0 * b).norm() < 1e-14);
        }
        assert!((dot_re(&iz, &h) - 12.0).abs() < 1e-12);
        assert!(p.hessian_apply(&z, z.as_slice()).is_err());
    }

    #[test]
    fn solver_trivial_cases() {
        let z = random_signal(5, 8);
        let p = QcqpProblem::new(z.clone(), GraphSpec::path(8).unwrap(), 0.0).unwrap();
        let r = p.solve(&SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 1);
        // one step from a rounding-level gradient may move the last bit
        assert!(inf_norm(&r.ghat.as_slice().iter().zip(z.as_slice()).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-14);

        let h = CircleSignal::new(vec![c(0.0, 1.0); 8]).unwrap();
        let p = QcqpProblem::new(h.clone(), GraphSpec::path(8).unwrap(), 4.0).unwrap();
        let r = p.solve(&SolveOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.ghat, h);
    }

    #[test]
    fn lambda_zero_checks() {
        let z = random_signal(6, 9);
        let p = QcqpProblem::new(z.clone(), GraphSpec::path(9).unwrap(), 0.0).unwrap();
        let r = p.critical_point_checks(&z).unwrap();
        assert!(r.passed());
        assert!((r.re_zg - 9.0).abs() < 1e-12);
        assert!((r.min_re_local - 1.0).abs() < 1e-12);
        let ones = vec![1.0; 9];
        assert!((p.second_order_quadform(&z, &ones).unwrap() - 9.0).abs() < 1e-12);
        let u: Vec<f64> = (0..9).map(|i| i as f64 - 4.0).collect();
        let sq: f64 = u.iter().map(|x| x * x).sum();
        assert!((p.second_order_quadform(&z, &u).unwrap() - sq).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(QcqpProblem::new(random_signal(0, 3), GraphSpec::path(4).unwrap(), 1.0).is_err());
        assert!(QcqpProblem::new(random_signal(0, 3), GraphSpec::path(3).unwrap(), -1.0).is_err());
        let p = QcqpProblem::new(random_signal(0, 3), GraphSpec::path(3).unwrap(), 1.0).unwrap();
        assert!(p.objective(&random_signal(1, 4)).is_err());
    }
}
