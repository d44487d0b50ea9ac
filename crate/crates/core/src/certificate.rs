//! Dual certificates for the semidefinite relaxation of the QCQP, and the
//! sufficient conditions and error bound that go with them.
//!
//! The relaxation lifts `g̃ = (g; 1)` to `X = g̃g̃*` with cost `Tr(TX)`. A
//! critical point `ĝ` yields `Ŝ = T - Re(diag(T g̃g̃*))`; if `Ŝ ⪰ 0` with
//! rank `n`, then `X` is the unique solution of the relaxation and `ĝ`
//! the unique solution of the QCQP.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::CircleSignal;
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::hermitian::{ComplexMatrix, HermitianMatrix};
use crate::qcqp::QcqpProblem;

const CRITICALITY_TOL: f64 = 1e-7;
const KKT_TOL: f64 = 1e-8;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn lifted(g: &CircleSignal) -> Vec<Complex64> {
    let mut v = g.as_slice().to_vec();
    v.push(Complex64::new(1.0, 0.0));
    v
}

/// `T = ((λL, -z), (-z*, 0))`.
pub fn build_t(lambda: f64, graph: &GraphSpec, z: &CircleSignal) -> Result<HermitianMatrix> {
    let n = graph.n();
    if z.len() != n {
        return Err(Error::invalid(format!("z has length {}, graph has {n} vertices", z.len())));
    }
    let l = graph.laplacian_dense();
    let zs = z.as_slice();
    HermitianMatrix::new(ComplexMatrix::from_fn(n + 1, |i, j| match (i < n, j < n) {
        (true, true) => Complex64::new(lambda * l[i][j], 0.0),
        (true, false) => -zs[i],
        (false, true) => -zs[j].conj(),
        (false, false) => zero(),
    }))
}

/// `X = g̃g̃*`.
pub fn lifted_gram(g: &CircleSignal) -> HermitianMatrix {
    let v = lifted(g);
    HermitianMatrix::new(ComplexMatrix::from_fn(v.len(), |i, j| v[i] * v[j].conj())).expect("Gram matrices are Hermitian")
}

/// `Ŝ = T - Re(diag(T g̃g̃*))`.
pub fn build_dual_certificate(problem: &QcqpProblem, ghat: &CircleSignal) -> Result<HermitianMatrix> {
    let t = build_t(problem.lambda(), problem.graph(), problem.z())?;
    if ghat.len() != problem.n() {
        return Err(Error::invalid(format!("ĝ has length {}, problem has n = {}", ghat.len(), problem.n())));
    }
    let g = lifted(ghat);
    let tg = t.matrix().apply(&g);
    let mut s = t.matrix().clone();
    for i in 0..g.len() {
        let shift = (tg[i] * g[i].conj()).re;
        s.set(i, i, s.get(i, i) - shift);
    }
    HermitianMatrix::new(s)
}

/// `((λL + D, -z), (-z*, z*ĝ))` with `D = diag(ĝ* ∘ (z - λLĝ))`. Complex
/// in general; equals [`build_dual_certificate`] at critical points.
pub fn block_form_certificate(problem: &QcqpProblem, ghat: &CircleSignal) -> Result<ComplexMatrix> {
    let n = problem.n();
    if ghat.len() != n {
        return Err(Error::invalid(format!("ĝ has length {}, problem has n = {n}", ghat.len())));
    }
    let g = ghat.as_slice();
    let z = problem.z().as_slice();
    let lam = problem.lambda();
    let l = problem.graph().laplacian_dense();
    let lg = problem.graph().laplacian_apply(g)?;
    let zg: Complex64 = z.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
    Ok(ComplexMatrix::from_fn(n + 1, |i, j| match (i < n, j < n) {
        (true, true) if i == j => lam * l[i][i] + g[i].conj() * (z[i] - lam * lg[i]),
        (true, true) => Complex64::new(lam * l[i][j], 0.0),
        (true, false) => -z[i],
        (false, true) => -z[j].conj(),
        (false, false) => zg,
    }))
}

/// The five optimality conditions of the lifted problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KktReport {
    /// `X_ii = 1`.
    pub diag_ones: bool,
    /// `X ⪰ 0`.
    pub x_psd: bool,
    /// `ŜX = 0`.
    pub complementary: bool,
    /// `Ŝ - T` is real diagonal.
    pub s_minus_t_real_diagonal: bool,
    /// `Ŝ ⪰ 0`.
    pub s_psd: bool,
}

impl KktReport {
    pub fn all(&self) -> bool {
        self.diag_ones && self.x_psd && self.complementary && self.s_minus_t_real_diagonal && self.s_psd
    }
}

fn min_eigenvalue(a: &HermitianMatrix) -> Result<f64> {
    Ok(a.eigenvalues()?.first().copied().unwrap_or(0.0))
}

/// Evaluates the KKT conditions at tolerance `1e-8`, scaled by
/// `max(1, ‖·‖∞)` for the PSD and complementarity tests.
pub fn kkt_check(x: &HermitianMatrix, s: &HermitianMatrix, t: &HermitianMatrix) -> Result<KktReport> {
    if s.dim() != x.dim() {
        return Err(Error::invalid("KKT check needs matrices of equal dimension"));
    }
    kkt_with_min_eig(x, s, t, min_eigenvalue(s)?)
}

fn kkt_with_min_eig(x: &HermitianMatrix, s: &HermitianMatrix, t: &HermitianMatrix, s_min_eig: f64) -> Result<KktReport> {
    let dim = x.dim();
    if s.dim() != dim || t.dim() != dim {
        return Err(Error::invalid("KKT check needs matrices of equal dimension"));
    }
    let diag_ones = (0..dim).all(|i| (x.get(i, i) - 1.0).norm() <= KKT_TOL);
    let x_psd = min_eigenvalue(x)? >= -KKT_TOL * x.inf_norm().max(1.0);
    let s_psd = s_min_eig >= -KKT_TOL * s.inf_norm().max(1.0);
    let complementary = s.matrix().mul(x.matrix()).max_abs() <= KKT_TOL * s.inf_norm().max(1.0);
    let diff = s.matrix().sub(t.matrix());
    let s_minus_t_real_diagonal = (0..dim).all(|i| {
        (0..dim).all(|j| {
            let v = diff.get(i, j);
            if i == j {
                v.im.abs() <= KKT_TOL
            } else {
                v.norm() <= KKT_TOL
            }
        })
    });
    Ok(KktReport {
        diag_ones,
        x_psd,
        complementary,
        s_minus_t_real_diagonal,
        s_psd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `Ŝ ⪰ 0` with rank `n` and all KKT conditions: `ĝ` is the unique
    /// global solution.
    Tight,
    NotCertified,
    /// `z*ĝ ≤ τ`: the certificate argument does not apply.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// All `n + 1` eigenvalues of `Ŝ`, ascending.
    pub eigenvalues: Vec<f64>,
    pub min_eig: f64,
    pub two_smallest: [f64; 2],
    /// Eigenvalue threshold `τ = 1e-8·max(1, ‖Ŝ‖∞)`.
    pub tau: f64,
    pub null_multiplicity: usize,
    pub psd: bool,
    pub rank_n: bool,
    pub kkt: KktReport,
    /// `Re(z*ĝ)`.
    pub zg: f64,
    pub verdict: Verdict,
    pub tight: bool,
}

/// Builds `Ŝ` at the critical point `ĝ` and decides tightness.
pub fn tightness_verdict(problem: &QcqpProblem, ghat: &CircleSignal) -> Result<CertificateReport> {
    let grad = problem.riemannian_grad(ghat)?;
    let grad_inf = grad.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(grad_inf <= CRITICALITY_TOL) {
        return Err(Error::Precondition(format!(
            "ĝ is not a critical point: ‖grad F‖∞ = {grad_inf:.3e} > {CRITICALITY_TOL:e}"
        )));
    }
    let t = build_t(problem.lambda(), problem.graph(), problem.z())?;
    let s = build_dual_certificate(problem, ghat)?;
    let x = lifted_gram(ghat);
    let values = s.eigenvalues()?;
    let tau = 1e-8 * s.inf_norm().max(1.0);
    let min_eig = values[0];
    let second = values.get(1).copied().unwrap_or(f64::NAN);
    let null_multiplicity = values.iter().filter(|v| v.abs() <= tau).count();
    let psd = min_eig >= -tau;
    let rank_n = null_multiplicity == 1;
    let kkt = kkt_with_min_eig(&x, &s, &t, min_eig)?;
    let zg: f64 = problem.z().as_slice().iter().zip(ghat.as_slice()).map(|(a, b)| (a.conj() * b).re).sum();
    let verdict = if zg <= tau {
        Verdict::Indeterminate
    } else if psd && rank_n && kkt.all() {
        Verdict::Tight
    } else {
        Verdict::NotCertified
    };
    Ok(CertificateReport {
        min_eig,
        two_smallest: [min_eig, second],
        eigenvalues: values,
        tau,
        null_multiplicity,
        psd,
        rank_n,
        kkt,
        zg,
        tight: verdict == Verdict::Tight,
        verdict,
    })
}

fn check_unit_range(name: &str, v: f64, hi: f64) -> Result<()> {
    if !(0.0..=hi).contains(&v) {
        return Err(Error::invalid(format!("{name} = {v} outside [0, {hi}]")));
    }
    Ok(())
}

fn check_lambda_delta(lambda: f64, max_degree: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite() && max_degree >= 0.0 && max_degree.is_finite()) {
        return Err(Error::invalid(format!("need finite λ ≥ 0 and Δ ≥ 0, got {lambda}, {max_degree}")));
    }
    Ok(lambda * max_degree)
}

/// The two a-priori conditions guaranteeing tightness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriConditions {
    /// `δ + √((8/7)(3δ + λΔ(B_n² + √2)))`, compared with `√2/3`.
    pub lhs1: f64,
    pub cond1: bool,
    /// `λΔ ≤ 1/8`.
    pub cond2: bool,
    pub pass: bool,
}

pub fn sufficient_apriori(delta: f64, lambda: f64, max_degree: f64, bn: f64) -> Result<AprioriConditions> {
    check_unit_range("delta", delta, 2.0)?;
    check_unit_range("B_n", bn, 2.0)?;
    let ld = check_lambda_delta(lambda, max_degree)?;
    let lhs1 = delta + ((8.0 / 7.0) * (3.0 * delta + ld * (bn * bn + 2f64.sqrt()))).sqrt();
    let cond1 = lhs1 <= 2f64.sqrt() / 3.0;
    let cond2 = ld <= 0.125;
    Ok(AprioriConditions {
        lhs1,
        cond1,
        cond2,
        pass: cond1 && cond2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCondition {
    /// `λΔ(B_n + 2e) + ((3 - s²)/(2 - s²)) s²` with `s = δ + e`.
    pub value: f64,
    pub pass: bool,
}

/// The a-posteriori tightness condition in terms of the observed error
/// `e = ‖ĝ - h‖∞`.
pub fn sufficient_empirical(lambda: f64, max_degree: f64, bn: f64, delta: f64, ghat_err_inf: f64) -> Result<EmpiricalCondition> {
    let ld = check_lambda_delta(lambda, max_degree)?;
    if !(delta >= 0.0 && ghat_err_inf >= 0.0 && bn >= 0.0) {
        return Err(Error::invalid("δ, ‖ĝ - h‖∞ and B_n must be non-negative"));
    }
    let s2 = (delta + ghat_err_inf).powi(2);
    if !(2.0 - s2 > 0.0) {
        return Err(Error::domain(format!("δ + ‖ĝ - h‖∞ = {} must be below √2", delta + ghat_err_inf)));
    }
    let value = ld * (bn + 2.0 * ghat_err_inf) + (3.0 - s2) / (2.0 - s2) * s2;
    Ok(EmpiricalCondition { value, pass: value < 1.0 })
}

/// Bound on `‖ĝ - h‖∞²`: `(2δ + δ² + λΔ(B_n² + √2)) / (1 - λΔ/√2)`.
pub fn linf_bound(delta: f64, lambda: f64, max_degree: f64, bn: f64) -> Result<f64> {
    let ld = check_lambda_delta(lambda, max_degree)?;
    if !(delta >= 0.0 && bn >= 0.0) {
        return Err(Error::invalid("δ and B_n must be non-negative"));
    }
    if ld >= 2f64.sqrt() {
        return Err(Error::domain(format!("λΔ = {ld} must be below √2")));
    }
    Ok((2.0 * delta + delta * delta + ld * (bn * bn + 2f64.sqrt())) / (1.0 - ld / 2f64.sqrt()))
}
