//! Dense complex matrices and a cyclic Jacobi eigensolver for the
//! Hermitian case.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("matrix rows must all have length equal to the row count"));
        }
        Ok(ComplexMatrix {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim).map(|i| self.row(i).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `max_{i,j} |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// A matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianMatrix(ComplexMatrix);

impl TryFrom<ComplexMatrix> for HermitianMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        HermitianMatrix::new(m)
    }
}

impl From<HermitianMatrix> for ComplexMatrix {
    fn from(h: HermitianMatrix) -> Self {
        h.0
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
}

impl HermitianMatrix {
    /// Accepts `m` if `|A_ij - conj(A_ji)| ≤ 1e-12·max(1, max|A|)`, then
    /// symmetrizes it exactly.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let scale = m.max_abs().max(1.0);
        let defect = m.hermitian_defect();
        if !(defect <= HERMITIAN_TOL * scale) {
            return Err(Error::invalid(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        let n = m.dim();
        let sym = ComplexMatrix::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(m.get(i, i).re, 0.0)
            } else {
                0.5 * (m.get(i, j) + m.get(j, i).conj())
            }
        });
        Ok(HermitianMatrix(sym))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0.get(i, j)
    }

    pub fn inf_norm(&self) -> f64 {
        self.0.inf_norm()
    }

    /// Cyclic Jacobi with complex plane rotations, swept until the
    /// off-diagonal Frobenius mass falls below `1e-14·‖A‖_F`.
    pub fn eig(&self) -> Result<HermitianEig> {
        let (a, v) = self.jacobi(true)?;
        let v = v.expect("vectors requested");
        let n = self.dim();
        let order = ascending(&a);
        Ok(HermitianEig {
            values: order.iter().map(|&i| a.get(i, i).re).collect(),
            vectors: order.iter().map(|&k| (0..n).map(|i| v.get(i, k)).collect()).collect(),
        })
    }

    /// Eigenvalues only, ascending; skips accumulating the rotations.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (a, _) = self.jacobi(false)?;
        Ok(ascending(&a).iter().map(|&i| a.get(i, i).re).collect())
    }

    fn jacobi(&self, with_vectors: bool) -> Result<(ComplexMatrix, Option<ComplexMatrix>)> {
        let n = self.dim();
        let mut a = self.0.clone();
        let mut v = with_vectors.then(|| ComplexMatrix::from_fn(n, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)));
        let target = OFF_DIAGONAL_TOL * a.frobenius_norm();
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) <= target {
                return Ok((a, v));
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut a, v.as_mut(), p, q);
                }
            }
        }
        if off_diagonal_norm(&a) > target {
            return Err(Error::Numeric(format!("Jacobi sweeps did not converge for dimension {n}")));
        }
        Ok((a, v))
    }
}

fn ascending(a: &ComplexMatrix) -> Vec<usize> {
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    order
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Applies `A ← J*AJ` (and `V ← VJ` when tracked) with the rotation that zeroes `A_pq`.
fn rotate(a: &mut ComplexMatrix, mut v: Option<&mut ComplexMatrix>, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let e = apq / r;
    let tau = (a.get(q, q).re - a.get(p, p).re) / (2.0 * r);
    let t = if tau >= 0.0 { 1.0 } else { -1.0 } / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let jpp = Complex64::new(c, 0.0);
    let jpq = s * e;
    let jqp = -s * e.conj();
    let jqq = Complex64::new(c, 0.0);
    let n = a.dim();
    for k in 0..n {
        let (akp, akq) = (a.get(k, p), a.get(k, q));
        a.set(k, p, akp * jpp + akq * jqp);
        a.set(k, q, akp * jpq + akq * jqq);
        if let Some(v) = v.as_deref_mut() {
            let (vkp, vkq) = (v.get(k, p), v.get(k, q));
            v.set(k, p, vkp * jpp + vkq * jqp);
            v.set(k, q, vkp * jpq + vkq * jqq);
        }
    }
    for k in 0..n {
        let (apk, aqk) = (a.get(p, k), a.get(q, k));
        a.set(p, k, jpp.conj() * apk + jqp.conj() * aqk);
        a.set(q, k, jpq.conj() * apk + jqq.conj() * aqk);
    }
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));
    a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
    a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));
}
