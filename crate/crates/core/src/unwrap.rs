//! Sequential unwrapping of denoised mod-1 samples along grid lines.
//!
//! Values are tracked as `ĝ_i + q_i` with integer offsets `q_i`, so the
//! fractional part of every unwrapped sample is exactly the input sample.

use serde::{Deserialize, Serialize};

use crate::circle::Mod1Value;
use crate::error::{Error, Result};
use crate::grid::{GridField, UniformGrid};

/// How many finite differences needed each correction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCounts {
    pub no_jump: usize,
    /// Differences below `-1/2`, corrected by `+1`.
    pub plus_one: usize,
    /// Differences above `1/2`, corrected by `-1`.
    pub minus_one: usize,
    /// Differences of exactly `±1/2`, left unchanged.
    pub boundary_hits: usize,
}

/// Unwrapped samples `f̃`, defined up to a global integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnwrapResult<F = GridField<f64>> {
    pub ftilde: F,
    pub branch_counts: BranchCounts,
    /// `1/2` minus the largest corrected step; positive whenever every step
    /// stayed strictly inside the branch.
    pub itoh_margin: f64,
}

/// Maps a difference `a ∈ (-1, 1)` to the representative in `[-1/2, 1/2]`.
pub fn branch_correct(a: f64) -> Result<f64> {
    if !(a.abs() < 1.0) {
        return Err(Error::invalid(format!("difference {a} outside (-1, 1)")));
    }
    Ok(a + f64::from(branch_shift(a)))
}

fn branch_shift(a: f64) -> i32 {
    if a < -0.5 {
        1
    } else if a > 0.5 {
        -1
    } else {
        0
    }
}

struct Walker {
    counts: BranchCounts,
    max_step: f64,
}

impl Walker {
    fn new() -> Self {
        Walker {
            counts: BranchCounts::default(),
            max_step: 0.0,
        }
    }

    /// Integer offset of the child given its parent's offset.
    fn step(&mut self, parent: f64, child: f64, q_parent: i64) -> i64 {
        let a = child - parent;
        let shift = branch_shift(a);
        match shift {
            1 => self.counts.plus_one += 1,
            -1 => self.counts.minus_one += 1,
            _ if a.abs() == 0.5 => self.counts.boundary_hits += 1,
            _ => self.counts.no_jump += 1,
        }
        self.max_step = self.max_step.max((a + f64::from(shift)).abs());
        q_parent + i64::from(shift)
    }

    fn margin(&self) -> f64 {
        0.5 - self.max_step
    }
}

/// Unwraps a 1D sequence: `f̃_1 = ĝ_1`, `f̃_i = f̃_{i-1} + [ĝ_i - ĝ_{i-1}]`.
pub fn unwrap_1d(ghat: &[Mod1Value]) -> Result<UnwrapResult<Vec<f64>>> {
    if ghat.is_empty() {
        return Err(Error::invalid("cannot unwrap an empty sequence"));
    }
    let mut walker = Walker::new();
    let mut q = 0i64;
    let mut out = Vec::with_capacity(ghat.len());
    out.push(ghat[0].get());
    for w in ghat.windows(2) {
        q = walker.step(w[0].get(), w[1].get(), q);
        out.push(w[1].get() + q as f64);
    }
    Ok(UnwrapResult {
        ftilde: out,
        branch_counts: walker.counts,
        itoh_margin: walker.margin(),
    })
}

/// Unwraps a field on a `d`-dimensional grid.
///
/// Axis `j` is processed after axes `1..j-1`: with all later indices held at
/// 1, each line along axis `j` starts from a point of the face unwrapped so
/// far. Every grid point is reached exactly once.
pub fn unwrap_multid(ghat: &GridField<Mod1Value>) -> UnwrapResult {
    let grid = ghat.grid();
    let g: Vec<f64> = ghat.values().iter().map(|v| v.get()).collect();
    let mut q = vec![0i64; grid.n()];
    let mut walker = Walker::new();
    for_each_edge(grid, |parent, child| {
        q[child] = walker.step(g[parent], g[child], q[parent]);
    });
    let values = g.iter().zip(&q).map(|(&v, &o)| v + o as f64).collect();
    UnwrapResult {
        ftilde: GridField::new(grid, values).expect("same grid"),
        branch_counts: walker.counts,
        itoh_margin: walker.margin(),
    }
}

/// Visits the unwrapping tree edges `(parent, child)` as linear indices, in
/// traversal order.
pub(crate) fn for_each_edge(grid: UniformGrid, mut visit: impl FnMut(usize, usize)) {
    let (d, m) = (grid.d(), grid.m());
    for axis in 0..d {
        let stride = grid.stride(axis);
        let prefixes = m.pow(axis as u32);
        for prefix in 0..prefixes {
            let base = prefix * stride * m;
            for p in 1..m {
                let child = base + p * stride;
                visit(child - stride, child);
            }
        }
    }
}

/// Outcome of [`itoh_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItohCheck {
    pub satisfied: bool,
    /// `1/2 - 2δ - M/(m-1)`.
    pub margin: f64,
}

/// Whether `2δ + M/(m-1) < 1/2`, which guarantees exact unwrapping of
/// samples within `δ` of an `M`-Lipschitz function.
pub fn itoh_check(delta: f64, lipschitz: f64, m: usize) -> Result<ItohCheck> {
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!("delta = {delta} must be non-negative")));
    }
    if !(lipschitz > 0.0) {
        return Err(Error::invalid(format!("Lipschitz constant {lipschitz} must be positive")));
    }
    if m < 2 {
        return Err(Error::invalid(format!("need m >= 2, got {m}")));
    }
    let margin = 0.5 - 2.0 * delta - lipschitz / (m - 1) as f64;
    Ok(ItohCheck {
        satisfied: margin > 0.0,
        margin,
    })
}
