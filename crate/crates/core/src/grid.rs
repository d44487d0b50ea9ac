//! Uniform grids on `[0, 1]^d`, lexicographic multi-indices, and ℓ∞
//! nearest-neighbour balls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when comparing ℓ∞ distances computed from grid coordinates, so
/// that exact ties on the grid survive floating-point rounding.
const TIE_EPS: f64 = 1e-12;

/// A 1-based multi-index `(i_1, …, i_d)` with each component in `[1, m]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(components: Vec<usize>) -> Self {
        MultiIndex(components)
    }

    #[inline]
    pub fn components(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

/// The grid `{0, 1/(m-1), …, 1}^d` with `n = m^d` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformGrid {
    d: usize,
    m: usize,
}

impl UniformGrid {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("grid dimension must be at least 1"));
        }
        if m < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 points per axis, got m = {m}"
            )));
        }
        if (m as f64).powi(d as i32) > usize::MAX as f64 / 4.0 {
            return Err(Error::invalid(format!("grid m^d = {m}^{d} is too large")));
        }
        Ok(UniformGrid { d, m })
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of grid points `m^d`.
    #[inline]
    pub fn n(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    /// Spacing `1 / (m - 1)`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        1.0 / (self.m - 1) as f64
    }

    /// Coordinate `(i - 1) / (m - 1)` of a 1-based axis position.
    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        (i - 1) as f64 / (self.m - 1) as f64
    }

    /// Stride of axis `axis` (0-based) in lexicographic storage.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.m.pow((self.d - 1 - axis) as u32)
    }

    pub fn check_index(&self, idx: &MultiIndex) -> Result<()> {
        if idx.0.len() != self.d {
            return Err(Error::Index(format!(
                "index {:?} has {} components, grid has d = {}",
                idx.0,
                idx.0.len(),
                self.d
            )));
        }
        if let Some(&bad) = idx.0.iter().find(|&&i| i < 1 || i > self.m) {
            return Err(Error::Index(format!(
                "component {bad} of {:?} outside [1, {}]",
                idx.0, self.m
            )));
        }
        Ok(())
    }

    /// Position of `idx` in lexicographic (row-major) order.
    pub fn linear_index(&self, idx: &MultiIndex) -> Result<usize> {
        self.check_index(idx)?;
        Ok(idx.0.iter().fold(0, |acc, &i| acc * self.m + (i - 1)))
    }

    /// Inverse of [`UniformGrid::linear_index`].
    pub fn multi_index(&self, mut linear: usize) -> MultiIndex {
        let mut comps = vec![0; self.d];
        for slot in comps.iter_mut().rev() {
            *slot = linear % self.m + 1;
            linear /= self.m;
        }
        MultiIndex(comps)
    }

    /// Writes 0-based axis positions of `linear` into `out`.
    #[inline]
    pub(crate) fn axis_positions(&self, mut linear: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = linear % self.m;
            linear /= self.m;
        }
    }

    /// Coordinates of the grid point `idx`.
    pub fn grid_point(&self, idx: &MultiIndex) -> Result<Vec<f64>> {
        self.check_index(idx)?;
        Ok(idx.0.iter().map(|&i| self.coordinate(i)).collect())
    }

    /// Coordinates of the grid point at lexicographic position `linear`.
    pub fn point_at(&self, linear: usize) -> Vec<f64> {
        let mut pos = vec![0; self.d];
        self.axis_positions(linear, &mut pos);
        pos.iter().map(|&p| self.coordinate(p + 1)).collect()
    }

    /// All multi-indices in lexicographic order.
    pub fn iter_lex(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.n()).map(move |l| self.multi_index(l))
    }

    /// The kNN set `B(x, r_k(x)) ∩ 𝒳`, ties included, where `r_k(x)` is the
    /// smallest ℓ∞ radius whose closed ball holds at least `k` grid points.
    ///
    /// Works through per-axis distance counts: the ball is a product of
    /// per-axis intervals, so the count at radius `r` is a product and the
    /// radius can be found among the per-axis distances.
    pub fn knn_set(&self, x: &[f64], k: usize) -> Result<Vec<MultiIndex>> {
        let (_, per_axis) = self.knn_ball(x, k)?;
        let mut out = Vec::new();
        let mut cur = vec![0usize; self.d];
        product_indices(&per_axis, 0, &mut cur, &mut out);
        Ok(out)
    }

    /// The kNN radius `r_k(x)` in ℓ∞.
    pub fn knn_radius(&self, x: &[f64], k: usize) -> Result<f64> {
        Ok(self.knn_ball(x, k)?.0)
    }

    fn knn_ball(&self, x: &[f64], k: usize) -> Result<(f64, Vec<Vec<usize>>)> {
        if x.len() != self.d {
            return Err(Error::invalid(format!(
                "point has {} coordinates, grid has d = {}",
                x.len(),
                self.d
            )));
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::domain(format!("point {x:?} outside [0, 1]^d")));
        }
        self.check_k(k)?;

        // per-axis distances, one sorted list per axis
        let dists: Vec<Vec<f64>> = x
            .iter()
            .map(|&xa| (1..=self.m).map(|i| (xa - self.coordinate(i)).abs()).collect())
            .collect();
        let mut sorted: Vec<Vec<f64>> = dists.clone();
        for s in &mut sorted {
            s.sort_by(f64::total_cmp);
        }
        let count_at = |r: f64| -> usize {
            sorted
                .iter()
                .map(|s| s.partition_point(|&v| v <= r + TIE_EPS))
                .product()
        };
        let mut candidates: Vec<f64> = sorted.iter().flatten().copied().collect();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        let pos = candidates.partition_point(|&r| count_at(r) < k);
        let radius = candidates[pos.min(candidates.len() - 1)];

        let per_axis = dists
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v <= radius + TIE_EPS)
                    .map(|(i, _)| i + 1)
                    .collect()
            })
            .collect();
        Ok((radius, per_axis))
    }

    /// kNN neighbourhood of the grid point at lexicographic position `linear`,
    /// as a box of lexicographic positions.
    ///
    /// On the grid, the ℓ∞ ball of radius `s/(m-1)` around a point is the
    /// index box of half-width `s`, so the kNN radius is the smallest `s` whose
    /// clipped box holds `k` points. This is exact integer arithmetic.
    pub fn knn_box(&self, linear: usize, k: usize) -> Result<IndexBox> {
        self.check_k(k)?;
        if linear >= self.n() {
            return Err(Error::Index(format!("position {linear} >= n = {}", self.n())));
        }
        let mut pos = vec![0usize; self.d];
        self.axis_positions(linear, &mut pos);
        let m = self.m;
        let clip = |p: usize, s: usize| (p.saturating_sub(s), (p + s).min(m - 1));
        let mut s = 0usize;
        loop {
            let count: usize = pos
                .iter()
                .map(|&p| {
                    let (lo, hi) = clip(p, s);
                    hi - lo + 1
                })
                .product();
            if count >= k {
                break;
            }
            s += 1;
        }
        let ranges = pos.iter().map(|&p| clip(p, s)).collect();
        Ok(IndexBox {
            half_width: s,
            ranges,
            m,
        })
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k < 1 || k > self.n() {
            return Err(Error::invalid(format!(
                "k = {k} outside [1, n = {}]",
                self.n()
            )));
        }
        Ok(())
    }
}

fn product_indices(
    per_axis: &[Vec<usize>],
    axis: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<MultiIndex>,
) {
    if axis == per_axis.len() {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for &i in &per_axis[axis] {
        cur[axis] = i;
        product_indices(per_axis, axis + 1, cur, out);
    }
}

/// A rectangular block of grid positions (0-based, inclusive per axis).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexBox {
    /// Half-width `s` of the box: the kNN radius is `s / (m - 1)`.
    pub half_width: usize,
    /// Inclusive `(lo, hi)` 0-based range per axis.
    pub ranges: Vec<(usize, usize)>,
    m: usize,
}

impl IndexBox {
    pub fn len(&self) -> usize {
        self.ranges.iter().map(|(lo, hi)| hi - lo + 1).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lexicographic positions inside the box, in lexicographic order.
    pub fn positions(&self) -> Vec<usize> {
        let mut out = vec![0usize];
        for &(lo, hi) in &self.ranges {
            let mut next = Vec::with_capacity(out.len() * (hi - lo + 1));
            for base in &out {
                for p in lo..=hi {
                    next.push(base * self.m + p);
                }
            }
            out = next;
        }
        out
    }
}

/// `(⌈k^{1/d}⌉ - 1) / (m - 1)`, the largest kNN radius over grid points,
/// attained at a corner. For `k ≥ 2` it also bounds `r_k(x)` at every
/// `x` in the cube; for `k = 1` off-grid points reach `1 / (2(m - 1))`.
pub fn knn_radius_sup(d: usize, m: usize, k: usize) -> Result<f64> {
    let grid = UniformGrid::new(d, m)?;
    grid.check_k(k)?;
    Ok((int_root_ceil(k, d) - 1) as f64 / (m - 1) as f64)
}

/// Smallest integer `c` with `c^d >= k`.
pub(crate) fn int_root_ceil(k: usize, d: usize) -> usize {
    let mut c = (k as f64).powf(1.0 / d as f64).round().max(1.0) as usize;
    while c > 1 && (c - 1).checked_pow(d as u32).is_some_and(|p| p >= k) {
        c -= 1;
    }
    while c.checked_pow(d as u32).is_some_and(|p| p < k) {
        c += 1;
    }
    c
}

/// Values on a uniform grid, stored in lexicographic index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField<T> {
    grid: UniformGrid,
    values: Vec<T>,
}

impl<T> GridField<T> {
    pub fn new(grid: UniformGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::invalid(format!(
                "field has {} values, grid {}^{} needs {}",
                values.len(),
                grid.m(),
                grid.d(),
                grid.n()
            )));
        }
        Ok(GridField { grid, values })
    }

    /// Builds a field by evaluating `f` at every grid point.
    pub fn from_fn(grid: UniformGrid, mut f: impl FnMut(&[f64]) -> T) -> Self {
        let values = (0..grid.n()).map(|l| f(&grid.point_at(l))).collect();
        GridField { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> UniformGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, idx: &MultiIndex) -> Result<&T> {
        Ok(&self.values[self.grid.linear_index(idx)?])
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> GridField<U> {
        GridField {
            grid: self.grid,
            values: self.values.iter().map(f).collect(),
        }
    }
}
