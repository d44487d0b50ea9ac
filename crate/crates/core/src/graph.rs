//! Undirected graphs over `[n]` and their combinatorial Laplacians.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::CircleSignal;
use crate::error::{Error, Result};
use crate::grid::UniformGrid;

/// A connected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct GraphSpec {
    n: usize,
    /// Edges `(i, j)` with `i < j`, sorted.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for GraphSpec {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        GraphSpec::new(raw.n, raw.edges)
    }
}

impl From<GraphSpec> for RawGraph {
    fn from(g: GraphSpec) -> Self {
        RawGraph { n: g.n, edges: g.edges }
    }
}

impl GraphSpec {
    /// Validates that the edge list is simple and the graph connected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        let graph = GraphSpec { n, edges, neighbors };
        if !graph.is_connected() {
            return Err(Error::invalid("graph is not connected"));
        }
        Ok(graph)
    }

    /// The path `0 - 1 - … - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        GraphSpec::new(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Links grid points whose 0-based axis positions differ by at most
    /// `radius` in every coordinate (ℓ∞ ball of `radius` grid steps).
    pub fn grid_linf(grid: UniformGrid, radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::invalid("grid graph radius must be at least 1"));
        }
        let d = grid.d();
        let n = grid.n();
        let mut edges = Vec::new();
        let mut pos = vec![0usize; d];
        let mut other = vec![0usize; d];
        let r = radius as isize;
        let span = 2 * radius + 1;
        for a in 0..n {
            grid.axis_positions(a, &mut pos);
            for code in 0..span.pow(d as u32) {
                let mut c = code;
                let mut inside = true;
                for (axis, slot) in other.iter_mut().enumerate() {
                    let off = (c % span) as isize - r;
                    c /= span;
                    let p = pos[axis] as isize + off;
                    if p < 0 || p >= grid.m() as isize {
                        inside = false;
                        break;
                    }
                    *slot = p as usize;
                }
                if !inside {
                    continue;
                }
                let b = other.iter().fold(0, |acc, &p| acc * grid.m() + p);
                if b > a {
                    edges.push((a, b));
                }
            }
        }
        GraphSpec::new(n, edges)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Maximum degree `Δ`.
    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::invalid(format!("vector of length {len} for a graph on {} vertices", self.n)));
        }
        Ok(())
    }

    /// `(Lg)_i = Σ_{j ~ i} (g_i - g_j)`.
    pub fn laplacian_apply(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(g.len())?;
        Ok(self.laplacian_apply_unchecked(g))
    }

    pub(crate) fn laplacian_apply_unchecked(&self, g: &[Complex64]) -> Vec<Complex64> {
        self.neighbors
            .iter()
            .enumerate()
            .map(|(i, nb)| nb.iter().map(|&j| g[i] - g[j]).sum())
            .collect()
    }

    /// `(Wg)_i = Σ_{j ~ i} g_j`.
    pub(crate) fn adjacency_apply(&self, g: &[Complex64]) -> Vec<Complex64> {
        self.neighbors.iter().map(|nb| nb.iter().map(|&j| g[j]).sum()).collect()
    }

    /// Dense row-major Laplacian.
    pub fn laplacian_dense(&self) -> Vec<Vec<f64>> {
        let mut l = vec![vec![0.0; self.n]; self.n];
        for &(a, b) in &self.edges {
            l[a][a] += 1.0;
            l[b][b] += 1.0;
            l[a][b] -= 1.0;
            l[b][a] -= 1.0;
        }
        l
    }
}

/// `B_n = max_{{i,j} ∈ E} |h_i - h_j|`.
pub fn smoothness_bn(h: &CircleSignal, graph: &GraphSpec) -> Result<f64> {
    graph.check_len(h.len())?;
    let v = h.as_slice();
    Ok(graph.edges().iter().map(|&(a, b)| (v[a] - v[b]).norm()).fold(0.0, f64::max))
}
