use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of the frozen boundary frame, in nodes.
pub const FRAME: usize = 2;

/// Largest supported real dimension.
pub const MAX_DIM: usize = 4;

/// Tensor grid on a box. Framed grids include both end points of each axis;
/// periodic grids omit the right end point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n: Vec<usize>,
    pub periodic: bool,
}

impl Grid {
    /// Same extent and node count on every axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, n: usize, periodic: bool) -> Self {
        Grid {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
            n: vec![n; dim],
            periodic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > MAX_DIM || self.hi.len() != d || self.n.len() != d {
            return Err(Error::InvalidSpec(format!("grid dimension must be 1..={MAX_DIM} with matching extents")));
        }
        let min_nodes = if self.periodic { 3 } else { 2 * FRAME + 1 };
        for a in 0..d {
            if self.n[a] < min_nodes || !(self.hi[a] > self.lo[a]) {
                return Err(Error::InvalidSpec(format!(
                    "axis {a} needs hi > lo and at least {min_nodes} nodes"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h(&self, a: usize) -> f64 {
        let cells = if self.periodic { self.n[a] } else { self.n[a] - 1 };
        (self.hi[a] - self.lo[a]) / cells as f64
    }

    pub fn h_min(&self) -> f64 {
        (0..self.dim()).map(|a| self.h(a)).fold(f64::INFINITY, f64::min)
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1; d];
        for a in (0..d.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.n[a + 1];
        }
        s
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        let mut r = node;
        for a in (0..self.dim()).rev() {
            idx[a] = r % self.n[a];
            r /= self.n[a];
        }
        idx
    }

    pub fn node(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        self.multi_index(node)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lo[a] + i as f64 * self.h(a))
            .collect()
    }

    /// Nodes off the frozen frame (all nodes when periodic).
    pub fn is_interior(&self, node: usize) -> bool {
        self.periodic
            || self
                .multi_index(node)
                .iter()
                .zip(&self.n)
                .all(|(&i, &n)| i >= FRAME && i + FRAME < n)
    }

    /// Node closest to `x`.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let idx: Vec<usize> = (0..self.dim())
            .map(|a| {
                let t = ((x[a] - self.lo[a]) / self.h(a)).round();
                if self.periodic {
                    (t as i64).rem_euclid(self.n[a] as i64) as usize
                } else {
                    t.clamp(0.0, (self.n[a] - 1) as f64) as usize
                }
            })
            .collect();
        self.node(&idx)
    }
}

/// Neighbor tables: `plus[node * d + a]` is the node one step up axis `a`.
/// Off-grid neighbors of frame nodes point back at the node itself.
#[derive(Clone, Debug)]
pub(crate) struct Neighbors {
    pub d: usize,
    pub plus: Vec<u32>,
    pub minus: Vec<u32>,
}

impl Neighbors {
    pub fn new(grid: &Grid) -> Self {
        let d = grid.dim();
        let strides = grid.strides();
        let len = grid.len();
        let mut plus = vec![0u32; len * d];
        let mut minus = vec![0u32; len * d];
        for node in 0..len {
            let idx = grid.multi_index(node);
            for a in 0..d {
                let (n, s, i) = (grid.n[a], strides[a], idx[a]);
                let up = if i + 1 < n {
                    node + s
                } else if grid.periodic {
                    node + s - n * s
                } else {
                    node
                };
                let down = if i > 0 {
                    node - s
                } else if grid.periodic {
                    node + (n - 1) * s
                } else {
                    node
                };
                plus[node * d + a] = up as u32;
                minus[node * d + a] = down as u32;
            }
        }
        Neighbors { d, plus, minus }
    }

    #[inline]
    pub fn up(&self, node: usize, a: usize) -> usize {
        self.plus[node * self.d + a] as usize
    }

    #[inline]
    pub fn down(&self, node: usize, a: usize) -> usize {
        self.minus[node * self.d + a] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let g = Grid {
            lo: vec![0.0, -1.0, 2.0],
            hi: vec![1.0, 1.0, 3.0],
            n: vec![5, 6, 7],
            periodic: false,
        };
        for node in [0, 17, g.len() - 1] {
            assert_eq!(g.node(&g.multi_index(node)), node);
        }
        assert_eq!(g.coords(g.len() - 1), vec![1.0, 1.0, 3.0]);
        assert_eq!(g.nearest(&[0.26, -1.0, 2.0]), g.node(&[1, 0, 0]));
    }

    #[test]
    fn periodic_neighbors_wrap() {
        let g = Grid::cube(2, 0.0, 1.0, 4, true);
        let nb = Neighbors::new(&g);
        assert_eq!(nb.up(g.node(&[3, 1]), 0), g.node(&[0, 1]));
        assert_eq!(nb.down(g.node(&[2, 0]), 1), g.node(&[2, 3]));
        assert!((g.h(0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn frame_has_width_two() {
        let g = Grid::cube(2, 0.0, 1.0, 7, false);
        let interior = (0..g.len()).filter(|&i| g.is_interior(i)).count();
        assert_eq!(interior, 9);
    }
}
