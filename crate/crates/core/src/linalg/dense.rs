use std::ops::{Index, IndexMut};

use crate::scalar::Field;

/// Small dense matrix over any [`Field`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DMat<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> DMat<F> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DMat { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: F) -> Self {
        DMat {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity_like(n: usize, template: &F) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                template.one_like()
            } else {
                template.zero_like()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> DMat<G> {
        DMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matmul shape");
        Self::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = self[(i, 0)].clone() * o[(0, j)].clone();
            for p in 1..self.cols {
                acc = acc + self[(i, p)].clone() * o[(p, j)].clone();
            }
            acc
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + o[(i, j)].clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - o[(i, j)].clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v.clone())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v.scale(s))
    }

    /// `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let (p, q) = (a.rows, a.cols);
        Self::from_fn(p + c.rows, q + b.cols, |i, j| match (i < p, j < q) {
            (true, true) => a[(i, j)].clone(),
            (true, false) => b[(i, j - q)].clone(),
            (false, true) => c[(i - p, j)].clone(),
            (false, false) => d[(i - p, j - q)].clone(),
        })
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Gaussian elimination without pivoting; returns the pivots.
    ///
    /// Intended for definite matrices, whose leading minors never vanish.
    pub fn pivots(&self) -> Vec<F> {
        let n = self.rows;
        let mut a = self.clone();
        let mut piv = Vec::with_capacity(n);
        for p in 0..n {
            let d = a[(p, p)].clone();
            for i in p + 1..n {
                let f = a[(i, p)].clone() / d.clone();
                for j in p + 1..n {
                    let v = a[(i, j)].clone() - f.clone() * a[(p, j)].clone();
                    a[(i, j)] = v;
                }
            }
            piv.push(d);
        }
        piv
    }

    /// Gauss-Jordan inverse without pivoting.
    pub fn inverse(&self) -> Self {
        let n = self.rows;
        assert_eq!(n, self.cols, "inverse of non-square matrix");
        let mut a = self.clone();
        let mut inv = Self::identity_like(n, &self.data[0]);
        for p in 0..n {
            let d = a[(p, p)].clone();
            for j in 0..n {
                a[(p, j)] = a[(p, j)].clone() / d.clone();
                inv[(p, j)] = inv[(p, j)].clone() / d.clone();
            }
            for i in 0..n {
                if i == p {
                    continue;
                }
                let f = a[(i, p)].clone();
                for j in 0..n {
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(p, j)].clone();
                    inv[(i, j)] = inv[(i, j)].clone() - f.clone() * inv[(p, j)].clone();
                }
            }
        }
        inv
    }

    pub fn trace(&self) -> F {
        let mut acc = self[(0, 0)].clone();
        for i in 1..self.rows.min(self.cols) {
            acc = acc + self[(i, i)].clone();
        }
        acc
    }
}

impl<F> Index<(usize, usize)> for DMat<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for DMat<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = DMat::from_fn(3, 3, |i, j| if i == j { 4.0 } else { 1.0 / (1.0 + (i + j) as f64) });
        let p = a.matmul(&a.inverse());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pivots_multiply_to_determinant() {
        let a = DMat::from_fn(2, 2, |i, j| [[2.0, 1.0], [1.0, 3.0]][i][j]);
        let d: f64 = a.pivots().iter().product();
        assert!((d - 5.0).abs() < 1e-15);
    }
}
