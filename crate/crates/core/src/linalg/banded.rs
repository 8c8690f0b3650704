use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored with
/// `kl` extra super-diagonals of fill room for partial pivoting.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku, "({i}, {j}) outside the band");
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `v` at `(i, j)`; `j − i` must lie in `[−kl, ku]`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside the band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.kl + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = b` in place by Gaussian elimination with partial
    /// pivoting, consuming the matrix.
    pub fn solve(mut self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        let reach = self.kl + self.ku;
        for col in 0..n {
            let last = (col + self.kl).min(n - 1);
            let mut p = col;
            let mut best = self.get(col, col).abs();
            for r in col + 1..=last {
                let v = self.get(r, col).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::IllConditioned {
                    ratio: 0.0,
                    guard: f64::EPSILON,
                });
            }
            let right = (col + reach).min(n - 1);
            if p != col {
                for j in col..=right {
                    let (a, c) = (self.slot(col, j), self.slot(p, j));
                    self.data.swap(a, c);
                }
                b.swap(col, p);
            }
            let pivot = self.data[self.slot(col, col)];
            for r in col + 1..=last {
                let sr = self.slot(r, col);
                let factor = self.data[sr] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[sr] = 0.0;
                for j in col + 1..=right {
                    let v = self.data[self.slot(col, j)];
                    let s = self.slot(r, j);
                    self.data[s] -= factor * v;
                }
                b[r] -= factor * b[col];
            }
        }
        for i in (0..n).rev() {
            let right = (i + reach).min(n - 1);
            let mut acc = b[i];
            for j in i + 1..=right {
                acc -= self.data[self.slot(i, j)] * b[j];
            }
            b[i] = acc / self.data[self.slot(i, i)];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_needing_pivots() {
        let n = 6;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.add(i, i, if i % 2 == 0 { 1e-14 } else { 3.0 });
            if i + 1 < n {
                a.add(i, i + 1, 2.0);
                a.add(i + 1, i, 1.0 + i as f64);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
        let mut b = a.apply(&x);
        a.solve(&mut b).unwrap();
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12, "{i}: {} vs {}", b[i], x[i]);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = BandMatrix::zeros(3, 1, 1);
        assert!(a.solve(&mut [1.0, 2.0, 3.0]).is_err());
    }
}
