use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, Default)]
pub struct CsrMatrix {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists; repeated columns add.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut m = CsrMatrix {
            n,
            row_start: Vec::with_capacity(n + 1),
            ..Default::default()
        };
        m.row_start.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *m.vals.last_mut().unwrap() += v;
                } else {
                    m.cols.push(c);
                    m.vals.push(v);
                    last = Some(c);
                }
            }
            m.row_start.push(m.cols.len());
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_start[i]..self.row_start[i + 1])
                    .map(|p| self.vals[p] * x[self.cols[p]])
                    .sum()
            })
            .collect()
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_start[i]..self.row_start[i + 1])
                    .find(|&p| self.cols[p] == i)
                    .map_or(0.0, |p| self.vals[p])
            })
            .collect()
    }

    /// Jacobi-preconditioned BiCGSTAB; returns the iteration count.
    pub fn bicgstab(&self, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<usize> {
        let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(u, v)| u * v).sum::<f64>();
        let diag = self.diagonal();
        if diag.iter().any(|&d| d == 0.0) {
            return Err(Error::IllConditioned {
                ratio: 0.0,
                guard: f64::EPSILON,
            });
        }
        let precond = |v: &[f64]| v.iter().zip(&diag).map(|(a, d)| a / d).collect::<Vec<_>>();
        let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
        let ax = self.apply(x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        let r0 = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; self.n];
        let mut p = vec![0.0; self.n];
        for it in 0..max_iter {
            let res = dot(&r, &r).sqrt();
            if res <= rel_tol * bnorm {
                return Ok(it);
            }
            let rho_new = dot(&r0, &r);
            if rho_new == 0.0 {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..self.n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            let ph = precond(&p);
            v = self.apply(&ph);
            alpha = rho / dot(&r0, &v);
            let s: Vec<f64> = r.iter().zip(&v).map(|(a, c)| a - alpha * c).collect();
            let sh = precond(&s);
            let t = self.apply(&sh);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for i in 0..self.n {
                x[i] += alpha * ph[i] + omega * sh[i];
                r[i] = s[i] - omega * t[i];
            }
            if omega == 0.0 {
                break;
            }
        }
        let res = dot(&r, &r).sqrt();
        if res <= rel_tol * bnorm {
            Ok(max_iter)
        } else {
            Err(Error::NoConvergence {
                iterations: max_iter,
                residual: res / bnorm,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_shifted_laplacian() {
        let n = 40;
        let rows = (0..n)
            .map(|i| vec![(i, 3.0), ((i + 1) % n, -1.0), ((i + n - 1) % n, -1.0), ((i + 2) % n, 0.2)])
            .collect();
        let a = CsrMatrix::from_rows(rows);
        let x: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).cos()).collect();
        let b = a.apply(&x);
        let mut y = vec![0.0; n];
        a.bicgstab(&b, &mut y, 1e-14, 500).unwrap();
        for i in 0..n {
            assert!((y[i] - x[i]).abs() < 1e-12);
        }
    }
}
