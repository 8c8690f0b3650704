use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default lower bound on `λ_min / λ_max` accepted by
/// [`HermitianMatrix::inverse_and_logdet`].
pub const DEFAULT_COND_GUARD: f64 = 1e-10;

/// Real symmetric matrix; symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix<T> {
    n: usize,
    data: Vec<T>,
}

/// Complex Hermitian matrix; Hermitian by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

/// Outcome of a semidefiniteness check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdCertificate<T> {
    pub lambda_min: T,
    pub lambda_max: T,
    pub tol: T,
    pub certified: bool,
}

impl<T: Scalar> SymmetricMatrix<T> {
    /// Builds from the upper triangle of `f`; the lower triangle mirrors it.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        assert!(n > 0, "empty matrix");
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymmetricMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        Self::from_fn(rows.len(), |i, j| rows[i][j])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(d: &[T]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { T::zero() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }

    /// All eigenvalues in ascending order (cyclic Jacobi).
    pub fn eigenvalues(&self) -> Vec<T> {
        jacobi_eigenvalues(self.n, self.data.clone())
    }

    pub fn min_max_eigenvalues(&self) -> (T, T) {
        let e = self.eigenvalues();
        (e[0], e[self.n - 1])
    }

    pub fn to_hermitian(&self) -> HermitianMatrix<T> {
        HermitianMatrix::from_fn(self.n, |i, j| Complex::new(self.get(i, j), T::zero()))
    }

    pub fn inverse_and_logdet(&self, cond_guard: T) -> Result<(SymmetricMatrix<T>, T)> {
        let (inv, ld) = self.to_hermitian().inverse_and_logdet(cond_guard)?;
        Ok((SymmetricMatrix::from_fn(self.n, |i, j| inv.get(i, j).re), ld))
    }

    pub fn psd_certificate(&self) -> PsdCertificate<T> {
        certificate(self.eigenvalues(), self.norm_inf())
    }

    pub fn quad_form(&self, v: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += v[i] * self.get(i, j) * v[j];
            }
        }
        acc
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) * s)
    }
}

impl<T: Scalar> HermitianMatrix<T> {
    /// Builds from the upper triangle of `f`; diagonal imaginary parts are
    /// dropped and the lower triangle is the conjugate mirror.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex<T>) -> Self {
        assert!(n > 0, "empty matrix");
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            data[i * n + i] = Complex::new(f(i, i).re, T::zero());
            for j in i + 1..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v.conj();
            }
        }
        HermitianMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        Self::from_fn(rows.len(), |i, j| rows[i][j])
    }

    /// Largest deviation from Hermitian symmetry of a raw square array.
    pub fn hermitian_defect(rows: &[Vec<Complex<T>>]) -> T {
        let n = rows.len();
        let mut d = T::zero();
        for i in 0..n {
            for j in 0..n {
                d = d.max((rows[i][j] - rows[j][i].conj()).norm());
            }
        }
        d
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            Complex::new(if i == j { T::one() } else { T::zero() }, T::zero())
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| Complex::new(T::zero(), T::zero()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<Complex<T>>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) + o.get(i, j))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) * s)
    }

    /// Real symmetric embedding `[[Re, −Im], [Im, Re]]` of size `2n`.
    fn real_embedding(&self) -> Vec<T> {
        let n = self.n;
        let m = 2 * n;
        let mut r = vec![T::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                r[i * m + j] = z.re;
                r[(i + n) * m + j + n] = z.re;
                r[i * m + j + n] = -z.im;
                r[(i + n) * m + j] = z.im;
            }
        }
        r
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let doubled = jacobi_eigenvalues(2 * self.n, self.real_embedding());
        doubled.into_iter().step_by(2).collect()
    }

    pub fn min_max_eigenvalues(&self) -> (T, T) {
        let e = self.eigenvalues();
        (e[0], e[self.n - 1])
    }

    /// Inverse and log-determinant via Cholesky, after eigenvalue guards.
    pub fn inverse_and_logdet(&self, cond_guard: T) -> Result<(HermitianMatrix<T>, T)> {
        let (lo, hi) = self.min_max_eigenvalues();
        if lo <= T::zero() {
            return Err(Error::NotPositiveDefinite {
                lambda_min: lo.to_f64_lossy(),
            });
        }
        let ratio = lo / hi;
        if ratio < cond_guard {
            return Err(Error::IllConditioned {
                ratio: ratio.to_f64_lossy(),
                guard: cond_guard.to_f64_lossy(),
            });
        }
        let n = self.n;
        let l = cholesky(n, &self.data).ok_or(Error::NotPositiveDefinite {
            lambda_min: lo.to_f64_lossy(),
        })?;
        let logdet = (0..n).map(|i| l[i * n + i].re.ln()).sum::<T>() * T::c(2.0);
        let mut inv = vec![Complex::new(T::zero(), T::zero()); n * n];
        for c in 0..n {
            let mut e = vec![Complex::new(T::zero(), T::zero()); n];
            e[c] = Complex::new(T::one(), T::zero());
            let x = cholesky_solve(n, &l, &e);
            for r in 0..n {
                inv[r * n + c] = x[r];
            }
        }
        Ok((HermitianMatrix::from_fn(n, |i, j| inv[i * n + j]), logdet))
    }

    pub fn psd_certificate(&self) -> PsdCertificate<T> {
        certificate(self.eigenvalues(), self.norm_inf())
    }

    /// `v* A v`.
    pub fn quad_form(&self, v: &[Complex<T>]) -> T {
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..self.n {
            for j in 0..self.n {
                acc += v[i].conj() * self.get(i, j) * v[j];
            }
        }
        acc.re
    }

    pub fn matmul(&self, o: &Self) -> Vec<Vec<Complex<T>>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|p| self.get(i, p) * o.get(p, j)).sum())
                    .collect()
            })
            .collect()
    }
}

fn certificate<T: Scalar>(eig: Vec<T>, norm: T) -> PsdCertificate<T> {
    let tol = T::c(1e-8) * T::one().max(norm);
    let lambda_min = eig[0];
    PsdCertificate {
        lambda_min,
        lambda_max: eig[eig.len() - 1],
        tol,
        certified: lambda_min >= -tol,
    }
}

fn cholesky<T: Scalar>(n: usize, a: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut l = vec![zero; n * n];
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for p in 0..j {
            d -= l[j * n + p].norm_sqr();
        }
        if d <= T::zero() {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = Complex::new(djj, T::zero());
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= l[i * n + p] * l[j * n + p].conj();
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(l)
}

fn cholesky_solve<T: Scalar>(n: usize, l: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut y = b.to_vec();
    for i in 0..n {
        for p in 0..i {
            let t = l[i * n + p] * y[p];
            y[i] -= t;
        }
        y[i] = y[i] / l[i * n + i];
    }
    for i in (0..n).rev() {
        for p in i + 1..n {
            let t = l[p * n + i].conj() * y[p];
            y[i] -= t;
        }
        y[i] = y[i] / l[i * n + i];
    }
    y
}

/// Cyclic Jacobi eigenvalue iteration on a dense symmetric array.
fn jacobi_eigenvalues<T: Scalar>(n: usize, mut a: Vec<T>) -> Vec<T> {
    let scale = a.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    if scale == T::zero() {
        return vec![T::zero(); n];
    }
    let eps = T::epsilon() * T::c(0.5);
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= eps * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::c(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
            }
        }
    }
    let mut e: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
    e.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    e
}

/// Determinant of a general real square matrix by LU with partial pivoting.
pub fn det_lu<T: Scalar>(rows: &[Vec<T>]) -> T {
    let n = rows.len();
    let mut a: Vec<Vec<T>> = rows.to_vec();
    let mut det = T::one();
    for p in 0..n {
        let piv = (p..n)
            .max_by(|&i, &j| {
                a[i][p]
                    .abs()
                    .partial_cmp(&a[j][p].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(p);
        if a[piv][p] == T::zero() {
            return T::zero();
        }
        if piv != p {
            a.swap(piv, p);
            det = -det;
        }
        det *= a[p][p];
        for i in p + 1..n {
            let f = a[i][p] / a[p][p];
            for j in p..n {
                let v = a[p][j];
                a[i][j] -= f * v;
            }
        }
    }
    det
}
