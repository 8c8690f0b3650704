//! Independent evaluation of `(∂_t − ℒ)W` and `(∂_t − ℒ)∂_t u`.
//!
//! Along the flow `∂_t u = F(u)`, so `∂_t` of the Hessian is the Hessian of
//! `F`. The oracle builds `F` as a jet from order-2 jets of the Hessian
//! entries, differentiates `W` in time with dual numbers and applies `ℒ` to
//! jets of the entries of `W`. None of the closed-form tensor expressions
//! enter.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jets::{ExpressionSpec, Flavor, Jet};
use crate::linalg::{DMat, HermitianMatrix, SymmetricMatrix, DEFAULT_COND_GUARD};
use crate::scalar::{Cx, Dual, Field, Scalar};
use crate::twisted::assemble_w;

/// Both sides of the evolution checks at one point.
#[derive(Clone, Debug)]
pub struct OracleResult<T> {
    pub w: DMat<Complex<T>>,
    pub dt_w: DMat<Complex<T>>,
    pub l_w: DMat<Complex<T>>,
    /// `(∂_t − ℒ)W`.
    pub lhs: DMat<Complex<T>>,
    /// `∂_t(∂_t u)` by the chain rule through the log-determinants.
    pub dt_ut: T,
    /// `ℒ(∂_t u)`.
    pub l_ut: T,
}

impl<T: Scalar> OracleResult<T> {
    pub fn heat_residual(&self) -> T {
        (self.dt_ut - self.l_ut).abs()
    }
}

fn second_jets<T: Scalar>(jet: &Jet<T>, n: usize) -> Vec<Vec<Jet<T>>> {
    let first: Vec<Jet<T>> = (0..n).map(|i| jet.derivative(i)).collect();
    first
        .iter()
        .map(|fi| (0..n).map(|j| fi.derivative(j)).collect())
        .collect()
}

fn check_definite<T: Scalar>(a: &DMat<Complex<T>>, sign: T) -> Result<()> {
    let h = HermitianMatrix::from_fn(a.rows(), |i, j| a[(i, j)] * sign);
    h.inverse_and_logdet(T::c(DEFAULT_COND_GUARD)).map(|_| ())
}

fn cx_values<T: Scalar>(m: &DMat<Cx<Jet<T>>>) -> DMat<Complex<T>> {
    m.map(|z| Complex::new(z.re.value(), z.im.value()))
}

/// `Σ log Re(pivot)` of a Hermitian positive definite jet matrix.
fn logdet_jet<T: Scalar>(m: &DMat<Cx<Jet<T>>>) -> Jet<T> {
    let mut acc = m[(0, 0)].re.zero_like();
    for p in m.pivots() {
        acc = &acc + &p.re.ln();
    }
    acc
}

fn logdet_dual<T: Scalar>(m: &DMat<Cx<Dual<T>>>) -> Dual<T> {
    let mut acc = Dual::new(T::zero(), T::zero());
    for p in m.pivots() {
        acc = acc + p.re.ln();
    }
    acc
}

/// `∂_{z_a} ∂_{z̄_b}` at the base point of a complex-valued order-2 jet.
fn wirt2<T: Scalar>(f: &Cx<Jet<T>>, a: usize, b: usize) -> Complex<T> {
    let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
    let part = |g: &Jet<T>| {
        Complex::new(
            g.partial(&[xa, xb]) + g.partial(&[ya, yb]),
            g.partial(&[xa, yb]) - g.partial(&[ya, xb]),
        ) * T::c(0.25)
    };
    part(&f.re) + part(&f.im) * Complex::new(T::zero(), T::one())
}

/// Oracle for a complex-flavored specification on ℂ^k × ℂ^l.
pub fn complex_evolution_oracle<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<OracleResult<T>> {
    if spec.flavor != Flavor::Complex {
        return Err(Error::InvalidSpec("complex oracle needs a complex spec".into()));
    }
    let (k, l) = (spec.k, spec.l);
    let m = k + l;
    let n = 2 * m;
    let jet = spec.raw_jet(point, T::zero(), 4)?;
    let jet = if spec.time_dependent {
        jet.last_var_slice(0, 4)
    } else {
        jet
    };
    let j2 = second_jets(&jet, n);
    let quarter = T::c(0.25);
    let h = DMat::from_fn(m, m, |a, b| {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        Cx::new(
            (&j2[xa][xb] + &j2[ya][yb]).scale_by(quarter),
            (&j2[xa][yb] - &j2[ya][xb]).scale_by(quarter),
        )
    });
    let a = h.block(0, 0, k, k);
    let b = h.block(0, k, k, l);
    let d = h.block(k, k, l, l);
    let a0 = cx_values(&a);
    let d0 = cx_values(&d);
    check_definite(&a0, T::one())?;
    check_definite(&d0, -T::one())?;

    let f = &logdet_jet(&a) - &logdet_jet(&d.neg());
    let hdot = DMat::from_fn(m, m, |p, q| {
        let (xa, ya, xb, yb) = (2 * p, 2 * p + 1, 2 * q, 2 * q + 1);
        Complex::new(
            f.partial(&[xa, xb]) + f.partial(&[ya, yb]),
            f.partial(&[xa, yb]) - f.partial(&[ya, xb]),
        ) * quarter
    });

    // time derivative of W along h + ε ḣ
    let hd = DMat::from_fn(m, m, |p, q| {
        let v = Complex::new(h[(p, q)].re.value(), h[(p, q)].im.value());
        Cx::new(Dual::new(v.re, hdot[(p, q)].re), Dual::new(v.im, hdot[(p, q)].im))
    });
    let (ad, bd, dd) = (hd.block(0, 0, k, k), hd.block(0, k, k, l), hd.block(k, k, l, l));
    let wd = assemble_w(&ad, &bd, &dd);
    let w = wd.map(|z| Complex::new(z.re.re, z.im.re));
    let dt_w = wd.map(|z| Complex::new(z.re.eps, z.im.eps));
    let dt_ut = (logdet_dual(&ad) - logdet_dual(&dd.neg())).eps;

    // ℒ applied entry-wise to jets of W
    let wj = assemble_w(&a, &b, &d);
    let p_inv = a0.inverse();
    let n_inv = d0.inverse();
    let l_op = |entry: &dyn Fn(usize, usize) -> Complex<T>| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..k {
            for j in 0..k {
                acc += p_inv[(j, i)] * entry(i, j);
            }
        }
        for i in 0..l {
            for j in 0..l {
                acc -= n_inv[(j, i)] * entry(k + i, k + j);
            }
        }
        acc
    };
    let l_w = DMat::from_fn(m, m, |r, c| l_op(&|a, b| wirt2(&wj[(r, c)], a, b)));
    let l_ut = l_op(&|a, b| hdot[(a, b)]).re;
    let lhs = dt_w.sub(&l_w);
    Ok(OracleResult {
        w,
        dt_w,
        l_w,
        lhs,
        dt_ut,
        l_ut,
    })
}

/// Oracle for a real specification on ℝ^k × ℝ^l, with
/// `L = tr(u_xx⁻¹ ∂_x²) − tr(u_yy⁻¹ ∂_y²)`.
pub fn real_evolution_oracle<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<RealOracleResult<T>> {
    if spec.flavor != Flavor::Real {
        return Err(Error::InvalidSpec("real oracle needs a real spec".into()));
    }
    let (k, l) = (spec.k, spec.l);
    let m = k + l;
    let jet = spec.raw_jet(point, T::zero(), 4)?;
    let jet = if spec.time_dependent {
        jet.last_var_slice(0, 4)
    } else {
        jet
    };
    let h = DMat::from_fn(m, m, |i, j| jet.derivative(i).derivative(j));
    let a = h.block(0, 0, k, k);
    let b = h.block(0, k, k, l);
    let d = h.block(k, k, l, l);
    let a0 = a.map(|v| v.value());
    let d0 = d.map(|v| v.value());
    let sym = |mm: &DMat<T>, s: T| SymmetricMatrix::from_fn(mm.rows(), |i, j| s * mm[(i, j)]);
    sym(&a0, T::one()).inverse_and_logdet(T::c(DEFAULT_COND_GUARD))?;
    sym(&d0, -T::one()).inverse_and_logdet(T::c(DEFAULT_COND_GUARD))?;

    let logdet = |mm: &DMat<Jet<T>>| {
        let mut acc = mm[(0, 0)].zero_like();
        for p in mm.pivots() {
            acc = &acc + &p.ln();
        }
        acc
    };
    let f = &logdet(&a) - &logdet(&d.neg());
    let hdot = DMat::from_fn(m, m, |i, j| f.partial(&[i, j]));

    let hd = DMat::from_fn(m, m, |i, j| Dual::new(h[(i, j)].value(), hdot[(i, j)]));
    let (ad, bd, dd) = (hd.block(0, 0, k, k), hd.block(0, k, k, l), hd.block(k, k, l, l));
    let wd = assemble_w(&ad, &bd, &dd);
    let w = wd.map(|z| z.re);
    let dt_w = wd.map(|z| z.eps);
    let logdet_d = |mm: &DMat<Dual<T>>| {
        let mut acc = Dual::new(T::zero(), T::zero());
        for p in mm.pivots() {
            acc = acc + p.ln();
        }
        acc
    };
    let dt_ut = (logdet_d(&ad) - logdet_d(&dd.neg())).eps;

    let wj = assemble_w(&a, &b, &d);
    let p_inv = a0.inverse();
    let n_inv = d0.inverse();
    let l_op = |entry: &dyn Fn(usize, usize) -> T| {
        let mut acc = T::zero();
        for i in 0..k {
            for j in 0..k {
                acc += p_inv[(i, j)] * entry(i, j);
            }
        }
        for i in 0..l {
            for j in 0..l {
                acc -= n_inv[(i, j)] * entry(k + i, k + j);
            }
        }
        acc
    };
    let l_w = DMat::from_fn(m, m, |r, c| l_op(&|i, j| wj[(r, c)].partial(&[i, j])));
    let l_ut = l_op(&|i, j| hdot[(i, j)]);
    let lhs = dt_w.sub(&l_w);
    Ok(RealOracleResult {
        w,
        dt_w,
        l_w,
        lhs,
        dt_ut,
        l_ut,
    })
}

/// Real counterpart of [`OracleResult`].
#[derive(Clone, Debug)]
pub struct RealOracleResult<T> {
    pub w: DMat<T>,
    pub dt_w: DMat<T>,
    pub l_w: DMat<T>,
    pub lhs: DMat<T>,
    pub dt_ut: T,
    pub l_ut: T,
}
