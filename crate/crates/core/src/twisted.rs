//! The real and complex twisted Monge-Ampère operators, the complex
//! transformed Hessian `W` and the complex linearized operator.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jets::{Flavor, SpaceTimeJet, WirtingerTable};
use crate::linalg::{DMat, HermitianMatrix, SymmetricMatrix, DEFAULT_COND_GUARD};
use crate::scalar::{Field, Scalar};

/// Operator value at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorValue<T> {
    /// `log det(convex block) − log det(−concave block)`.
    pub f: T,
    /// `∂_t u − f`.
    pub h: T,
    pub logdet_convex: T,
    pub logdet_concave: T,
}

/// Hessian blocks `(u_xx, u_xy, u_yy)` of a real jet on ℝ^k × ℝ^l.
pub fn real_blocks<T: Scalar>(jet: &SpaceTimeJet<T>) -> Result<(DMat<T>, DMat<T>, DMat<T>)> {
    let (k, l) = (jet.k, jet.l);
    if jet.flavor != Flavor::Real || jet.dim() != k + l {
        return Err(Error::DimensionMismatch {
            what: "real jet dimension",
            expected: k + l,
            found: jet.dim(),
        });
    }
    let a = DMat::from_fn(k, k, |i, j| jet.partial(&[i, j]));
    let b = DMat::from_fn(k, l, |i, j| jet.partial(&[i, k + j]));
    let d = DMat::from_fn(l, l, |i, j| jet.partial(&[k + i, k + j]));
    Ok((a, b, d))
}

/// Wirtinger Hessian blocks `(u_{z z̄}, u_{z w̄}, u_{w z̄}, u_{w w̄})`.
pub fn complex_blocks<T: Scalar>(
    table: &WirtingerTable<T>,
) -> (DMat<Complex<T>>, DMat<Complex<T>>, DMat<Complex<T>>, DMat<Complex<T>>) {
    let (k, l) = (table.k, table.l);
    let a = DMat::from_fn(k, k, |i, j| table.hess(i, j));
    let b = DMat::from_fn(k, l, |i, j| table.hess(i, k + j));
    let c = DMat::from_fn(l, k, |i, j| table.hess(k + i, j));
    let d = DMat::from_fn(l, l, |i, j| table.hess(k + i, k + j));
    (a, b, c, d)
}

/// `[[A − B D⁻¹ C, B D⁻¹], [D⁻¹ C, −D⁻¹]]` with `C = B*`.
pub fn assemble_w<F: Field>(a: &DMat<F>, b: &DMat<F>, d: &DMat<F>) -> DMat<F> {
    let n = d.inverse();
    let c = b.adjoint();
    let bn = b.matmul(&n);
    let nc = n.matmul(&c);
    let top = a.sub(&bn.matmul(&c));
    DMat::from_blocks(&top, &bn, &nc, &n.neg())
}

fn sym<T: Scalar>(m: &DMat<T>) -> SymmetricMatrix<T> {
    SymmetricMatrix::from_fn(m.rows(), |i, j| m[(i, j)])
}

fn herm<T: Scalar>(m: &DMat<Complex<T>>) -> HermitianMatrix<T> {
    HermitianMatrix::from_fn(m.rows(), |i, j| m[(i, j)])
}

fn logdets<T: Scalar>(a: HermitianMatrix<T>, neg_d: HermitianMatrix<T>) -> Result<(T, T)> {
    let guard = T::c(DEFAULT_COND_GUARD);
    let (_, la) = a.inverse_and_logdet(guard)?;
    let (_, ld) = neg_d.inverse_and_logdet(guard)?;
    Ok((la, ld))
}

/// Real operator value including the parabolic residual.
pub fn operator_real<T: Scalar>(jet: &SpaceTimeJet<T>) -> Result<OperatorValue<T>> {
    let (a, _, d) = real_blocks(jet)?;
    let (la, ld) = logdets(sym(&a).to_hermitian(), sym(&d.neg()).to_hermitian())?;
    let f = la - ld;
    let ut = jet.time_partial(1, &[])?;
    Ok(OperatorValue {
        f,
        h: ut - f,
        logdet_convex: la,
        logdet_concave: ld,
    })
}

/// `log det u_xx − log det(−u_yy)`.
pub fn eval_f_real<T: Scalar>(jet: &SpaceTimeJet<T>) -> Result<T> {
    Ok(operator_real(jet)?.f)
}

/// `∂_t u − F(u)` for a real jet.
pub fn eval_h<T: Scalar>(jet: &SpaceTimeJet<T>) -> Result<T> {
    Ok(operator_real(jet)?.h)
}

/// Complex operator value including the parabolic residual.
pub fn operator_complex<T: Scalar>(table: &WirtingerTable<T>) -> Result<OperatorValue<T>> {
    let (a, _, _, d) = complex_blocks(table);
    let (la, ld) = logdets(herm(&a), herm(&d.neg()))?;
    let f = la - ld;
    Ok(OperatorValue {
        f,
        h: table.ut - f,
        logdet_convex: la,
        logdet_concave: ld,
    })
}

/// `log det u_{z z̄} − log det(−u_{w w̄})`.
pub fn eval_f_complex<T: Scalar>(table: &WirtingerTable<T>) -> Result<T> {
    Ok(operator_complex(table)?.f)
}

/// `∂_t u − F_ℂ(u)`.
pub fn eval_h_complex<T: Scalar>(table: &WirtingerTable<T>) -> Result<T> {
    Ok(operator_complex(table)?.h)
}

/// Transformed Hessian of a complex table.
pub fn complex_w<T: Scalar>(table: &WirtingerTable<T>) -> Result<HermitianMatrix<T>> {
    let (a, b, c, d) = complex_blocks(table);
    // definiteness and conditioning of both blocks
    logdets(herm(&a), herm(&d.neg()))?;
    let w = assemble_w(&a, &b, &d);
    let k = table.k;
    let n = d.inverse();
    let nc = n.matmul(&c);
    let bn_adj = w.block(0, k, k, table.l).adjoint();
    let scale = T::one().max(w.data().iter().map(|z| z.norm()).fold(T::zero(), T::max));
    let defect = nc
        .data()
        .iter()
        .zip(bn_adj.data())
        .map(|(x, y)| (*x - *y).norm())
        .fold(T::zero(), T::max);
    if defect > T::c(1e-12) * scale {
        return Err(Error::InvalidSpec(format!(
            "off-diagonal blocks of W are not adjoint (defect {defect:e})"
        )));
    }
    Ok(herm(&w))
}

/// `ℒφ = u^{z̄_b z_a} φ_{z_a z̄_b} − u^{w̄_b w_a} φ_{w_a w̄_b}`.
pub fn complex_l_apply<T: Scalar>(u: &WirtingerTable<T>, phi: &WirtingerTable<T>) -> Result<T> {
    let (a, _, _, d) = complex_blocks(u);
    let guard = T::c(DEFAULT_COND_GUARD);
    let (p, _) = herm(&a).inverse_and_logdet(guard)?;
    let (neg_n, _) = herm(&d.neg()).inverse_and_logdet(guard)?;
    let k = u.k;
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..u.k {
        for j in 0..u.k {
            acc += p.get(j, i) * phi.hess(i, j);
        }
    }
    for i in 0..u.l {
        for j in 0..u.l {
            // −N = (−D)⁻¹
            acc += neg_n.get(j, i) * phi.hess(k + i, k + j);
        }
    }
    Ok(acc.re)
}

/// `|(∂_t u − log det W) − H(u)|`.
pub fn logdet_w_equivalence_residual<T: Scalar>(table: &WirtingerTable<T>) -> Result<T> {
    let w = complex_w(table)?;
    let (_, ldw) = w.inverse_and_logdet(T::c(DEFAULT_COND_GUARD))?;
    let h = eval_h_complex(table)?;
    Ok(((table.ut - ldw) - h).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{evaluate_jet, wirtinger_from_real, Expr, ExpressionSpec};

    fn real_quad(a: f64, b: f64) -> SpaceTimeJet<f64> {
        let s = ExpressionSpec::new(1, 1, Flavor::Real, false, Expr::diag_quad(&[a, -b])).unwrap();
        evaluate_jet(&s, &[0.2, -0.1], 0.0).unwrap()
    }

    /// `a|z|² − b|w|² + ε Re(z w̄)` in coordinates (x1, y1, x2, y2).
    fn coupled(a: f64, b: f64, eps: f64) -> WirtingerTable<f64> {
        let mut m = vec![vec![0.0; 4]; 4];
        m[0][0] = 2.0 * a;
        m[1][1] = 2.0 * a;
        m[2][2] = -2.0 * b;
        m[3][3] = -2.0 * b;
        // Re(z w̄) = x1 x2 + y1 y2
        m[0][2] = eps;
        m[2][0] = eps;
        m[1][3] = eps;
        m[3][1] = eps;
        let s = ExpressionSpec::new(1, 1, Flavor::Complex, false, Expr::quad(m, vec![0.0; 4], 0.0))
            .unwrap();
        wirtinger_from_real(&evaluate_jet(&s, &[0.1, 0.2, -0.3, 0.4], 0.0).unwrap()).unwrap()
    }

    #[test]
    fn real_operator_examples() {
        assert!(eval_f_real(&real_quad(2.0, 2.0)).unwrap().abs() < 1e-15);
        assert!((eval_f_real(&real_quad(std::f64::consts::E, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        let mut j = real_quad(1.0, 1.0);
        j.inject_time_derivative(1, 1.0);
        assert!((eval_h(&j).unwrap() - 1.0).abs() < 1e-15);
        let wrong = real_quad(1.0, -1.0);
        assert!(matches!(eval_f_real(&wrong), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn complex_w_examples() {
        let eps = 0.3;
        let t = coupled(1.0, 1.0, eps);
        assert!(eval_f_complex(&t).unwrap().abs() < 1e-15);
        let w = complex_w(&t).unwrap();
        assert!((w.get(0, 0).re - (1.0 + eps * eps / 4.0)).abs() < 1e-15);
        assert!((w.get(0, 1).re + eps / 2.0).abs() < 1e-15);
        assert!((w.get(1, 1).re - 1.0).abs() < 1e-15);
        assert!(logdet_w_equivalence_residual(&t).unwrap() < 1e-14);

        let w = complex_w(&coupled(1.0, 2.5, 0.0)).unwrap();
        assert!((w.get(1, 1).re - 0.4).abs() < 1e-15);
        assert!(((eval_f_complex(&coupled(2.0, 1.0, 0.0)).unwrap()) - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn complex_l_sign_bookkeeping() {
        let u = coupled(1.0, 1.0, 0.0);
        let phi_z = coupled(1.0, 0.0, 0.0);
        let phi_w = coupled(0.0, -1.0, 0.0);
        let phi_zw = coupled(1.0, -1.0, 0.0);
        assert!((complex_l_apply(&u, &phi_z).unwrap() - 1.0).abs() < 1e-15);
        assert!((complex_l_apply(&u, &phi_w).unwrap() - 1.0).abs() < 1e-15);
        assert!((complex_l_apply(&u, &phi_zw).unwrap() - 2.0).abs() < 1e-15);
    }
}
