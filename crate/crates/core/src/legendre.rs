//! Partial Legendre transform in the concave variables.
//!
//! For `u(x, y)` convex in `x` and concave in `y`, the transform solves
//! `∂u/∂y(x, y) = z` for `y` and sets `w(x, z) = u(x, y) − ⟨y, z⟩`. The
//! Hessian `W` of `w` is assembled from derivatives of `u` at the source
//! point, so `∇w = (u_x, −z)`.

use crate::error::{Error, Result};
use crate::jets::{evaluate_jet, ExpressionSpec, Flavor, SpaceTimeJet};
use crate::linalg::{det_lu, DMat, SymmetricMatrix, DEFAULT_COND_GUARD};
use crate::scalar::Scalar;
use crate::twisted::{assemble_w, real_blocks};

/// Controls for the damped Newton inversion of the partial gradient.
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Iterates with `‖y‖_∞` above this leave the search domain.
    pub domain_radius: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 100,
            tol: 1e-12,
            domain_radius: 1e6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PartialLegendreResult<T> {
    /// `w(x, z)`.
    pub value: T,
    /// Recovered concave coordinates `y(x, z)`.
    pub y: Vec<T>,
    /// `[[I, 0], [−u_yy⁻¹ u_yx, u_yy⁻¹]]`.
    pub jacobian: DMat<T>,
    /// Transformed Hessian.
    pub w: SymmetricMatrix<T>,
    pub iterations: usize,
}

fn check_real(spec: &ExpressionSpec) -> Result<()> {
    if spec.flavor != Flavor::Real {
        return Err(Error::InvalidSpec("partial Legendre transform needs a real spec".into()));
    }
    Ok(())
}

fn residual<T: Scalar>(spec: &ExpressionSpec, x: &[T], y: &[T], z: &[T]) -> Result<(Vec<T>, DMat<T>)> {
    let k = x.len();
    let p: Vec<T> = x.iter().chain(y).copied().collect();
    let jet = spec.raw_jet(&p, T::zero(), 2)?;
    let g = (0..y.len()).map(|i| jet.partial(&[k + i]) - z[i]).collect();
    let neg_hyy = DMat::from_fn(y.len(), y.len(), |i, j| -jet.partial(&[k + i, k + j]));
    Ok((g, neg_hyy))
}

fn sup<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, a| m.max(a.abs()))
}

/// Solves `u_y(x, y) = z` by damped Newton starting from `y0`.
pub fn invert_partial_gradient<T: Scalar>(
    spec: &ExpressionSpec,
    x: &[T],
    z: &[T],
    y0: &[T],
) -> Result<(Vec<T>, usize)> {
    invert_partial_gradient_with(spec, x, z, y0, NewtonOptions::default())
}

pub fn invert_partial_gradient_with<T: Scalar>(
    spec: &ExpressionSpec,
    x: &[T],
    z: &[T],
    y0: &[T],
    opts: NewtonOptions,
) -> Result<(Vec<T>, usize)> {
    check_real(spec)?;
    if x.len() != spec.k || z.len() != spec.l || y0.len() != spec.l {
        return Err(Error::DimensionMismatch {
            what: "partial Legendre arguments",
            expected: spec.k + spec.l,
            found: x.len() + z.len(),
        });
    }
    let tol = T::c(opts.tol).max(T::epsilon() * T::c(64.0)) * (T::one() + sup(z));
    let mut y = y0.to_vec();
    let (mut g, mut h) = residual(spec, x, &y, z)?;
    let mut norm = sup(&g);
    for it in 0..opts.max_iter {
        if norm <= tol {
            return Ok((y, it));
        }
        let hs = SymmetricMatrix::from_fn(h.rows(), |i, j| h[(i, j)]);
        let (hinv, _) = hs.inverse_and_logdet(T::c(DEFAULT_COND_GUARD))?;
        let step: Vec<T> = (0..y.len())
            .map(|i| (0..y.len()).map(|j| hinv.get(i, j) * g[j]).sum())
            .collect();
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<T> = y.iter().zip(&step).map(|(&a, &s)| a + lambda * s).collect();
            if sup(&trial) > T::c(opts.domain_radius) {
                return Err(Error::DomainExceeded(format!(
                    "|y| exceeded {} during partial gradient inversion",
                    opts.domain_radius
                )));
            }
            if let Ok((g2, h2)) = residual(spec, x, &trial, z) {
                let n2 = sup(&g2);
                if n2 < norm || n2 <= tol {
                    y = trial;
                    g = g2;
                    h = h2;
                    norm = n2;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda * T::c(0.5);
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: norm.to_f64_lossy(),
            });
        }
    }
    if norm <= tol {
        return Ok((y, opts.max_iter));
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: norm.to_f64_lossy(),
    })
}

/// Transformed Hessian `W` at the source point of a real jet.
pub fn real_w<T: Scalar>(jet: &SpaceTimeJet<T>) -> Result<SymmetricMatrix<T>> {
    let (a, b, d) = real_blocks(jet)?;
    let neg_d = SymmetricMatrix::from_fn(d.rows(), |i, j| -d[(i, j)]);
    neg_d.inverse_and_logdet(T::c(DEFAULT_COND_GUARD))?;
    let w = assemble_w(&a, &b, &d);
    Ok(SymmetricMatrix::from_fn(w.rows(), |i, j| w[(i, j)]))
}

/// Jacobian `[[I, 0], [−u_yy⁻¹ u_yx, u_yy⁻¹]]` at the source point.
pub fn legendre_jacobian<T: Scalar>(jet: &SpaceTimeJet<T>) -> Result<DMat<T>> {
    let (_, b, d) = real_blocks(jet)?;
    let (k, l) = (jet.k, jet.l);
    let n = d.inverse();
    let lower = n.matmul(&b.transpose()).neg();
    let eye = DMat::identity_like(k, &T::zero());
    let zero = DMat::filled(k, l, T::zero());
    Ok(DMat::from_blocks(&eye, &zero, &lower, &n))
}

/// Full partial Legendre transform at `(x, z)`.
pub fn partial_legendre<T: Scalar>(
    spec: &ExpressionSpec,
    x: &[T],
    z: &[T],
) -> Result<PartialLegendreResult<T>> {
    let y0 = vec![T::zero(); spec.l];
    let (y, iterations) = invert_partial_gradient(spec, x, z, &y0)?;
    let p: Vec<T> = x.iter().chain(&y).copied().collect();
    let jet = evaluate_jet(spec, &p, T::zero())?;
    let value = jet.value() - y.iter().zip(z).map(|(&a, &b)| a * b).sum::<T>();
    Ok(PartialLegendreResult {
        value,
        jacobian: legendre_jacobian(&jet)?,
        w: real_w(&jet)?,
        y,
        iterations,
    })
}

/// `|det W − det u_xx / det(−u_yy)|` at a source point.
pub fn det_transform_residual<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<T> {
    check_real(spec)?;
    let jet = evaluate_jet(spec, point, T::zero())?;
    let w = real_w(&jet)?;
    let (a, _, d) = real_blocks(&jet)?;
    let rows = |m: &DMat<T>, s: T| -> Vec<Vec<T>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| s * m[(i, j)]).collect())
            .collect()
    };
    let lhs = det_lu(&w.rows());
    let rhs = det_lu(&rows(&a, T::one())) / det_lu(&rows(&d, -T::one()));
    Ok((lhs - rhs).abs())
}

/// Short form `diag(u_xx⁻¹, −u_yy⁻¹)` of the transformed linearized operator.
pub fn transformed_operator_l<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<SymmetricMatrix<T>> {
    check_real(spec)?;
    let jet = evaluate_jet(spec, point, T::zero())?;
    let (a, _, d) = real_blocks(&jet)?;
    let guard = T::c(DEFAULT_COND_GUARD);
    let (ai, _) = SymmetricMatrix::from_fn(a.rows(), |i, j| a[(i, j)]).inverse_and_logdet(guard)?;
    let (ni, _) = SymmetricMatrix::from_fn(d.rows(), |i, j| -d[(i, j)]).inverse_and_logdet(guard)?;
    let k = jet.k;
    Ok(SymmetricMatrix::from_fn(k + jet.l, |i, j| match (i < k, j < k) {
        (true, true) => ai.get(i, j),
        (false, false) => ni.get(i - k, j - k),
        _ => T::zero(),
    }))
}

/// Long form `T W⁻¹ Tᵀ`, returned unsymmetrized so block structure can be
/// inspected.
pub fn transformed_operator_l_long<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<DMat<T>> {
    check_real(spec)?;
    let jet = evaluate_jet(spec, point, T::zero())?;
    let w = real_w(&jet)?;
    let wm = DMat::from_fn(w.n(), w.n(), |i, j| w.get(i, j));
    let t = legendre_jacobian(&jet)?;
    Ok(t.matmul(&wm.inverse()).matmul(&t.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{AtomFn, Expr};

    fn spec(e: Expr) -> ExpressionSpec {
        ExpressionSpec::new(1, 1, Flavor::Real, false, e).unwrap()
    }

    fn cross(c: f64) -> ExpressionSpec {
        spec(Expr::quad(vec![vec![1.0, c], vec![c, -1.0]], vec![0.0; 2], 0.0))
    }

    fn cosh_saddle() -> ExpressionSpec {
        spec(Expr::sum(vec![
            Expr::diag_quad(&[1.0, 0.0]),
            Expr::scale(-1.0, Expr::atom(AtomFn::Cosh, vec![0.0, 1.0], 0.0)),
        ]))
    }

    #[test]
    fn linear_gradient_inversion() {
        let s = spec(Expr::diag_quad(&[1.0, -2.0]));
        let (y, _) = invert_partial_gradient(&s, &[0.3_f64], &[1.0], &[0.0]).unwrap();
        assert!((y[0] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn cosh_inversion() {
        let (y, _) = invert_partial_gradient(&cosh_saddle(), &[0.0_f64], &[0.0], &[0.0]).unwrap();
        assert!(y[0].abs() < 1e-15);
        let (y, _) = invert_partial_gradient(&cosh_saddle(), &[0.2_f64], &[1.0], &[0.0]).unwrap();
        assert!((y[0] + 1.0_f64.asinh()).abs() < 1e-12);
        let r = partial_legendre(&cosh_saddle(), &[0.0_f64], &[0.0]).unwrap();
        assert!((r.w.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((r.w.get(1, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cross_term_transform() {
        let c = 0.5;
        let (x, z) = (0.7_f64, -0.4);
        let r = partial_legendre(&cross(c), &[x], &[z]).unwrap();
        assert!((r.y[0] - (c * x - z)).abs() < 1e-14);
        let w = (1.0 + c * c) * x * x / 2.0 - c * x * z + z * z / 2.0;
        assert!((r.value - w).abs() < 1e-14);
        assert!((r.w.get(0, 0) - 1.25).abs() < 1e-15);
        assert!((r.w.get(0, 1) + 0.5).abs() < 1e-15);
        assert!((r.w.get(1, 1) - 1.0).abs() < 1e-15);
        assert!(det_transform_residual(&cross(c), &[x, r.y[0]]).unwrap() < 1e-13);
    }

    #[test]
    fn operator_short_and_long_forms() {
        let s = spec(Expr::diag_quad(&[2.0, -3.0]));
        let l = transformed_operator_l(&s, &[0.0_f64, 0.0]).unwrap();
        assert!((l.get(0, 0) - 0.5).abs() < 1e-15 && (l.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        let long = transformed_operator_l_long(&cross(0.5), &[0.1_f64, 0.2]).unwrap();
        let short = transformed_operator_l(&cross(0.5), &[0.1_f64, 0.2]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((long[(i, j)] - short.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
