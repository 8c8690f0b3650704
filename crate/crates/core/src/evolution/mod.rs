//! Evolution of `W` along the flow and the sign of `Q`.

mod oracle;
mod q_tensor;

pub use oracle::{complex_evolution_oracle, real_evolution_oracle, OracleResult, RealOracleResult};
pub use q_tensor::{assemble_q, Block, QTensor, TermRecord, GROUPS};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jets::{evaluate_jet, wirtinger_from_real, ExpressionSpec, Flavor, WirtingerTable};
use crate::scalar::Scalar;

/// Complex version of a real function: `v(z) = u(Re z)`, with time carried over.
pub fn complexify_real(spec: &ExpressionSpec) -> Result<ExpressionSpec> {
    if spec.flavor != Flavor::Real {
        return Err(Error::InvalidSpec("complexify_real needs a real spec".into()));
    }
    let n = spec.dim();
    let mut map: Vec<usize> = (0..n).map(|i| 2 * i).collect();
    let mut new_nvars = 2 * n;
    if spec.time_dependent {
        map.push(2 * n);
        new_nvars += 1;
    }
    let scale = vec![1.0; map.len()];
    Ok(ExpressionSpec {
        k: spec.k,
        l: spec.l,
        flavor: Flavor::Complex,
        time_dependent: spec.time_dependent,
        expr: spec.expr.substitute(new_nvars, &map, &scale),
    })
}

/// Embeds a real point `x` as `z = x + 0i`.
pub fn complexify_point<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().flat_map(|&v| [v, T::zero()]).collect()
}

fn as_complex<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<(ExpressionSpec, Vec<T>)> {
    match spec.flavor {
        Flavor::Complex => Ok((spec.clone(), point.to_vec())),
        Flavor::Real => Ok((complexify_real(spec)?, complexify_point(point))),
    }
}

/// Wirtinger table of a complex spec at `point` (time 0).
pub fn wirtinger_table<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<WirtingerTable<T>> {
    let jet = evaluate_jet(spec, point, T::zero())?;
    wirtinger_from_real(&jet)
}

/// `‖(∂_t − ℒ)W − Q‖_∞` with the left side from the independent oracle.
/// Real specs are complexified first.
pub fn evolution_residual<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<T> {
    let (cspec, cpoint) = as_complex(spec, point)?;
    let oracle = complex_evolution_oracle(&cspec, &cpoint)?;
    let q = assemble_q(&wirtinger_table(&cspec, &cpoint)?)?;
    let m = cspec.k + cspec.l;
    let mut worst = T::zero();
    for i in 0..m {
        for j in 0..m {
            worst = worst.max((oracle.lhs[(i, j)] - q.matrix.get(i, j)).norm());
        }
    }
    Ok(worst)
}

/// Largest eigenvalue of `Q`.
pub fn subsolution_spectrum<T: Scalar>(table: &WirtingerTable<T>) -> Result<T> {
    Ok(assemble_q(table)?.lambda_max())
}

/// `|(∂_t − ℒ)∂_t u|` along the flow. Real specs are complexified first.
pub fn heat_residual<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<T> {
    let (cspec, cpoint) = as_complex(spec, point)?;
    Ok(complex_evolution_oracle(&cspec, &cpoint)?.heat_residual())
}

/// Comparison of a real function with its complexification at one point.
#[derive(Clone, Debug)]
pub struct RealReduction<T> {
    /// `max |W_r − S⁻¹ W_c S⁻¹|`
    pub w_residual: T,
    /// `max |(∂_t − L)W_r − S⁻¹ Q_c S⁻¹|`
    pub q_residual: T,
    /// `|F_r − (F_c + (k − l) log 4)|`
    pub f_residual: T,
    pub lambda_max_complex: T,
}

/// `S = diag(½ I_k, 2 I_l)` relates the two Hessians: `W_c = S W_r S`.
pub fn reduction_scaling<T: Scalar>(k: usize, l: usize) -> Vec<T> {
    (0..k + l).map(|i| if i < k { T::c(0.5) } else { T::c(2.0) }).collect()
}

/// Checks that the complexified function reproduces the real `W`, `F` and
/// evolution identity after the diagonal rescaling by `S`.
pub fn real_reduction<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<RealReduction<T>> {
    let real = real_evolution_oracle(spec, point)?;
    let cspec = complexify_real(spec)?;
    let cpoint = complexify_point(point);
    let table = wirtinger_table(&cspec, &cpoint)?;
    let q = assemble_q(&table)?;
    let cw = crate::twisted::complex_w(&table)?;
    let s = reduction_scaling::<T>(spec.k, spec.l);
    let m = spec.k + spec.l;
    let mut w_residual = T::zero();
    let mut q_residual = T::zero();
    for i in 0..m {
        for j in 0..m {
            let unscale = |z: Complex<T>| z / (s[i] * s[j]);
            w_residual = w_residual.max((unscale(cw.get(i, j)) - real.w[(i, j)]).norm());
            q_residual = q_residual.max((unscale(q.matrix.get(i, j)) - real.lhs[(i, j)]).norm());
        }
    }
    let fr = crate::twisted::eval_f_real(&evaluate_jet(spec, point, T::zero())?)?;
    let fc = crate::twisted::eval_f_complex(&table)?;
    let shift = T::c((spec.k as f64 - spec.l as f64) * 4f64.ln());
    Ok(RealReduction {
        w_residual,
        q_residual,
        f_residual: (fr - fc - shift).abs(),
        lambda_max_complex: q.lambda_max(),
    })
}
