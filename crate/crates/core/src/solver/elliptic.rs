use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::ExpressionSpec;

use super::field::FlowField;
use super::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EllipticOptions {
    pub max_newton: usize,
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        EllipticOptions {
            max_newton: 50,
            tol: 1e-10,
            max_halvings: 30,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EllipticSolution {
    /// Converged values on the grid (frame included).
    pub field: FlowField,
    pub iterations: usize,
    /// Sup-norm of `F` over the interior.
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

fn sup_interior(field: &FlowField, f: &[f64]) -> f64 {
    field.interior().iter().map(|&n| f[n].abs()).fold(0.0, f64::max)
}

/// Newton solve of `F(u) = 0` on a framed grid with frame data from
/// `boundary`. The initial guess defaults to `boundary` itself.
pub fn solve_elliptic(
    grid: Grid,
    boundary: &ExpressionSpec,
    initial: Option<&ExpressionSpec>,
    opts: EllipticOptions,
) -> Result<EllipticSolution> {
    let init = initial.unwrap_or(boundary);
    let mut field = FlowField::framed_with_initial(grid, boundary.clone(), init, 1.0, (1e-300, 1e300))?;
    let mut u = field.current().to_vec();
    let mut rows = field.linearize(&u, 0.0)?;
    let mut res = rows.iter().map(|(f, _)| f.abs()).fold(0.0, f64::max);
    let mut history = vec![res];
    let mut iterations = 0;
    while res > opts.tol {
        if iterations == opts.max_newton {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let mut delta: Vec<f64> = rows.iter().map(|(f, _)| -f).collect();
        field.solve_shifted(&rows, -1.0, 0.0, &mut delta)?;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut trial = u.clone();
            for (&n, d) in field.interior().iter().zip(&delta) {
                trial[n] += step * d;
            }
            if let Ok(f) = field.eval_f(&trial, 0.0) {
                let r = sup_interior(&field, &f);
                if r < res {
                    accepted = Some((trial, r));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((next, r)) = accepted else {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        };
        u = next;
        res = r;
        history.push(res);
        rows = field.linearize(&u, 0.0)?;
    }
    field.slices[0] = u;
    Ok(EllipticSolution {
        field,
        iterations,
        residual: res,
        residual_history: history,
    })
}
