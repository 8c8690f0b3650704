//! Pointwise operator `F` as a function of the real Hessian, with its
//! gradient.

use crate::jets::Flavor;

use super::grid::MAX_DIM;

pub type Hess = [[f64; MAX_DIM]; MAX_DIM];

pub(crate) struct Local {
    pub f: f64,
    /// `∂F/∂H_{ab}`, symmetric.
    pub g: Hess,
}

/// Cholesky of a symmetric `n × n` matrix; `None` unless positive definite.
/// Returns `log det` and the inverse.
fn chol_inverse(m: &[[f64; 2 * MAX_DIM]; 2 * MAX_DIM], n: usize) -> Option<(f64, [[f64; 2 * MAX_DIM]; 2 * MAX_DIM])> {
    let mut c = [[0.0; 2 * MAX_DIM]; 2 * MAX_DIM];
    let mut logdet = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for p in 0..j {
                s -= c[i][p] * c[j][p];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                c[i][i] = s.sqrt();
                logdet += s.ln();
            } else {
                c[i][j] = s / c[j][j];
            }
        }
    }
    // inverse of the lower factor, then L⁻ᵀ L⁻¹
    let mut li = [[0.0; 2 * MAX_DIM]; 2 * MAX_DIM];
    for i in 0..n {
        li[i][i] = 1.0 / c[i][i];
        for j in 0..i {
            let mut s = 0.0;
            for p in j..i {
                s -= c[i][p] * li[p][j];
            }
            li[i][j] = s / c[i][i];
        }
    }
    let mut inv = [[0.0; 2 * MAX_DIM]; 2 * MAX_DIM];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (i..n).map(|p| li[p][i] * li[p][j]).sum();
            inv[i][j] = s;
            inv[j][i] = s;
        }
    }
    Some((logdet, inv))
}

/// `log det` of a symmetric positive definite `n × n` matrix by Cholesky.
fn chol_logdet(m: &[[f64; 2 * MAX_DIM]; 2 * MAX_DIM], n: usize) -> Option<f64> {
    let mut c = [[0.0; 2 * MAX_DIM]; 2 * MAX_DIM];
    let mut logdet = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for p in 0..j {
                s -= c[i][p] * c[j][p];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                c[i][i] = s.sqrt();
                logdet += s.ln();
            } else {
                c[i][j] = s / c[j][j];
            }
        }
    }
    Some(logdet)
}

/// `F` alone; `None` when a block is not positive definite.
pub(crate) fn local_value(h: &Hess, k: usize, l: usize, flavor: Flavor) -> Option<f64> {
    let mut f = 0.0;
    for (o, m, sign) in [(0, k, 1.0), (k, l, -1.0)] {
        f += match flavor {
            Flavor::Real => sign * chol_logdet(&real_block(h, o, m, sign), m)?,
            Flavor::Complex => sign * 0.5 * chol_logdet(&complex_block(h, o, m, sign), 2 * m)?,
        };
    }
    Some(f)
}

/// Real block `sign · H[o..o+m, o..o+m]`.
fn real_block(h: &Hess, o: usize, m: usize, sign: f64) -> [[f64; 2 * MAX_DIM]; 2 * MAX_DIM] {
    let mut b = [[0.0; 2 * MAX_DIM]; 2 * MAX_DIM];
    for i in 0..m {
        for j in 0..m {
            b[i][j] = sign * h[o + i][o + j];
        }
    }
    b
}

/// Real embedding `[[Re, −Im], [Im, Re]]` of `sign · u_{a b̄}` over complex
/// variables `o..o+m`.
fn complex_block(h: &Hess, o: usize, m: usize, sign: f64) -> [[f64; 2 * MAX_DIM]; 2 * MAX_DIM] {
    let mut e = [[0.0; 2 * MAX_DIM]; 2 * MAX_DIM];
    for a in 0..m {
        for b in 0..m {
            let (xa, ya, xb, yb) = (2 * (o + a), 2 * (o + a) + 1, 2 * (o + b), 2 * (o + b) + 1);
            let re = sign * 0.25 * (h[xa][xb] + h[ya][yb]);
            let im = sign * 0.25 * (h[xa][yb] - h[ya][xb]);
            e[a][b] = re;
            e[m + a][m + b] = re;
            e[a][m + b] = -im;
            e[m + a][b] = im;
        }
    }
    e
}

/// `F = log det(convex block) − log det(−concave block)` and its gradient.
/// `None` when a block is not positive definite.
pub(crate) fn local_eval(h: &Hess, k: usize, l: usize, flavor: Flavor) -> Option<Local> {
    let mut g = [[0.0; MAX_DIM]; MAX_DIM];
    let mut f = 0.0;
    match flavor {
        Flavor::Real => {
            for (o, m, sign) in [(0, k, 1.0), (k, l, -1.0)] {
                let (ld, inv) = chol_inverse(&real_block(h, o, m, sign), m)?;
                f += sign * ld;
                for i in 0..m {
                    for j in 0..m {
                        g[o + i][o + j] = inv[i][j];
                    }
                }
            }
        }
        Flavor::Complex => {
            for (o, m, sign) in [(0, k, 1.0), (k, l, -1.0)] {
                let (ld, inv) = chol_inverse(&complex_block(h, o, m, sign), 2 * m)?;
                f += sign * 0.5 * ld;
                // R = E⁻¹ top-left + i · E⁻¹ bottom-left
                for a in 0..m {
                    for b in 0..m {
                        let (re, im) = (inv[b][a], inv[m + b][a]);
                        let (xa, ya, xb, yb) = (2 * (o + a), 2 * (o + a) + 1, 2 * (o + b), 2 * (o + b) + 1);
                        g[xa][xb] += 0.25 * re;
                        g[ya][yb] += 0.25 * re;
                        g[xa][yb] -= 0.25 * im;
                        g[ya][xb] += 0.25 * im;
                    }
                }
            }
            for i in 0..MAX_DIM {
                for j in 0..i {
                    let s = 0.5 * (g[i][j] + g[j][i]);
                    g[i][j] = s;
                    g[j][i] = s;
                }
            }
        }
    }
    Some(Local { f, g })
}
