//! Term-by-term assembly of `Q` from the third derivatives of `u`.
//!
//! Index conventions: `P = (u_{z z̄})⁻¹` with `u^{z̄_b z_a} = P[b][a]`,
//! `N = (u_{w w̄})⁻¹` with `u^{w̄_b w_a} = N[b][a]`. Rows of the matrix
//! follow the holomorphic `z` slot and the upper `w̄` slot; columns follow
//! the antiholomorphic `z̄` slot and the upper `w` slot, matching the
//! layout of `W`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jets::WirtingerTable;
use crate::linalg::{DMat, HermitianMatrix, DEFAULT_COND_GUARD};
use crate::scalar::Scalar;

/// Which block a term lands in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    /// `Q_{α_z ᾱ_z}`
    ZZ,
    /// `Q_{α_w ᾱ_w}`
    WW,
    /// `Q_{α_z α_w}`
    ZW,
    /// `Q_{ᾱ_z ᾱ_w}`
    WZ,
}

/// Contribution of one numbered term.
#[derive(Clone, Debug)]
pub struct TermRecord<T> {
    pub id: usize,
    pub block: Block,
    pub max_abs: T,
    /// Contribution embedded in the full `(k+l)×(k+l)` layout.
    pub matrix: DMat<Complex<T>>,
}

/// Hermitian form `Q` with its per-term log and the four sign groups.
#[derive(Clone, Debug)]
pub struct QTensor<T> {
    pub k: usize,
    pub l: usize,
    pub matrix: HermitianMatrix<T>,
    /// Assembled matrix before Hermitian symmetrization.
    pub raw: DMat<Complex<T>>,
    pub hermitian_defect: T,
    /// `max |Q_{ᾱ_z ᾱ_w} − conj(Q_{α_z α_w})ᵀ|`, both transcribed.
    pub conjugate_defect: T,
    pub groups: [HermitianMatrix<T>; 4],
    pub terms: Vec<TermRecord<T>>,
}

/// Term ids of each Cauchy-Schwarz group.
pub const GROUPS: [[usize; 9]; 4] = [
    [1, 2, 3, 4, 17, 21, 22, 29, 30],
    [5, 6, 9, 10, 18, 23, 26, 32, 33],
    [7, 8, 11, 12, 19, 24, 25, 31, 34],
    [13, 14, 15, 16, 20, 27, 28, 35, 36],
];

/// Sums `f` over the product index set `0..dims[0] × 0..dims[1] × …`.
fn sum<T: Scalar>(dims: &[usize], f: impl Fn(&[usize]) -> Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    if dims.iter().any(|&d| d == 0) {
        return acc;
    }
    let mut ix = vec![0usize; dims.len()];
    loop {
        acc += f(&ix);
        let mut p = 0;
        loop {
            if p == dims.len() {
                return acc;
            }
            ix[p] += 1;
            if ix[p] < dims[p] {
                break;
            }
            ix[p] = 0;
            p += 1;
        }
    }
}

struct Ctx<'a, T: Scalar> {
    table: &'a WirtingerTable<T>,
    k: usize,
    p: DMat<Complex<T>>,
    n: DMat<Complex<T>>,
}

impl<T: Scalar> Ctx<'_, T> {
    fn w(&self, i: usize) -> usize {
        self.k + i
    }
    /// `u_{a b̄}`
    fn h(&self, a: usize, b: usize) -> Complex<T> {
        self.table.get(&[a], &[b])
    }
    /// `u_{a b̄ c}`
    fn t(&self, a: usize, b: usize, c: usize) -> Complex<T> {
        self.table.get(&[a, c], &[b])
    }
    /// `u_{a b̄ c̄}`
    fn tb(&self, a: usize, b: usize, c: usize) -> Complex<T> {
        self.table.get(&[a], &[b, c])
    }
    fn pz(&self, b: usize, a: usize) -> Complex<T> {
        self.p[(b, a)]
    }
    fn nw(&self, b: usize, a: usize) -> Complex<T> {
        self.n[(b, a)]
    }

    /// Entry `(i, j)` of term `id` inside its block.
    fn term(&self, id: usize, i: usize, j: usize) -> Complex<T> {
        let (k, l) = (self.k, self.table.l);
        let w = |x| self.w(x);
        let one = T::one();
        let c = |s: T, v: Complex<T>| v * s;
        match id {
            // Q_{α_z ᾱ_z}
            1 => c(-one, sum(&[k, k, k, k], |x| {
                let (q, r, s, p) = (x[0], x[1], x[2], x[3]);
                self.pz(q, r) * self.pz(s, p) * self.t(p, q, i) * self.tb(r, s, j)
            })),
            2 => sum(&[k, k, k, k, l, l], |x| {
                let (q, r, s, p, kk, ll) = (x[0], x[1], x[2], x[3], x[4], x[5]);
                self.pz(q, r) * self.pz(s, p) * self.t(p, q, i) * self.tb(r, s, w(kk))
                    * self.nw(kk, ll) * self.h(w(ll), j)
            }),
            3 => c(-one, sum(&[k, k, k, k, l, l, l, l], |x| {
                let (q, r, s, p, kk, mm, nn, ll) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
                self.h(i, w(kk)) * self.nw(kk, mm) * self.pz(q, r) * self.pz(s, p)
                    * self.t(p, q, w(mm)) * self.tb(r, s, w(nn)) * self.nw(nn, ll) * self.h(w(ll), j)
            })),
            4 => sum(&[k, k, k, k, l, l], |x| {
                let (q, r, s, p, kk, ll) = (x[0], x[1], x[2], x[3], x[4], x[5]);
                self.h(i, w(kk)) * self.nw(kk, ll) * self.pz(q, r) * self.pz(s, p)
                    * self.t(p, q, w(ll)) * self.tb(r, s, j)
            }),
            5..=12 => sum(&[k, k], |x| {
                let (a, b) = (x[0], x[1]);
                self.pz(b, a) * self.zz_bracket(id, i, j, a, b)
            }),
            13..=16 => c(-one, sum(&[l, l], |x| {
                let (a, b) = (x[0], x[1]);
                self.nw(b, a) * self.zz_bracket(id, i, j, w(a), w(b))
            })),
            // Q_{α_w ᾱ_w}
            17 => c(-one, sum(&[l, l, k, k, k, k], |x| {
                let (kk, ll, q, r, s, p) = (x[0], x[1], x[2], x[3], x[4], x[5]);
                self.nw(i, kk) * self.nw(ll, j) * self.pz(q, r) * self.pz(s, p)
                    * self.t(p, q, w(kk)) * self.tb(r, s, w(ll))
            })),
            19 => sum(&[k, k, l, l, l, l], |x| {
                let (lz, m, p, q, r, nn) = (x[0], x[1], x[2], x[3], x[4], x[5]);
                self.pz(lz, m) * self.nw(i, p) * self.tb(w(p), w(q), lz) * self.nw(q, r)
                    * self.t(w(r), w(nn), m) * self.nw(nn, j)
            }),
            18 => sum(&[k, k, l, l, l, l], |x| {
                let (lz, m, p, q, r, nn) = (x[0], x[1], x[2], x[3], x[4], x[5]);
                self.pz(lz, m) * self.nw(i, r) * self.t(w(r), w(nn), m) * self.nw(nn, p)
                    * self.tb(w(p), w(q), lz) * self.nw(q, j)
            }),
            20 => c(-one, sum(&[l, l, l, l, l, l], |x| {
                let (lw, kw, p, q, r2, r) = (x[0], x[1], x[2], x[3], x[4], x[5]);
                self.nw(lw, kw) * self.nw(i, p) * self.tb(w(p), w(q), w(lw)) * self.nw(q, r2)
                    * self.t(w(r2), w(r), w(kw)) * self.nw(r, j)
            })),
            // Q_{α_z α_w}
            21 => c(-one, sum(&[k, k, k, k, l], |x| {
                let (a, b, cc, d, kk) = (x[0], x[1], x[2], x[3], x[4]);
                self.pz(b, a) * self.pz(d, cc) * self.t(a, d, i) * self.tb(cc, b, w(kk)) * self.nw(kk, j)
            })),
            22 => sum(&[k, k, k, k, l, l, l], |x| {
                let (a, b, cc, d, kk, ll, p) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
                self.h(i, w(kk)) * self.nw(kk, ll) * self.nw(p, j) * self.pz(b, a) * self.pz(d, cc)
                    * self.t(a, d, w(ll)) * self.tb(cc, b, w(p))
            }),
            23..=26 => c(-one, sum(&[k, k], |x| {
                let (a, b) = (x[0], x[1]);
                self.pz(b, a) * self.zw_bracket(id, i, j, a, b)
            })),
            27 | 28 => sum(&[l, l], |x| {
                let (a, b) = (x[0], x[1]);
                self.nw(b, a) * self.zw_bracket(id, i, j, w(a), w(b))
            }),
            // Q_{ᾱ_z ᾱ_w}
            29 => sum(&[k, k, k, k, l, l, l], |x| {
                let (a, b, cc, d, p, q, kk) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
                self.nw(i, p) * self.nw(q, kk) * self.h(w(kk), j) * self.pz(b, a) * self.pz(d, cc)
                    * self.t(a, d, w(p)) * self.tb(cc, b, w(q))
            }),
            30 => c(-one, sum(&[k, k, k, k, l], |x| {
                let (a, b, cc, d, kk) = (x[0], x[1], x[2], x[3], x[4]);
                self.nw(i, kk) * self.pz(b, a) * self.pz(d, cc) * self.t(a, d, w(kk)) * self.tb(cc, b, j)
            })),
            31..=34 => c(-one, sum(&[k, k], |x| {
                let (a, b) = (x[0], x[1]);
                self.pz(b, a) * self.wz_bracket(id, i, j, a, b)
            })),
            35 | 36 => sum(&[l, l], |x| {
                let (a, b) = (x[0], x[1]);
                self.nw(b, a) * self.wz_bracket(id, i, j, w(a), w(b))
            }),
            _ => unreachable!("term id out of range"),
        }
    }

    /// Terms 5–16; `a` is a holomorphic and `b` an antiholomorphic slot.
    fn zz_bracket(&self, id: usize, i: usize, j: usize, a: usize, b: usize) -> Complex<T> {
        let l = self.table.l;
        let w = |x| self.w(x);
        let neg = |v: Complex<T>| -v;
        match id {
            5 => neg(sum(&[l, l, l, l], |x| {
                let (kk, p, q, ll) = (x[0], x[1], x[2], x[3]);
                self.t(i, w(kk), a) * self.nw(kk, p) * self.tb(w(p), w(q), b) * self.nw(q, ll) * self.h(w(ll), j)
            })),
            6 => sum(&[l, l], |x| {
                let (kk, ll) = (x[0], x[1]);
                self.t(i, w(kk), a) * self.nw(kk, ll) * self.tb(w(ll), j, b)
            }),
            7 | 13 => neg(sum(&[l, l, l, l], |x| {
                let (kk, p, q, ll) = (x[0], x[1], x[2], x[3]);
                self.tb(i, w(kk), b) * self.nw(kk, p) * self.t(w(p), w(q), a) * self.nw(q, ll) * self.h(w(ll), j)
            })),
            8 | 14 => sum(&[l, l, l, l, l, l], |x| {
                let (kk, r, s, p, q, ll) = (x[0], x[1], x[2], x[3], x[4], x[5]);
                self.h(i, w(kk)) * self.nw(kk, r) * self.tb(w(r), w(s), b) * self.nw(s, p)
                    * self.t(w(p), w(q), a) * self.nw(q, ll) * self.h(w(ll), j)
            }),
            9 => sum(&[l, l, l, l, l, l], |x| {
                let (kk, p, q, r, s, ll) = (x[0], x[1], x[2], x[3], x[4], x[5]);
                self.h(i, w(kk)) * self.nw(kk, p) * self.t(w(p), w(q), a) * self.nw(q, r)
                    * self.tb(w(r), w(s), b) * self.nw(s, ll) * self.h(w(ll), j)
            }),
            10 => neg(sum(&[l, l, l, l], |x| {
                let (kk, p, q, ll) = (x[0], x[1], x[2], x[3]);
                self.h(i, w(kk)) * self.nw(kk, p) * self.t(w(p), w(q), a) * self.nw(q, ll) * self.tb(w(ll), j, b)
            })),
            11 | 15 => sum(&[l, l], |x| {
                let (kk, ll) = (x[0], x[1]);
                self.tb(i, w(kk), b) * self.nw(kk, ll) * self.t(w(ll), j, a)
            }),
            12 | 16 => neg(sum(&[l, l, l, l], |x| {
                let (kk, r, s, ll) = (x[0], x[1], x[2], x[3]);
                self.h(i, w(kk)) * self.nw(kk, r) * self.tb(w(r), w(s), b) * self.nw(s, ll) * self.t(w(ll), j, a)
            })),
            _ => unreachable!(),
        }
    }

    /// Terms 23–28.
    fn zw_bracket(&self, id: usize, i: usize, j: usize, a: usize, b: usize) -> Complex<T> {
        let l = self.table.l;
        let w = |x| self.w(x);
        match id {
            23 => -sum(&[l, l, l], |x| {
                let (kk, p, q) = (x[0], x[1], x[2]);
                self.t(i, w(kk), a) * self.nw(kk, p) * self.tb(w(p), w(q), b) * self.nw(q, j)
            }),
            24 | 27 => -sum(&[l, l, l], |x| {
                let (kk, p, q) = (x[0], x[1], x[2]);
                self.tb(i, w(kk), b) * self.nw(kk, p) * self.t(w(p), w(q), a) * self.nw(q, j)
            }),
            25 | 28 => sum(&[l, l, l, l, l], |x| {
                let (kk, r, s, p, q) = (x[0], x[1], x[2], x[3], x[4]);
                self.h(i, w(kk)) * self.nw(kk, r) * self.tb(w(r), w(s), b) * self.nw(s, p)
                    * self.t(w(p), w(q), a) * self.nw(q, j)
            }),
            26 => sum(&[l, l, l, l, l], |x| {
                let (kk, p, q, r, s) = (x[0], x[1], x[2], x[3], x[4]);
                self.h(i, w(kk)) * self.nw(kk, p) * self.t(w(p), w(q), a) * self.nw(q, r)
                    * self.tb(w(r), w(s), b) * self.nw(s, j)
            }),
            _ => unreachable!(),
        }
    }

    /// Terms 31–36.
    fn wz_bracket(&self, id: usize, i: usize, j: usize, a: usize, b: usize) -> Complex<T> {
        let l = self.table.l;
        let w = |x| self.w(x);
        match id {
            31 | 35 => sum(&[l, l, l, l, l], |x| {
                let (r, s, p, q, kk) = (x[0], x[1], x[2], x[3], x[4]);
                self.nw(i, r) * self.tb(w(r), w(s), b) * self.nw(s, p) * self.t(w(p), w(q), a)
                    * self.nw(q, kk) * self.h(w(kk), j)
            }),
            32 => sum(&[l, l, l, l, l], |x| {
                let (p, q, r, s, kk) = (x[0], x[1], x[2], x[3], x[4]);
                self.nw(i, p) * self.t(w(p), w(q), a) * self.nw(q, r) * self.tb(w(r), w(s), b)
                    * self.nw(s, kk) * self.h(w(kk), j)
            }),
            33 => -sum(&[l, l, l], |x| {
                let (p, q, kk) = (x[0], x[1], x[2]);
                self.nw(i, p) * self.t(w(p), w(q), a) * self.nw(q, kk) * self.tb(w(kk), j, b)
            }),
            34 | 36 => -sum(&[l, l, l], |x| {
                let (p, q, kk) = (x[0], x[1], x[2]);
                self.nw(i, p) * self.tb(w(p), w(q), b) * self.nw(q, kk) * self.t(w(kk), j, a)
            }),
            _ => unreachable!(),
        }
    }
}

fn block_of(id: usize) -> Block {
    match id {
        1..=16 => Block::ZZ,
        17..=20 => Block::WW,
        21..=28 => Block::ZW,
        _ => Block::WZ,
    }
}

fn hermitian_part<T: Scalar>(m: &DMat<Complex<T>>) -> HermitianMatrix<T> {
    let half = T::c(0.5);
    HermitianMatrix::from_fn(m.rows(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * half)
}

/// Assembles `Q` from an order-≥3 Wirtinger table.
pub fn assemble_q<T: Scalar>(table: &WirtingerTable<T>) -> Result<QTensor<T>> {
    let (k, l) = (table.k, table.l);
    if k == 0 || l == 0 {
        return Err(Error::InvalidSpec("Q needs k ≥ 1 and l ≥ 1".into()));
    }
    if table.order() < 3 {
        return Err(Error::DimensionMismatch {
            what: "Wirtinger table order",
            expected: 3,
            found: table.order(),
        });
    }
    let m = k + l;
    let guard = T::c(DEFAULT_COND_GUARD);
    let a = HermitianMatrix::from_fn(k, |i, j| table.hess(i, j));
    let d = HermitianMatrix::from_fn(l, |i, j| -table.hess(k + i, k + j));
    let (p, _) = a.inverse_and_logdet(guard)?;
    let (nd, _) = d.inverse_and_logdet(guard)?;
    let ctx = Ctx {
        table,
        k,
        p: DMat::from_fn(k, k, |i, j| p.get(i, j)),
        n: DMat::from_fn(l, l, |i, j| -nd.get(i, j)),
    };

    let zero = Complex::new(T::zero(), T::zero());
    let mut raw = DMat::filled(m, m, zero);
    let mut terms = Vec::with_capacity(36);
    for id in 1..=36 {
        let block = block_of(id);
        let (r0, c0, rows, cols) = match block {
            Block::ZZ => (0, 0, k, k),
            Block::WW => (k, k, l, l),
            Block::ZW => (0, k, k, l),
            Block::WZ => (k, 0, l, k),
        };
        let mut full = DMat::filled(m, m, zero);
        let mut max_abs = T::zero();
        for i in 0..rows {
            for j in 0..cols {
                let v = ctx.term(id, i, j);
                max_abs = max_abs.max(v.norm());
                full[(r0 + i, c0 + j)] = v;
            }
        }
        raw = raw.add(&full);
        terms.push(TermRecord {
            id,
            block,
            max_abs,
            matrix: full,
        });
    }

    let mut hermitian_defect = T::zero();
    let mut conjugate_defect = T::zero();
    for i in 0..m {
        for j in 0..m {
            let e = (raw[(i, j)] - raw[(j, i)].conj()).norm();
            hermitian_defect = hermitian_defect.max(e);
            if i >= k && j < k {
                conjugate_defect = conjugate_defect.max(e);
            }
        }
    }
    let groups = GROUPS.map(|ids| {
        let mut g = DMat::filled(m, m, zero);
        for id in ids {
            g = g.add(&terms[id - 1].matrix);
        }
        hermitian_part(&g)
    });
    Ok(QTensor {
        k,
        l,
        matrix: hermitian_part(&raw),
        raw,
        hermitian_defect,
        conjugate_defect,
        groups,
        terms,
    })
}

impl<T: Scalar> QTensor<T> {
    /// Largest eigenvalue of `Q`.
    pub fn lambda_max(&self) -> T {
        self.matrix.min_max_eigenvalues().1
    }

    /// Largest eigenvalue of each sign group.
    pub fn group_lambda_max(&self) -> [T; 4] {
        [0, 1, 2, 3].map(|g| self.groups[g].min_max_eigenvalues().1)
    }

    /// Hermitian part of the sum of the listed terms.
    pub fn combination(&self, ids: &[usize]) -> HermitianMatrix<T> {
        let m = self.k + self.l;
        let mut g = DMat::filled(m, m, Complex::new(T::zero(), T::zero()));
        for &id in ids {
            g = g.add(&self.terms[id - 1].matrix);
        }
        hermitian_part(&g)
    }

    /// Ids of the terms with a nonzero contribution.
    pub fn contributing_terms(&self, tol: T) -> Vec<usize> {
        self.terms.iter().filter(|t| t.max_abs > tol).map(|t| t.id).collect()
    }
}
