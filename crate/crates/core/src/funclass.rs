//! Convexity classes and seeded random ensembles inside them.
//!
//! A function belongs to the class with bounds `(λ, Λ)` on a cloud of points
//! when, at every point, the eigenvalues of the convex block (`u_xx` or
//! `u_{z z̄}`) and of the negated concave block (`−u_yy` or `−u_{w w̄}`) lie
//! in `[λ, Λ]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{wirtinger_from_real, AtomFn, Expr, ExpressionSpec, Flavor, SpaceTimeJet};
use crate::linalg::{HermitianMatrix, SymmetricMatrix};
use crate::scalar::Scalar;

/// Eigen-bounds of both blocks at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointBounds<T> {
    pub point: Vec<T>,
    pub convex_min: T,
    pub convex_max: T,
    pub concave_min: T,
    pub concave_max: T,
}

impl<T: Scalar> PointBounds<T> {
    fn within(&self, lambda: T, cap: T, tol: T) -> bool {
        self.convex_min >= lambda - tol
            && self.concave_min >= lambda - tol
            && self.convex_max <= cap + tol
            && self.concave_max <= cap + tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport<T> {
    pub member: bool,
    pub lambda: T,
    pub cap: T,
    pub bounds: Vec<PointBounds<T>>,
    /// Index into `bounds` of the first point outside the class.
    pub first_violation: Option<usize>,
}

/// Block eigen-bounds of `spec` at `point` (time 0).
pub fn block_bounds<T: Scalar>(spec: &ExpressionSpec, point: &[T]) -> Result<PointBounds<T>> {
    let (k, l) = (spec.k, spec.l);
    let jet = spec.raw_jet(point, T::zero(), 2)?;
    let jet = if spec.time_dependent {
        jet.last_var_slice(0, 2)
    } else {
        jet
    };
    let ((cmin, cmax), (dmin, dmax)) = match spec.flavor {
        Flavor::Real => {
            let a = SymmetricMatrix::from_fn(k, |i, j| jet.partial(&[i, j]));
            let d = SymmetricMatrix::from_fn(l, |i, j| -jet.partial(&[k + i, k + j]));
            (a.min_max_eigenvalues(), d.min_max_eigenvalues())
        }
        Flavor::Complex => {
            let st = SpaceTimeJet::from_spatial(k, l, Flavor::Complex, point.to_vec(), jet);
            let table = wirtinger_from_real(&st)?;
            let a = HermitianMatrix::from_fn(k, |i, j| table.hess(i, j));
            let d = HermitianMatrix::from_fn(l, |i, j| -table.hess(k + i, k + j));
            (a.min_max_eigenvalues(), d.min_max_eigenvalues())
        }
    };
    Ok(PointBounds {
        point: point.to_vec(),
        convex_min: cmin,
        convex_max: cmax,
        concave_min: dmin,
        concave_max: dmax,
    })
}

/// Checks class membership on every point of `cloud`.
pub fn class_membership<T: Scalar>(
    spec: &ExpressionSpec,
    cloud: &[Vec<T>],
    lambda: T,
    cap: T,
) -> Result<ClassReport<T>> {
    if cloud.is_empty() {
        return Err(Error::InvalidSpec("empty sample cloud".into()));
    }
    if !(lambda > T::zero() && lambda <= cap) {
        return Err(Error::InvalidSpec(format!("class bounds need 0 < λ ≤ Λ, got {lambda} and {cap}")));
    }
    let bounds = cloud
        .par_iter()
        .map(|p| block_bounds(spec, p))
        .collect::<Result<Vec<_>>>()?;
    let tol = T::c(1e-12) * cap;
    let first_violation = bounds.iter().position(|b| !b.within(lambda, cap, tol));
    Ok(ClassReport {
        member: first_violation.is_none(),
        lambda,
        cap,
        bounds,
        first_violation,
    })
}

/// Sample cloud on the box `[−radius, radius]^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CloudSpec {
    pub radius: f64,
    /// Nodes per axis of the tensor grid.
    pub grid_per_axis: usize,
    /// Upper bound on the tensor grid size; the per-axis count is lowered
    /// in high dimension to respect it.
    pub max_grid_points: usize,
    /// Number of Halton points added to the grid.
    pub quasi_random: usize,
}

impl Default for CloudSpec {
    fn default() -> Self {
        CloudSpec {
            radius: 1.0,
            grid_per_axis: 11,
            max_grid_points: 20_000,
            quasi_random: 500,
        }
    }
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

impl CloudSpec {
    /// Per-axis grid count actually used in `dim` dimensions.
    pub fn axis_count(&self, dim: usize) -> usize {
        let mut n = self.grid_per_axis.max(1);
        while n > 2 && (n as f64).powi(dim as i32) > self.max_grid_points as f64 {
            n -= 1;
        }
        n
    }

    pub fn points(&self, dim: usize) -> Vec<Vec<f64>> {
        assert!(dim <= PRIMES.len(), "cloud dimension above {}", PRIMES.len());
        let r = self.radius;
        let n = self.axis_count(dim);
        let node = |i: usize| if n == 1 { 0.0 } else { -r + 2.0 * r * i as f64 / (n - 1) as f64 };
        let mut out = Vec::new();
        let total = n.pow(dim as u32);
        for mut idx in 0..total {
            let mut p = Vec::with_capacity(dim);
            for _ in 0..dim {
                p.push(node(idx % n));
                idx /= n;
            }
            out.push(p);
        }
        for i in 1..=self.quasi_random as u64 {
            out.push((0..dim).map(|d| -r + 2.0 * r * radical_inverse(i, PRIMES[d])).collect());
        }
        out
    }
}

/// Seeded family of perturbed quadratics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleSpec {
    pub k: usize,
    pub l: usize,
    pub flavor: Flavor,
    /// Convex-block strength.
    pub a: f64,
    /// Concave-block strength.
    pub b: f64,
    pub epsilon: f64,
    pub atoms: usize,
    /// Largest frequency component of an atom.
    pub max_frequency: f64,
    pub draws: usize,
    pub seed: u64,
    pub cloud: CloudSpec,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            k: 1,
            l: 1,
            flavor: Flavor::Real,
            a: 1.0,
            b: 1.0,
            epsilon: 0.1,
            atoms: 4,
            max_frequency: 2.0,
            draws: 100,
            seed: 0,
            cloud: CloudSpec::default(),
        }
    }
}

impl EnsembleSpec {
    pub fn dim(&self) -> usize {
        match self.flavor {
            Flavor::Real => self.k + self.l,
            Flavor::Complex => 2 * (self.k + self.l),
        }
    }

    /// Class bounds every draw satisfies: `(min(a, b)/2, 2 max(a, b))`.
    pub fn class_bounds(&self) -> (f64, f64) {
        (self.a.min(self.b) / 2.0, 2.0 * self.a.max(self.b))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.l == 0 {
            return Err(Error::InvalidSpec("k and l must be positive".into()));
        }
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(Error::InvalidSpec("base strengths must be positive".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidSpec("epsilon must be nonnegative".into()));
        }
        let limit = self.a.min(self.b) / 2.0;
        // atoms are normalized so the perturbation Hessian is bounded by ε
        if self.epsilon > limit {
            return Err(Error::AmplitudeTooLarge {
                bound: self.epsilon,
                limit,
            });
        }
        Ok(())
    }

    /// Unperturbed quadratic `a|x|²/2 − b|y|²/2`, or `a|z|² − b|w|²`.
    pub fn base(&self) -> Expr {
        let diag: Vec<f64> = match self.flavor {
            Flavor::Real => (0..self.k + self.l)
                .map(|i| if i < self.k { self.a } else { -self.b })
                .collect(),
            Flavor::Complex => (0..2 * (self.k + self.l))
                .map(|i| if i < 2 * self.k { 2.0 * self.a } else { -2.0 * self.b })
                .collect(),
        };
        Expr::diag_quad(&diag)
    }

    /// Generator for draw `index`, independent of every other draw.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Draw number `index`.
    pub fn member(&self, index: u64) -> Result<ExpressionSpec> {
        self.validate()?;
        let n = self.dim();
        let mut terms = vec![self.base()];
        if self.epsilon > 0.0 && self.atoms > 0 {
            let mut rng = self.rng(index);
            let mut raw = Vec::with_capacity(self.atoms);
            let mut weight = 0.0;
            for _ in 0..self.atoms {
                let omega: Vec<f64> = (0..n)
                    .map(|_| rng.random_range(-self.max_frequency..=self.max_frequency))
                    .collect();
                let c: f64 = rng.random_range(0.5..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let func = if rng.random_bool(0.5) { AtomFn::Sin } else { AtomFn::Cos };
                weight += c.abs() * omega.iter().map(|w| w * w).sum::<f64>();
                raw.push((c, func, omega, phase));
            }
            if weight > 0.0 {
                for (c, func, omega, phase) in raw {
                    terms.push(Expr::scale(self.epsilon * c / weight, Expr::atom(func, omega, phase)));
                }
            }
        }
        ExpressionSpec::new(self.k, self.l, self.flavor, false, Expr::sum(terms))
    }

    /// `count` evaluation points in the cloud box for draw `index`, from a
    /// stream disjoint from the function draws.
    pub fn points(&self, index: u64, count: usize) -> Vec<Vec<f64>> {
        let mut rng = self.rng(index | (1 << 63));
        let r = self.cloud.radius;
        (0..count)
            .map(|_| (0..self.dim()).map(|_| rng.random_range(-r..=r)).collect())
            .collect()
    }
}

/// All `es.draws` members, in draw order.
pub fn sample_ensemble(es: &EnsembleSpec) -> Result<Vec<ExpressionSpec>> {
    es.validate()?;
    (0..es.draws as u64).into_par_iter().map(|i| es.member(i)).collect()
}
