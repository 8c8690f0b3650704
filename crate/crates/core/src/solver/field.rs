use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{ExpressionSpec, Flavor};
use crate::linalg::{BandMatrix, CsrMatrix, HermitianMatrix, SymmetricMatrix};

use super::grid::{Grid, Neighbors, MAX_DIM};
use super::local::{local_eval, local_value, Hess, Local};

/// Courant constant of the explicit scheme: `dt ≤ c · h² · λ/Λ`.
pub const CFL_CONSTANT: f64 = 0.2;

/// How nodes outside the interior are handled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Frame nodes carry `exact` at the current time.
    Frozen { exact: ExpressionSpec },
    /// Stored values are a periodic part `v`; the solution is
    /// `u = ½ xᵀ M x + v` with `M = base_hessian`.
    Periodic { base_hessian: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Rk4,
    SemiImplicit,
}

/// Discrete solution of `∂_t u = F(u)` on a grid.
#[derive(Clone, Debug)]
pub struct FlowField {
    pub grid: Grid,
    pub k: usize,
    pub l: usize,
    pub flavor: Flavor,
    pub policy: BoundaryPolicy,
    pub dt: f64,
    /// `(λ, Λ)` used for the step limit.
    pub class_bounds: (f64, f64),
    pub times: Vec<f64>,
    pub slices: Vec<Vec<f64>>,
    nbr: Arc<Neighbors>,
    interior: Arc<Vec<usize>>,
    frame: Arc<Vec<usize>>,
}

fn real_dim(k: usize, l: usize, flavor: Flavor) -> usize {
    match flavor {
        Flavor::Real => k + l,
        Flavor::Complex => 2 * (k + l),
    }
}

impl FlowField {
    fn build(
        grid: Grid,
        k: usize,
        l: usize,
        flavor: Flavor,
        policy: BoundaryPolicy,
        dt: f64,
        class_bounds: (f64, f64),
        initial: Vec<f64>,
    ) -> Result<Self> {
        grid.validate()?;
        if real_dim(k, l, flavor) != grid.dim() {
            return Err(Error::DimensionMismatch {
                what: "grid dimension",
                expected: real_dim(k, l, flavor),
                found: grid.dim(),
            });
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidSpec("timestep must be positive".into()));
        }
        if !(class_bounds.0 > 0.0 && class_bounds.0 <= class_bounds.1) {
            return Err(Error::InvalidSpec("class bounds need 0 < λ ≤ Λ".into()));
        }
        let nbr = Arc::new(Neighbors::new(&grid));
        let (interior, frame): (Vec<usize>, Vec<usize>) = (0..grid.len()).partition(|&n| grid.is_interior(n));
        Ok(FlowField {
            grid,
            k,
            l,
            flavor,
            policy,
            dt,
            class_bounds,
            times: vec![0.0],
            slices: vec![initial],
            nbr,
            interior: Arc::new(interior),
            frame: Arc::new(frame),
        })
    }

    /// Framed grid whose initial data and frame both come from `exact`.
    pub fn framed(grid: Grid, exact: ExpressionSpec, dt: f64, class_bounds: (f64, f64)) -> Result<Self> {
        let initial = exact.clone();
        Self::framed_with_initial(grid, exact, &initial, dt, class_bounds)
    }

    /// Framed grid with frame data from `boundary` and interior initial data
    /// from `initial`.
    pub fn framed_with_initial(
        grid: Grid,
        boundary: ExpressionSpec,
        initial: &ExpressionSpec,
        dt: f64,
        class_bounds: (f64, f64),
    ) -> Result<Self> {
        if grid.periodic {
            return Err(Error::InvalidSpec("framed field needs a non-periodic grid".into()));
        }
        let values = (0..grid.len())
            .map(|n| {
                let spec = if grid.is_interior(n) { initial } else { &boundary };
                spec.value(&grid.coords(n), 0.0)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (k, l, flavor) = (boundary.k, boundary.l, boundary.flavor);
        Self::build(grid, k, l, flavor, BoundaryPolicy::Frozen { exact: boundary }, dt, class_bounds, values)
    }

    /// Periodic grid with `u = ½ xᵀ M x + v`, initial `v` from `perturbation`.
    pub fn periodic(
        grid: Grid,
        k: usize,
        l: usize,
        flavor: Flavor,
        base_hessian: Vec<Vec<f64>>,
        perturbation: &ExpressionSpec,
        dt: f64,
        class_bounds: (f64, f64),
    ) -> Result<Self> {
        if !grid.periodic {
            return Err(Error::InvalidSpec("periodic field needs a periodic grid".into()));
        }
        let d = grid.dim();
        if base_hessian.len() != d || base_hessian.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                what: "base Hessian",
                expected: d,
                found: base_hessian.len(),
            });
        }
        let values = (0..grid.len())
            .map(|n| perturbation.value(&grid.coords(n), 0.0))
            .collect::<Result<Vec<f64>>>()?;
        Self::build(grid, k, l, flavor, BoundaryPolicy::Periodic { base_hessian }, dt, class_bounds, values)
    }

    /// Field with explicit initial values (same geometry and policy as `self`).
    pub fn with_values(&self, values: Vec<f64>, time: f64) -> Self {
        assert_eq!(values.len(), self.grid.len());
        FlowField {
            times: vec![time],
            slices: vec![values],
            ..self.clone()
        }
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn current(&self) -> &[f64] {
        self.slices.last().expect("field has a slice")
    }

    pub fn time(&self) -> f64 {
        *self.times.last().expect("field has a time")
    }

    pub fn cfl_limit(&self) -> f64 {
        let (lo, hi) = self.class_bounds;
        CFL_CONSTANT * self.grid.h_min().powi(2) * lo / hi
    }

    /// Full solution value `u` at a node of slice `values`.
    pub fn u_value(&self, values: &[f64], node: usize) -> f64 {
        match &self.policy {
            BoundaryPolicy::Frozen { .. } => values[node],
            BoundaryPolicy::Periodic { base_hessian } => {
                let x = self.grid.coords(node);
                let d = x.len();
                let mut q = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        q += 0.5 * x[i] * base_hessian[i][j] * x[j];
                    }
                }
                q + values[node]
            }
        }
    }

    /// Centered-difference real Hessian of `u` at an interior node.
    pub fn hessian(&self, values: &[f64], node: usize) -> Hess {
        let d = self.grid.dim();
        let nb = &self.nbr;
        let mut h = [[0.0; MAX_DIM]; MAX_DIM];
        let c = values[node];
        for a in 0..d {
            let ha = self.grid.h(a);
            let (up, dn) = (nb.up(node, a), nb.down(node, a));
            h[a][a] = (values[up] - 2.0 * c + values[dn]) / (ha * ha);
            for b in 0..a {
                let hb = self.grid.h(b);
                let pp = values[nb.up(up, b)];
                let pm = values[nb.down(up, b)];
                let mp = values[nb.up(dn, b)];
                let mm = values[nb.down(dn, b)];
                let v = (pp - pm - mp + mm) / (4.0 * ha * hb);
                h[a][b] = v;
                h[b][a] = v;
            }
        }
        if let BoundaryPolicy::Periodic { base_hessian } = &self.policy {
            for a in 0..d {
                for b in 0..d {
                    h[a][b] += base_hessian[a][b];
                }
            }
        }
        h
    }

    fn local(&self, values: &[f64], node: usize) -> Option<Local> {
        local_eval(&self.hessian(values, node), self.k, self.l, self.flavor)
    }

    /// `F(u)` at every node (zero on the frame). The first failing node in
    /// node order is reported as a class exit.
    pub fn eval_f(&self, values: &[f64], time: f64) -> Result<Vec<f64>> {
        let locals: Vec<Option<f64>> = self
            .interior
            .par_iter()
            .map(|&n| local_value(&self.hessian(values, n), self.k, self.l, self.flavor))
            .collect();
        let mut out = vec![0.0; values.len()];
        for (&n, f) in self.interior.iter().zip(locals) {
            out[n] = f.ok_or(Error::ClassExit { time, node: n })?;
        }
        Ok(out)
    }

    fn frame_values(&self, time: f64) -> Result<Vec<(usize, f64)>> {
        match &self.policy {
            BoundaryPolicy::Frozen { exact } => self
                .frame
                .par_iter()
                .map(|&n| Ok((n, exact.value(&self.grid.coords(n), time)?)))
                .collect(),
            BoundaryPolicy::Periodic { .. } => Ok(Vec::new()),
        }
    }

    fn rk4(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        let dt = self.dt;
        let limit = self.cfl_limit();
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        let frozen_in_time = match &self.policy {
            BoundaryPolicy::Frozen { exact } => !exact.time_dependent,
            BoundaryPolicy::Periodic { .. } => true,
        };
        let half = if frozen_in_time { Vec::new() } else { self.frame_values(t + 0.5 * dt)? };
        let full = if frozen_in_time { Vec::new() } else { self.frame_values(t + dt)? };
        let stage = |base: &[f64], kv: &[f64], s: f64, frame: &[(usize, f64)]| {
            let mut v = base.to_vec();
            for &n in self.interior.iter() {
                v[n] += s * kv[n];
            }
            for &(n, x) in frame {
                v[n] = x;
            }
            v
        };
        let k1 = self.eval_f(u, t)?;
        let k2 = self.eval_f(&stage(u, &k1, 0.5 * dt, &half), t + 0.5 * dt)?;
        let k3 = self.eval_f(&stage(u, &k2, 0.5 * dt, &half), t + 0.5 * dt)?;
        let k4 = self.eval_f(&stage(u, &k3, dt, &full), t + dt)?;
        let mut next = u.to_vec();
        for &n in self.interior.iter() {
            next[n] += dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
        }
        for (n, x) in full {
            next[n] = x;
        }
        Ok(next)
    }

    /// Stencil weights of the linearization at `node`: `(node, weight)`
    /// pairs over grid nodes, together with `F` at the node.
    fn jacobian_row(&self, values: &[f64], node: usize) -> Option<(f64, Vec<(usize, f64)>)> {
        let loc = self.local(values, node)?;
        let d = self.grid.dim();
        let nb = &self.nbr;
        let mut row = Vec::with_capacity(1 + 2 * d + 2 * d * d);
        let mut center = 0.0;
        for a in 0..d {
            let ha = self.grid.h(a);
            let w = loc.g[a][a] / (ha * ha);
            center -= 2.0 * w;
            let (up, dn) = (nb.up(node, a), nb.down(node, a));
            row.push((up, w));
            row.push((dn, w));
            for b in 0..a {
                let w = loc.g[a][b] / (2.0 * ha * self.grid.h(b));
                row.push((nb.up(up, b), w));
                row.push((nb.down(up, b), -w));
                row.push((nb.up(dn, b), -w));
                row.push((nb.down(dn, b), w));
            }
        }
        row.push((node, center));
        Some((loc.f, row))
    }

    /// Linearization rows and `F` over the interior, in interior order.
    pub(crate) fn linearize(&self, values: &[f64], time: f64) -> Result<Vec<(f64, Vec<(usize, f64)>)>> {
        let rows: Vec<_> = self
            .interior
            .par_iter()
            .map(|&n| self.jacobian_row(values, n))
            .collect();
        rows.into_iter()
            .zip(self.interior.iter())
            .map(|(r, &n)| r.ok_or(Error::ClassExit { time, node: n }))
            .collect()
    }

    /// Position of each node among the unknowns, `usize::MAX` on the frame.
    pub(crate) fn unknown_index(&self) -> Vec<usize> {
        let mut idx = vec![usize::MAX; self.grid.len()];
        for (i, &n) in self.interior.iter().enumerate() {
            idx[n] = i;
        }
        idx
    }

    /// Solves `(I − s J) δ = rhs` over the interior, with `J` given by
    /// `rows`; frame contributions must already be in `rhs`.
    pub(crate) fn solve_shifted(&self, rows: &[(f64, Vec<(usize, f64)>)], s: f64, identity: f64, rhs: &mut [f64]) -> Result<()> {
        let idx = self.unknown_index();
        let n = rows.len();
        if self.grid.periodic {
            let csr = CsrMatrix::from_rows(
                rows.iter()
                    .enumerate()
                    .map(|(i, (_, r))| {
                        let mut out: Vec<(usize, f64)> = r.iter().map(|&(node, w)| (idx[node], -s * w)).collect();
                        out.push((i, identity));
                        out
                    })
                    .collect(),
            );
            let mut x = vec![0.0; n];
            csr.bicgstab(rhs, &mut x, 1e-13, 5000)?;
            rhs.copy_from_slice(&x);
            Ok(())
        } else {
            let mut bw = 0;
            for (i, (_, r)) in rows.iter().enumerate() {
                for &(node, _) in r {
                    if idx[node] != usize::MAX {
                        bw = bw.max(idx[node].abs_diff(i));
                    }
                }
            }
            let mut band = BandMatrix::zeros(n, bw, bw);
            for (i, (_, r)) in rows.iter().enumerate() {
                band.add(i, i, identity);
                for &(node, w) in r {
                    if idx[node] != usize::MAX {
                        band.add(i, idx[node], -s * w);
                    }
                }
            }
            band.solve(rhs)
        }
    }

    fn semi_implicit(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        let dt = self.dt;
        let rows = self.linearize(u, t)?;
        let mut next = u.to_vec();
        for (n, x) in self.frame_values(t + dt)? {
            next[n] = x;
        }
        let idx = self.unknown_index();
        // δ − dt J δ = dt F(u) + dt J_frame δ_frame
        let mut rhs: Vec<f64> = rows
            .iter()
            .map(|(f, r)| {
                let frame: f64 = r
                    .iter()
                    .filter(|(node, _)| idx[*node] == usize::MAX)
                    .map(|&(node, w)| w * (next[node] - u[node]))
                    .sum();
                dt * (f + frame)
            })
            .collect();
        self.solve_shifted(&rows, dt, 1.0, &mut rhs)?;
        for (&n, d) in self.interior.iter().zip(rhs) {
            next[n] = u[n] + d;
        }
        Ok(next)
    }

    /// Next slice from `u` at time `t`, without storing it.
    pub fn advance_values(&self, u: &[f64], t: f64, scheme: Scheme) -> Result<Vec<f64>> {
        match scheme {
            Scheme::Rk4 => self.rk4(u, t),
            Scheme::SemiImplicit => self.semi_implicit(u, t),
        }
    }

    /// Runs `steps` steps, keeping every `record_every`-th slice and the last.
    pub fn run(&mut self, steps: usize, scheme: Scheme, record_every: usize) -> Result<()> {
        let every = record_every.max(1);
        let mut u = self.current().to_vec();
        let mut t = self.time();
        for s in 1..=steps {
            u = self.advance_values(&u, t, scheme)?;
            t = self.times[0] + s as f64 * self.dt;
            if s % every == 0 || s == steps {
                self.times.push(t);
                self.slices.push(u.clone());
            }
        }
        Ok(())
    }
}

/// One step appended to the field.
pub fn step_parabolic(field: &mut FlowField, scheme: Scheme) -> Result<()> {
    let t = field.time();
    let next = field.advance_values(field.current(), t, scheme)?;
    field.times.push(t + field.dt);
    field.slices.push(next);
    Ok(())
}

/// Block eigen-bounds of one slice over the interior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceBounds {
    pub time: f64,
    pub convex_min: f64,
    pub convex_max: f64,
    pub concave_min: f64,
    pub concave_max: f64,
}

impl SliceBounds {
    pub fn within(&self, lambda: f64, cap: f64) -> bool {
        self.convex_min >= lambda && self.concave_min >= lambda && self.convex_max <= cap && self.concave_max <= cap
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassSeries {
    pub slices: Vec<SliceBounds>,
    pub first_violation: Option<usize>,
}

/// Eigen-bounds of `(convex block, −concave block)` from a real Hessian.
pub fn hessian_block_bounds(h: &Hess, k: usize, l: usize, flavor: Flavor) -> ((f64, f64), (f64, f64)) {
    match flavor {
        Flavor::Real => (
            SymmetricMatrix::from_fn(k, |i, j| h[i][j]).min_max_eigenvalues(),
            SymmetricMatrix::from_fn(l, |i, j| -h[k + i][k + j]).min_max_eigenvalues(),
        ),
        Flavor::Complex => {
            let entry = |a: usize, b: usize| {
                let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
                num_complex::Complex::new(0.25 * (h[xa][xb] + h[ya][yb]), 0.25 * (h[xa][yb] - h[ya][xb]))
            };
            (
                HermitianMatrix::from_fn(k, |i, j| entry(i, j)).min_max_eigenvalues(),
                HermitianMatrix::from_fn(l, |i, j| -entry(k + i, k + j)).min_max_eigenvalues(),
            )
        }
    }
}

/// Per-slice block eigen-bounds, flagging the first slice outside `[λ, Λ]`.
pub fn monitor_class(field: &FlowField, lambda: f64, cap: f64) -> ClassSeries {
    let slices: Vec<SliceBounds> = field
        .slices
        .iter()
        .zip(&field.times)
        .map(|(u, &time)| {
            let per_node: Vec<_> = field
                .interior()
                .par_iter()
                .map(|&n| hessian_block_bounds(&field.hessian(u, n), field.k, field.l, field.flavor))
                .collect();
            let mut b = SliceBounds {
                time,
                convex_min: f64::INFINITY,
                convex_max: f64::NEG_INFINITY,
                concave_min: f64::INFINITY,
                concave_max: f64::NEG_INFINITY,
            };
            for ((cmin, cmax), (dmin, dmax)) in per_node {
                b.convex_min = b.convex_min.min(cmin);
                b.convex_max = b.convex_max.max(cmax);
                b.concave_min = b.concave_min.min(dmin);
                b.concave_max = b.concave_max.max(dmax);
            }
            b
        })
        .collect();
    let first_violation = slices.iter().position(|s| !s.within(lambda, cap));
    ClassSeries { slices, first_violation }
}
