//! Oscillation of `∂_t u` and `W` on parabolic cylinders, Hölder-exponent
//! fits, parabolic rescaling and rigidity probes.
//!
//! A cylinder of radius `ρ` about `(w, s)` holds the samples with
//! `max_a |x_a − w_a| ≤ ρ` (complex coordinates use the modulus of each
//! complex coordinate) and `s − ρ² ≤ t ≤ s`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::complexify_point;
use crate::jets::{evaluate_jet, wirtinger_from_real, ExpressionSpec, Flavor};
use crate::linalg::{det_lu, DMat, HermitianMatrix};
use crate::solver::{operator_from_hessian, BoundaryPolicy, FlowField, Grid, Hess};
use crate::twisted::{assemble_w, eval_h, eval_h_complex};

/// Relative slack on cylinder boundaries, so grid nodes lying on the
/// boundary up to rounding are counted inside.
pub const CONTAINMENT_SLACK: f64 = 1e-9;

/// Cylinder about `(center, time)` of radius `radius`, with a ladder of
/// smaller radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub center: Vec<f64>,
    pub time: f64,
    pub radius: f64,
    pub ladder: Vec<f64>,
}

impl CylinderSpec {
    /// Ladder `R, R/2, R/4, …` with `levels` entries.
    pub fn dyadic(center: Vec<f64>, time: f64, radius: f64, levels: usize) -> Self {
        let ladder = (0..levels).map(|i| radius / f64::from(1u32 << i)).collect();
        CylinderSpec {
            center,
            time,
            radius,
            ladder,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidSpec("cylinder radius must be positive".into()));
        }
        let decreasing = self.ladder.windows(2).all(|w| w[1] < w[0]);
        if !decreasing || self.ladder.iter().any(|&r| !(r > 0.0 && r <= self.radius)) {
            return Err(Error::InvalidSpec(
                "ladder must be strictly decreasing within (0, R]".into(),
            ));
        }
        Ok(())
    }

    /// The earlier cylinder `Θ(R)`, centered at time `s − 4R²`.
    pub fn shifted(&self) -> CylinderSpec {
        CylinderSpec {
            time: self.time - 4.0 * self.radius * self.radius,
            ..self.clone()
        }
    }

    pub fn contains(&self, x: &[f64], t: f64, rho: f64, flavor: Flavor) -> bool {
        let slack = CONTAINMENT_SLACK * (1.0 + self.time.abs() + rho * rho);
        if t > self.time + slack || t < self.time - rho * rho - slack {
            return false;
        }
        let scale = self.center.iter().fold(rho, |m, c| m.max(c.abs()));
        let rho = rho + CONTAINMENT_SLACK * scale;
        match flavor {
            Flavor::Real => x.iter().zip(&self.center).all(|(a, c)| (a - c).abs() <= rho),
            Flavor::Complex => x.chunks(2).zip(self.center.chunks(2)).all(|(a, c)| {
                let dx = a[0] - c[0];
                let dy = a.get(1).copied().unwrap_or(0.0) - c.get(1).copied().unwrap_or(0.0);
                dx.hypot(dy) <= rho
            }),
        }
    }
}

/// Named quantities sampled at space-time points.
#[derive(Clone, Debug, Default)]
pub struct SampleSet {
    pub flavor: Option<Flavor>,
    pub names: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    /// `values[i][q]` is quantity `q` at sample `i`.
    pub values: Vec<Vec<f64>>,
}

/// Indices into [`SampleSet::names`] of the terms summed in `P(ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderQuantities {
    pub ut: usize,
    pub family: Vec<usize>,
}

fn vector_family(m: usize, flavor: Flavor) -> Vec<(String, Vec<Complex<f64>>)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    let unit = |j: usize, c: Complex<f64>| {
        let mut v = vec![Complex::new(0.0, 0.0); m];
        v[j] = c;
        v
    };
    for j in 0..m {
        out.push((format!("Wvv[e{j}]"), unit(j, Complex::new(1.0, 0.0))));
    }
    let mut phases = vec![("+", Complex::new(1.0, 0.0)), ("-", Complex::new(-1.0, 0.0))];
    if flavor == Flavor::Complex {
        phases.push(("+i", Complex::new(0.0, 1.0)));
        phases.push(("-i", Complex::new(0.0, -1.0)));
    }
    for j in 0..m {
        for k in j + 1..m {
            for (tag, ph) in &phases {
                let mut v = unit(j, Complex::new(s, 0.0));
                v[k] = ph * s;
                out.push((format!("Wvv[e{j}{tag}e{k}]"), v));
            }
        }
    }
    out
}

/// `W` of a real Hessian, as a complex matrix (real entries in the real case).
pub fn w_from_hessian(h: &Hess, k: usize, l: usize, flavor: Flavor) -> DMat<Complex<f64>> {
    let m = k + l;
    let block = match flavor {
        Flavor::Real => DMat::from_fn(m, m, |i, j| Complex::new(h[i][j], 0.0)),
        Flavor::Complex => DMat::from_fn(m, m, |a, b| {
            let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
            Complex::new(0.25 * (h[xa][xb] + h[ya][yb]), 0.25 * (h[xa][yb] - h[ya][xb]))
        }),
    };
    assemble_w(&block.block(0, 0, k, k), &block.block(0, k, k, l), &block.block(k, k, l, l))
}

impl SampleSet {
    /// `∂_t u = F(u)`, the components of `W` and `W_{v v̄}` over the vector
    /// family, at every interior node of every recorded slice.
    pub fn from_field(field: &FlowField) -> Result<Self> {
        Self::collect(field, None)
    }

    /// As [`SampleSet::from_field`], keeping only samples inside the outer
    /// cylinder of `region`.
    pub fn from_field_within(field: &FlowField, region: &CylinderSpec) -> Result<Self> {
        Self::collect(field, Some(region))
    }

    fn collect(field: &FlowField, region: Option<&CylinderSpec>) -> Result<Self> {
        let (k, l, flavor) = (field.k, field.l, field.flavor);
        let m = k + l;
        let family = vector_family(m, flavor);
        let mut names = vec!["ut".to_string()];
        for i in 0..m {
            for j in i..m {
                names.push(format!("W[{i}][{j}]"));
                if flavor == Flavor::Complex && j > i {
                    names.push(format!("ImW[{i}][{j}]"));
                }
            }
        }
        names.extend(family.iter().map(|(n, _)| n.clone()));
        let mut set = SampleSet {
            flavor: Some(flavor),
            names,
            ..Default::default()
        };
        for (u, &t) in field.slices.iter().zip(&field.times) {
            let nodes: Vec<usize> = match region {
                None => field.interior().to_vec(),
                Some(c) => field
                    .interior()
                    .iter()
                    .copied()
                    .filter(|&n| c.contains(&field.grid.coords(n), t, c.radius, flavor))
                    .collect(),
            };
            let rows: Vec<Option<Vec<f64>>> = nodes
                .par_iter()
                .map(|&n| {
                    let h = field.hessian(u, n);
                    let f = operator_from_hessian(&h, k, l, flavor)?;
                    let w = w_from_hessian(&h, k, l, flavor);
                    let mut row = vec![f];
                    for i in 0..m {
                        for j in i..m {
                            row.push(w[(i, j)].re);
                            if flavor == Flavor::Complex && j > i {
                                row.push(w[(i, j)].im);
                            }
                        }
                    }
                    for (_, v) in &family {
                        let mut q = Complex::new(0.0, 0.0);
                        for i in 0..m {
                            for j in 0..m {
                                q += v[i].conj() * w[(i, j)] * v[j];
                            }
                        }
                        row.push(q.re);
                    }
                    Some(row)
                })
                .collect();
            for (&n, row) in nodes.iter().zip(rows) {
                let row = row.ok_or(Error::ClassExit { time: t, node: n })?;
                set.points.push(field.grid.coords(n));
                set.times.push(t);
                set.values.push(row);
            }
        }
        Ok(set)
    }

    /// The `P(ρ)` terms of a set built by [`SampleSet::from_field`].
    pub fn ladder_quantities(&self) -> LadderQuantities {
        LadderQuantities {
            ut: self.names.iter().position(|n| n == "ut").unwrap_or(0),
            family: (0..self.names.len()).filter(|&i| self.names[i].starts_with("Wvv[")).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `sup − inf` of every quantity over the samples in the cylinder of radius `rho`.
pub fn cylinder_oscillation(set: &SampleSet, cyl: &CylinderSpec, rho: f64) -> Result<Vec<f64>> {
    let flavor = set.flavor.unwrap_or(Flavor::Real);
    let q = set.names.len();
    let mut lo = vec![f64::INFINITY; q];
    let mut hi = vec![f64::NEG_INFINITY; q];
    let mut any = false;
    for i in 0..set.len() {
        if cyl.contains(&set.points[i], set.times[i], rho, flavor) {
            any = true;
            for (j, &v) in set.values[i].iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
    }
    if !any {
        return Err(Error::EmptyCylinder);
    }
    Ok(hi.iter().zip(&lo).map(|(h, l)| h - l).collect())
}

/// One rung of the ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRung {
    pub rho: f64,
    /// Oscillation of every quantity, in [`SampleSet::names`] order.
    pub osc: Vec<f64>,
    /// `osc ∂_t u + Σ_v osc W_{v v̄}`.
    pub p: f64,
}

pub fn oscillation_ladder(set: &SampleSet, cyl: &CylinderSpec) -> Result<Vec<LadderRung>> {
    cyl.validate()?;
    let lq = set.ladder_quantities();
    cyl.ladder
        .par_iter()
        .map(|&rho| {
            let osc = cylinder_oscillation(set, cyl, rho)?;
            let p = osc[lq.ut] + lq.family.iter().map(|&i| osc[i]).sum::<f64>();
            Ok(LadderRung { rho, osc, p })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderFit {
    /// Least-squares slope of `log P` against `log ρ`.
    pub alpha: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

/// Fits `P ≈ C ρ^α` through `(ρ, P)` pairs.
pub fn holder_exponent_fit(ladder: &[(f64, f64)]) -> Result<HolderFit> {
    if ladder.len() < 3 {
        return Err(Error::DegenerateLadder(format!("{} rungs, need at least 3", ladder.len())));
    }
    if let Some(&(rho, p)) = ladder.iter().find(|(r, p)| !(*p > 0.0 && *r > 0.0)) {
        return Err(Error::DegenerateLadder(format!(
            "nonpositive oscillation {p} at radius {rho}; alpha is +inf by convention"
        )));
    }
    let n = ladder.len() as f64;
    let xs: Vec<f64> = ladder.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = ladder.iter().map(|(_, p)| p.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateLadder("all radii equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - alpha * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(HolderFit {
        alpha,
        intercept,
        residual,
    })
}

/// `v(x, t) = μ⁻² u(μ x, μ² t)`.
pub fn parabolic_rescale(spec: &ExpressionSpec, mu: f64) -> Result<ExpressionSpec> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::DomainExceeded(format!("rescaling factor {mu} must be positive and finite")));
    }
    let n = spec.dim();
    let mut map: Vec<usize> = (0..n).collect();
    let mut scale = vec![mu; n];
    if spec.time_dependent {
        map.push(n);
        scale.push(mu * mu);
    }
    Ok(ExpressionSpec {
        expr: crate::jets::Expr::scale(1.0 / (mu * mu), spec.expr.substitute(spec.nvars(), &map, &scale)),
        ..spec.clone()
    })
}

/// Rescaled copy of a field: coordinates `x/μ`, times `t/μ²`, values `u/μ²`.
pub fn rescale_field(field: &FlowField, mu: f64) -> Result<FlowField> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::DomainExceeded(format!("rescaling factor {mu} must be positive and finite")));
    }
    let grid = Grid {
        lo: field.grid.lo.iter().map(|x| x / mu).collect(),
        hi: field.grid.hi.iter().map(|x| x / mu).collect(),
        ..field.grid.clone()
    };
    let policy = match &field.policy {
        BoundaryPolicy::Frozen { exact } => BoundaryPolicy::Frozen {
            exact: parabolic_rescale(exact, mu)?,
        },
        p @ BoundaryPolicy::Periodic { .. } => p.clone(),
    };
    let inv = 1.0 / (mu * mu);
    let mut out = field.clone();
    out.grid = grid;
    out.policy = policy;
    out.dt = field.dt * inv;
    out.times = field.times.iter().map(|t| t * inv).collect();
    out.slices = field.slices.iter().map(|s| s.iter().map(|v| v * inv).collect()).collect();
    if let Some(s) = out.slices.first().cloned() {
        // rebuild cached neighbor tables for the new grid
        let rebuilt = match &out.policy {
            BoundaryPolicy::Frozen { exact } => FlowField::framed(out.grid.clone(), exact.clone(), out.dt, out.class_bounds),
            BoundaryPolicy::Periodic { base_hessian } => {
                let zero = ExpressionSpec::new(
                    out.k,
                    out.l,
                    out.flavor,
                    false,
                    crate::jets::Expr::constant(out.grid.dim(), 0.0),
                )?;
                FlowField::periodic(
                    out.grid.clone(),
                    out.k,
                    out.l,
                    out.flavor,
                    base_hessian.clone(),
                    &zero,
                    out.dt,
                    out.class_bounds,
                )
            }
        }?;
        let mut r = rebuilt.with_values(s, out.times[0]);
        r.times = out.times;
        r.slices = out.slices;
        return Ok(r);
    }
    Ok(out)
}

/// Norm of the third derivatives `u_{a b̄ c}` (complex) or `u_{ijk}` (real)
/// at a point and time.
pub fn third_derivative_norm(spec: &ExpressionSpec, point: &[f64], time: f64) -> Result<f64> {
    let jet = evaluate_jet(spec, point, time)?;
    let n = spec.dim();
    let mut acc = 0.0;
    match spec.flavor {
        Flavor::Real => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        acc += jet.partial(&[i, j, k]).powi(2);
                    }
                }
            }
        }
        Flavor::Complex => {
            let table = wirtinger_from_real(&jet)?;
            let m = spec.k + spec.l;
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        acc += table.get(&[a, c], &[b]).norm_sqr() + table.get(&[a], &[b, c]).norm_sqr();
                    }
                }
            }
        }
    }
    Ok(acc.sqrt())
}

fn h_residual(spec: &ExpressionSpec, point: &[f64], time: f64) -> Result<f64> {
    let jet = evaluate_jet(spec, point, time)?;
    match spec.flavor {
        Flavor::Real => eval_h(&jet),
        Flavor::Complex => {
            let mut table = wirtinger_from_real(&jet)?;
            table.ut = jet.time_partial(1, &[])?;
            eval_h_complex(&table)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RescaleReport {
    pub mu: f64,
    pub third_norm_before: f64,
    pub third_norm_after: f64,
    /// `third_norm_after / third_norm_before`, which should equal `μ`.
    pub ratio: f64,
    /// `H(u)` at `(μ x, μ² t)`.
    pub h_before: f64,
    /// `H(v)` at `(x, t)`.
    pub h_after: f64,
}

/// Rescales `spec` and compares third derivatives at the origin and `H`
/// at the corresponding points.
pub fn rescale_report(spec: &ExpressionSpec, mu: f64, point: &[f64], time: f64) -> Result<RescaleReport> {
    let v = parabolic_rescale(spec, mu)?;
    let origin = vec![0.0; spec.dim()];
    let before = third_derivative_norm(spec, &origin, 0.0)?;
    let after = third_derivative_norm(&v, &origin, 0.0)?;
    let scaled: Vec<f64> = point.iter().map(|x| mu * x).collect();
    Ok(RescaleReport {
        mu,
        third_norm_before: before,
        third_norm_after: after,
        ratio: after / before,
        h_before: h_residual(spec, &scaled, mu * mu * time)?,
        h_after: h_residual(&v, point, time)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidityReport {
    /// `sup |det W − 1|` over the interior.
    pub det_deviation: f64,
    /// Largest `sup − inf` of a `W` entry over the interior.
    pub w_variation: f64,
    /// `sup |F(u)|` over the interior.
    pub f_residual: f64,
    /// `sup |det W − exp F(u)|` over the interior.
    pub identity_defect: f64,
}

/// Deviation of a solved field from the quadratic picture.
pub fn rigidity_probe(field: &FlowField, slice: usize) -> Result<RigidityReport> {
    let (k, l, flavor) = (field.k, field.l, field.flavor);
    let m = k + l;
    let u = &field.slices[slice];
    let per_node: Vec<Option<(f64, f64, DMat<Complex<f64>>)>> = field
        .interior()
        .par_iter()
        .map(|&n| {
            let h = field.hessian(u, n);
            let f = operator_from_hessian(&h, k, l, flavor)?;
            let w = w_from_hessian(&h, k, l, flavor);
            let det = match flavor {
                Flavor::Real => det_lu(&(0..m).map(|i| (0..m).map(|j| w[(i, j)].re).collect()).collect::<Vec<_>>()),
                Flavor::Complex => HermitianMatrix::from_fn(m, |i, j| w[(i, j)]).eigenvalues().iter().product(),
            };
            Some((f, det, w))
        })
        .collect();
    let mut det_deviation = 0.0f64;
    let mut f_residual = 0.0f64;
    let mut identity_defect = 0.0f64;
    let mut lo = vec![f64::INFINITY; 2 * m * m];
    let mut hi = vec![f64::NEG_INFINITY; 2 * m * m];
    for (&n, entry) in field.interior().iter().zip(per_node) {
        let (f, det, w) = entry.ok_or(Error::ClassExit {
            time: field.times[slice],
            node: n,
        })?;
        if !det.is_finite() {
            return Err(Error::IllConditioned {
                ratio: det,
                guard: f64::MAX,
            });
        }
        det_deviation = det_deviation.max((det - 1.0).abs());
        f_residual = f_residual.max(f.abs());
        identity_defect = identity_defect.max((det - f.exp()).abs());
        for i in 0..m {
            for j in 0..m {
                for (s, v) in [(0, w[(i, j)].re), (1, w[(i, j)].im)] {
                    let idx = 2 * (i * m + j) + s;
                    lo[idx] = lo[idx].min(v);
                    hi[idx] = hi[idx].max(v);
                }
            }
        }
    }
    let w_variation = hi.iter().zip(&lo).map(|(h, l)| h - l).fold(0.0, f64::max);
    Ok(RigidityReport {
        det_deviation,
        w_variation,
        f_residual,
        identity_defect,
    })
}

/// `(mean over Θ(R) of q^p)^{1/p} / inf over Q(R) of q` for quantity `q`.
/// Diagnostic only; `None` when either cylinder is empty or `q` is not
/// positive on `Q(R)`.
pub fn weak_harnack_ratio(set: &SampleSet, quantity: usize, cyl: &CylinderSpec, p: f64) -> Option<f64> {
    let flavor = set.flavor.unwrap_or(Flavor::Real);
    let theta = cyl.shifted();
    let (mut sum, mut count) = (0.0, 0usize);
    let mut inf = f64::INFINITY;
    for i in 0..set.len() {
        let v = set.values[i][quantity];
        if theta.contains(&set.points[i], set.times[i], cyl.radius, flavor) {
            sum += v.abs().powf(p);
            count += 1;
        }
        if cyl.contains(&set.points[i], set.times[i], cyl.radius, flavor) {
            inf = inf.min(v);
        }
    }
    (count > 0 && inf > 0.0 && inf.is_finite()).then(|| (sum / count as f64).powf(1.0 / p) / inf)
}

/// Real point embedded for complex flavors, otherwise unchanged.
pub fn embed_point(x: &[f64], flavor: Flavor) -> Vec<f64> {
    match flavor {
        Flavor::Real => x.to_vec(),
        Flavor::Complex => complexify_point(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{AtomFn, Expr};

    fn samples(f: impl Fn(&[f64], f64) -> f64) -> SampleSet {
        let mut set = SampleSet {
            flavor: Some(Flavor::Real),
            names: vec!["q".into()],
            ..Default::default()
        };
        for ti in 0..=8 {
            let t = -2.0 + 0.25 * ti as f64;
            for i in 0..=16 {
                for j in 0..=16 {
                    let x = vec![-2.0 + 0.25 * i as f64, -2.0 + 0.25 * j as f64];
                    set.values.push(vec![f(&x, t)]);
                    set.points.push(x);
                    set.times.push(t);
                }
            }
        }
        set
    }

    #[test]
    fn oscillation_examples() {
        let cyl = CylinderSpec::dyadic(vec![0.0, 0.0], 0.0, 1.0, 3);
        assert_eq!(cylinder_oscillation(&samples(|_, _| 3.0), &cyl, 1.0).unwrap(), vec![0.0]);
        assert_eq!(cylinder_oscillation(&samples(|x, _| x[0]), &cyl, 1.0).unwrap(), vec![2.0]);
        assert_eq!(cylinder_oscillation(&samples(|_, t| t), &cyl, 1.0).unwrap(), vec![1.0]);
        let far = CylinderSpec::dyadic(vec![10.0, 0.0], 0.0, 0.1, 1);
        assert_eq!(cylinder_oscillation(&samples(|_, t| t), &far, 0.1), Err(Error::EmptyCylinder));
    }

    #[test]
    fn ladder_validation_and_shift() {
        let mut cyl = CylinderSpec::dyadic(vec![0.0], 1.0, 1.0, 4);
        assert_eq!(cyl.ladder, vec![1.0, 0.5, 0.25, 0.125]);
        assert!(cyl.validate().is_ok());
        assert_eq!(cyl.shifted().time, -3.0);
        cyl.ladder = vec![0.5, 0.5];
        assert!(cyl.validate().is_err());
    }

    #[test]
    fn fits_power_laws() {
        let exact: Vec<(f64, f64)> = [1.0, 0.5, 0.25, 0.125].iter().map(|&r: &f64| (r, r.sqrt())).collect();
        let fit = holder_exponent_fit(&exact).unwrap();
        assert!((fit.alpha - 0.5).abs() < 1e-14 && fit.residual < 1e-14);
        let flat: Vec<(f64, f64)> = [1.0, 0.5, 0.25].iter().map(|&r| (r, 2.0)).collect();
        assert!(holder_exponent_fit(&flat).unwrap().alpha.abs() < 1e-14);
        assert!(matches!(
            holder_exponent_fit(&[(1.0, 1.0), (0.5, 0.0), (0.25, 0.0)]),
            Err(Error::DegenerateLadder(_))
        ));
        assert!(holder_exponent_fit(&[(1.0, 1.0), (0.5, 0.5)]).is_err());
    }

    fn cubic_complex() -> ExpressionSpec {
        let cube = Expr::product(vec![
            Expr::pow(vec![1.0, 0.0, 0.0, 0.0], 0.0, 1.0),
            Expr::quad(
                vec![vec![2.0, 0.0, 0.0, 0.0], vec![0.0, 2.0, 0.0, 0.0], vec![0.0; 4], vec![0.0; 4]],
                vec![0.0; 4],
                0.0,
            ),
        ]);
        ExpressionSpec::new(
            1,
            1,
            Flavor::Complex,
            false,
            Expr::sum(vec![Expr::diag_quad(&[2.0, 2.0, -2.0, -2.0]), Expr::scale(0.3, cube)]),
        )
        .unwrap()
    }

    #[test]
    fn rescaling_examples() {
        let q = ExpressionSpec::new(1, 1, Flavor::Real, false, Expr::diag_quad(&[1.0, -1.0])).unwrap();
        let v = parabolic_rescale(&q, 3.0).unwrap();
        for x in [[0.3, -0.2], [1.0, 2.0]] {
            let d: f64 = v.value(&x, 0.0).unwrap() - q.value(&x, 0.0).unwrap();
            assert!(d.abs() < 1e-14);
        }
        let id = parabolic_rescale(&cubic_complex(), 1.0).unwrap();
        let p = [0.1, 0.2, 0.3, 0.4];
        let d: f64 = id.value(&p, 0.0).unwrap() - cubic_complex().value(&p, 0.0).unwrap();
        assert!(d.abs() < 1e-15);
        let r = rescale_report(&cubic_complex(), 2.0, &[0.05, 0.0, 0.1, 0.0], 0.0).unwrap();
        assert!((r.ratio - 2.0).abs() < 1e-12, "{r:?}");
        assert!((r.h_before - r.h_after).abs() < 1e-12);
        assert!(parabolic_rescale(&q, 0.0).is_err());
    }

    #[test]
    fn rescaled_solution_stays_a_solution() {
        let a = 1.7f64;
        let exact = ExpressionSpec::new(1, 1, Flavor::Real, false, Expr::sum(vec![
            Expr::diag_quad(&[a, -1.0]),
            Expr::scale(0.0, Expr::atom(AtomFn::Sin, vec![1.0, 0.0], 0.0)),
        ]))
        .unwrap()
        .with_time_drift(a.ln());
        let r = rescale_report(&exact, 0.5, &[0.2, -0.1], 0.3).unwrap();
        assert!(r.h_before.abs() < 1e-14 && r.h_after.abs() < 1e-14);
    }
}
