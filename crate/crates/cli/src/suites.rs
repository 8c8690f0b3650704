//! One runner per suite. Each produces CSV rows and named assertions;
//! numerical failures land in a row's `status` column instead of aborting.

use std::f64::consts::TAU;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use tma_core::estimates::{
    holder_exponent_fit, oscillation_ladder, rigidity_probe, CylinderSpec, SampleSet,
};
use tma_core::evolution::{assemble_q, evolution_residual, heat_residual, real_reduction, wirtinger_table};
use tma_core::funclass::EnsembleSpec;
use tma_core::jets::{evaluate_jet, AtomFn, Expr, ExpressionSpec, Flavor};
use tma_core::legendre::{det_transform_residual, real_w};
use tma_core::solver::{
    monitor_class, solve_elliptic, step_parabolic, EllipticOptions, FlowField, Grid, Scheme,
};
use tma_core::twisted::complex_w;
use tma_core::Error;

use crate::config::{ExperimentConfig, Suite};

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `"<="` or `">="` or `">"` or `"<"`.
    pub relation: &'static str,
    pub pass: bool,
}

impl Assertion {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self::new(name, value, bound, "<=", value <= bound)
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self::new(name, value, bound, ">=", value >= bound)
    }

    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Self::new(name, value, bound, ">", value > bound)
    }

    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Self::new(name, value, bound, "<", value < bound)
    }

    fn new(name: &str, value: f64, bound: f64, relation: &'static str, pass: bool) -> Self {
        Assertion {
            name: name.to_string(),
            value,
            bound,
            relation,
            pass: pass && !value.is_nan(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub assertions: Vec<Assertion>,
}

impl SuiteOutput {
    fn new(header: &[&str]) -> Self {
        SuiteOutput {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.last().map(String::as_str) != Some("ok")).count()
    }

    fn assert_rows_ok(&mut self) {
        let failed = self.failed_rows() as f64;
        self.assertions.push(Assertion::at_most("failed_rows", failed, 0.0));
    }
}

fn status<T>(r: &Result<T, Error>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.to_string(),
    }
}

fn fold_max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn run_suite(cfg: &ExperimentConfig) -> SuiteOutput {
    match cfg.suite {
        Suite::DetLaw => det_law(cfg),
        Suite::WPsd => w_psd(cfg),
        Suite::QSign => q_sign(cfg),
        Suite::EvolutionIdentity => identity(cfg, "residual", |s, p| evolution_residual(s, p)),
        Suite::HeatIdentity => identity(cfg, "residual", |s, p| heat_residual(s, p)),
        Suite::RealComplexify => real_complexify(cfg),
        Suite::FlowConvergence => flow_convergence(cfg),
        Suite::OscillationDecay => oscillation_decay(cfg),
        Suite::Rigidity => rigidity(cfg),
    }
}

/// One ensemble draw with its evaluation points.
struct Draw {
    k: usize,
    l: usize,
    index: u64,
    spec: Result<ExpressionSpec, Error>,
    points: Vec<Vec<f64>>,
}

/// Every `(shape, draw)` pair of the sweep, evaluated in parallel and
/// returned in sweep order.
fn sweep<R: Send>(cfg: &ExperimentConfig, f: impl Fn(&Draw) -> R + Sync) -> Vec<(Draw, R)> {
    let base = cfg.seeded_ensemble();
    let tasks: Vec<(usize, usize, u64)> = cfg
        .sweep_shapes()
        .into_iter()
        .flat_map(|(k, l)| (0..base.draws as u64).map(move |i| (k, l, i)))
        .collect();
    tasks
        .into_par_iter()
        .map(|(k, l, index)| {
            let es = EnsembleSpec { k, l, ..base.clone() };
            let draw = Draw {
                k,
                l,
                index,
                spec: es.member(index),
                points: es.points(index, cfg.points_per_draw),
            };
            let r = f(&draw);
            (draw, r)
        })
        .collect()
}

fn det_law(cfg: &ExperimentConfig) -> SuiteOutput {
    let mut out = SuiteOutput::new(&["k", "l", "draw", "point", "residual", "status"]);
    let results = sweep(cfg, |d| {
        d.points
            .iter()
            .map(|p| d.spec.clone().and_then(|s| det_transform_residual(&s, p)))
            .collect::<Vec<_>>()
    });
    let mut worst = 0.0f64;
    for (d, rs) in results {
        for (j, r) in rs.iter().enumerate() {
            let v = r.as_ref().copied().unwrap_or(f64::NAN);
            worst = worst.max(v);
            out.rows.push(vec![d.k.to_string(), d.l.to_string(), d.index.to_string(), j.to_string(), num(v), status(r)]);
        }
    }
    out.assertions.push(Assertion::at_most("max_residual", worst, cfg.tolerance("residual")));
    out.assert_rows_ok();
    out
}

fn w_psd(cfg: &ExperimentConfig) -> SuiteOutput {
    let mut out = SuiteOutput::new(&["k", "l", "flavor", "draw", "point", "lambda_min", "status"]);
    let flavor = cfg.seeded_ensemble().flavor;
    let results = sweep(cfg, |d| {
        d.points
            .iter()
            .map(|p| {
                let s = d.spec.clone()?;
                match flavor {
                    Flavor::Real => Ok(real_w(&evaluate_jet(&s, p, 0.0)?)?.min_max_eigenvalues().0),
                    Flavor::Complex => Ok(complex_w(&wirtinger_table(&s, p)?)?.min_max_eigenvalues().0),
                }
            })
            .collect::<Vec<Result<f64, Error>>>()
    });
    let mut lowest = f64::INFINITY;
    for (d, rs) in results {
        for (j, r) in rs.iter().enumerate() {
            let v = r.as_ref().copied().unwrap_or(f64::NAN);
            lowest = lowest.min(v);
            out.rows.push(vec![
                d.k.to_string(),
                d.l.to_string(),
                format!("{flavor:?}").to_lowercase(),
                d.index.to_string(),
                j.to_string(),
                num(v),
                status(r),
            ]);
        }
    }
    out.assertions.push(Assertion::at_least("min_lambda_min", lowest, -cfg.tolerance("lambda_min")));
    out.assert_rows_ok();
    out
}

fn q_sign(cfg: &ExperimentConfig) -> SuiteOutput {
    let mut out = SuiteOutput::new(&[
        "k", "l", "draw", "lambda_max", "group1", "group2", "group3", "group4", "hermitian_defect", "status",
    ]);
    let results = sweep(cfg, |d| -> Result<[f64; 6], Error> {
        let s = d.spec.clone()?;
        let mut acc = [f64::NEG_INFINITY; 6];
        for p in &d.points {
            let q = assemble_q(&wirtinger_table(&s, p)?)?;
            let g = q.group_lambda_max();
            let vals = [q.lambda_max(), g[0], g[1], g[2], g[3], q.hermitian_defect];
            for (a, v) in acc.iter_mut().zip(vals) {
                *a = a.max(v);
            }
        }
        Ok(acc)
    });
    let mut worst = [f64::NEG_INFINITY; 6];
    for (d, r) in &results {
        let vals = r.as_ref().copied().unwrap_or([f64::NAN; 6]);
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
        let mut row = vec![d.k.to_string(), d.l.to_string(), d.index.to_string()];
        row.extend(vals.iter().map(|&v| num(v)));
        row.push(status(r));
        out.rows.push(row);
    }
    out.assertions.push(Assertion::at_most("max_lambda_max", worst[0], cfg.tolerance("lambda_max")));
    let tol = cfg.tolerance("group_lambda_max");
    for g in 0..4 {
        out.assertions.push(Assertion::at_most(&format!("max_group{}_lambda_max", g + 1), worst[1 + g], tol));
    }
    out.assertions.push(Assertion::at_most("max_hermitian_defect", worst[5], cfg.tolerance("hermitian_defect")));
    out.assert_rows_ok();
    out
}

fn identity(
    cfg: &ExperimentConfig,
    tol_name: &str,
    f: impl Fn(&ExpressionSpec, &[f64]) -> Result<f64, Error> + Sync,
) -> SuiteOutput {
    let mut out = SuiteOutput::new(&["k", "l", "draw", "residual", "status"]);
    let results = sweep(cfg, |d| -> Result<f64, Error> {
        let s = d.spec.clone()?;
        let mut worst = 0.0f64;
        for p in &d.points {
            worst = worst.max(f(&s, p)?);
        }
        Ok(worst)
    });
    let mut worst = 0.0f64;
    for (d, r) in &results {
        let v = r.as_ref().copied().unwrap_or(f64::NAN);
        worst = worst.max(v);
        out.rows.push(vec![d.k.to_string(), d.l.to_string(), d.index.to_string(), num(v), status(r)]);
    }
    out.assertions.push(Assertion::at_most("max_residual", worst, cfg.tolerance(tol_name)));
    out.assert_rows_ok();
    out
}

fn real_complexify(cfg: &ExperimentConfig) -> SuiteOutput {
    let mut out = SuiteOutput::new(&[
        "k", "l", "draw", "w_residual", "q_residual", "f_residual", "lambda_max_complex", "status",
    ]);
    let results = sweep(cfg, |d| -> Result<[f64; 4], Error> {
        let s = d.spec.clone()?;
        let mut acc = [f64::NEG_INFINITY; 4];
        for p in &d.points {
            let r = real_reduction(&s, p)?;
            for (a, v) in acc.iter_mut().zip([r.w_residual, r.q_residual, r.f_residual, r.lambda_max_complex]) {
                *a = a.max(v);
            }
        }
        Ok(acc)
    });
    let mut worst = [f64::NEG_INFINITY; 4];
    for (d, r) in &results {
        let vals = r.as_ref().copied().unwrap_or([f64::NAN; 4]);
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
        let mut row = vec![d.k.to_string(), d.l.to_string(), d.index.to_string()];
        row.extend(vals.iter().map(|&v| num(v)));
        row.push(status(r));
        out.rows.push(row);
    }
    let tol = cfg.tolerance("residual");
    out.assertions.push(Assertion::at_most("max_w_residual", worst[0], tol));
    out.assertions.push(Assertion::at_most("max_q_residual", worst[1], tol));
    out.assertions.push(Assertion::at_most("max_f_residual", worst[2], tol));
    out.assertions.push(Assertion::at_most("max_lambda_max_complex", worst[3], cfg.tolerance("lambda_max")));
    out.assert_rows_ok();
    out
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sine_modes(amplitude: f64, modes: &[([f64; 2], f64)]) -> Result<ExpressionSpec, Error> {
    ExpressionSpec::new(
        1,
        1,
        Flavor::Real,
        false,
        Expr::sum(
            modes
                .iter()
                .map(|(m, ph)| Expr::scale(amplitude, Expr::atom(AtomFn::Sin, m.to_vec(), *ph)))
                .collect(),
        ),
    )
}

fn saddle_flow(n: usize, dt: f64, pert: &ExpressionSpec, bounds: (f64, f64)) -> Result<FlowField, Error> {
    let g = Grid::cube(2, 0.0, TAU, n, true);
    FlowField::periodic(g, 1, 1, Flavor::Real, vec![vec![1.0, 0.0], vec![0.0, -1.0]], pert, dt, bounds)
}

/// Largest deviation from the exact drifting quadratic over `steps` steps.
fn exact_step_error(exact: &ExpressionSpec, grid: Grid, bounds: (f64, f64), steps: usize) -> Result<f64, Error> {
    let mut f = FlowField::framed(grid.clone(), exact.clone(), 1.0, bounds)?;
    f.dt = 0.9 * f.cfl_limit();
    let coords: Vec<Vec<f64>> = f.interior().iter().map(|&n| grid.coords(n)).collect();
    let mut worst = 0.0f64;
    for _ in 0..steps {
        step_parabolic(&mut f, Scheme::Rk4)?;
        let t = f.time();
        let errs: Vec<f64> = f
            .interior()
            .par_iter()
            .zip(&coords)
            .map(|(&n, x)| exact.value(x, t).map(|v| (f.current()[n] - v).abs()))
            .collect::<Result<_, _>>()?;
        worst = worst.max(fold_max(errs));
        f.slices.drain(..f.slices.len() - 1);
        f.times.drain(..f.times.len() - 1);
    }
    Ok(worst)
}

fn flow_convergence(cfg: &ExperimentConfig) -> SuiteOutput {
    let c = &cfg.convergence;
    let mut out = SuiteOutput::new(&["check", "value", "status"]);
    let start = Instant::now();
    let rate = (c.a / c.b).ln();
    let bounds = (c.a.min(c.b) / 2.0, 2.0 * c.a.max(c.b));
    let record = |out: &mut SuiteOutput, name: &str, r: Result<f64, Error>| -> f64 {
        let v = r.as_ref().copied().unwrap_or(f64::NAN);
        out.rows.push(vec![name.to_string(), num(v), status(&r)]);
        v
    };

    let real = ExpressionSpec::new(1, 1, Flavor::Real, false, Expr::diag_quad(&[c.a, -c.b]))
        .map(|s| s.with_time_drift(rate))
        .and_then(|s| exact_step_error(&s, Grid::cube(2, -1.0, 1.0, c.real_nodes, false), bounds, c.exact_steps));
    let e_real = record(&mut out, "exact_real_step_error", real);
    let complex = ExpressionSpec::new(1, 1, Flavor::Complex, false, Expr::diag_quad(&[2.0 * c.a, 2.0 * c.a, -2.0 * c.b, -2.0 * c.b]))
        .map(|s| s.with_time_drift(rate))
        .and_then(|s| exact_step_error(&s, Grid::cube(4, -1.0, 1.0, c.complex_nodes, false), bounds, c.exact_steps));
    let e_complex = record(&mut out, "exact_complex_step_error", complex);

    let time_order = (|| -> Result<f64, Error> {
        let pert = sine_modes(c.time_amplitude, &[([3.0, 1.0], 0.3), ([-2.0, 3.0], 1.1), ([1.0, -4.0], 2.0)])?;
        let h = TAU / c.time_nodes as f64;
        let total = c.time_steps[0] as f64 * tma_core::solver::CFL_CONSTANT * h * h * 0.25;
        let runs = c
            .time_steps
            .iter()
            .map(|&s| {
                let mut f = saddle_flow(c.time_nodes, total / s as f64, &pert, (0.5, 2.0))?;
                f.run(s, Scheme::Rk4, s)?;
                Ok(f.current().to_vec())
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Ok((sup_diff(&runs[0], &runs[1]) / sup_diff(&runs[1], &runs[2])).log2())
    })();
    let p_time = record(&mut out, "rk4_time_order", time_order);

    let space_order = (|| -> Result<f64, Error> {
        let pert = sine_modes(c.space_amplitude, &[([1.0, 1.0], 0.3), ([-1.0, 2.0], 1.1)])?;
        let finest = c.space_nodes[2];
        let dt = tma_core::solver::CFL_CONSTANT * (TAU / finest as f64).powi(2) * 0.25;
        let fields = c
            .space_nodes
            .iter()
            .map(|&n| {
                let mut f = saddle_flow(n, dt, &pert, (0.5, 2.0))?;
                f.run(c.space_steps, Scheme::Rk4, c.space_steps)?;
                Ok(f)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let coarse = c.space_nodes[0];
        let at = |f: &FlowField, i: usize, j: usize, r: usize| f.current()[f.grid.node(&[i * r, j * r])];
        let (mut e1, mut e2) = (0.0f64, 0.0f64);
        for i in 0..coarse {
            for j in 0..coarse {
                e1 = e1.max((at(&fields[0], i, j, 1) - at(&fields[1], i, j, 2)).abs());
                e2 = e2.max((at(&fields[1], i, j, 2) - at(&fields[2], i, j, 4)).abs());
            }
        }
        Ok((e1 / e2).log2())
    })();
    let p_space = record(&mut out, "space_order", space_order);

    let tol = cfg.tolerance("step_error");
    out.assertions.push(Assertion::at_most("exact_real_step_error", e_real, tol));
    out.assertions.push(Assertion::at_most("exact_complex_step_error", e_complex, tol));
    out.assertions.push(Assertion::at_least("rk4_time_order", p_time, cfg.tolerance("time_order_min")));
    out.assertions.push(Assertion::at_least("space_order_low", p_space, cfg.tolerance("space_order_min")));
    out.assertions.push(Assertion::at_most("space_order_high", p_space, cfg.tolerance("space_order_max")));
    out.assertions.push(Assertion::at_most(
        "runtime_seconds",
        start.elapsed().as_secs_f64(),
        cfg.tolerance("runtime_seconds"),
    ));
    out.assert_rows_ok();
    out
}

fn oscillation_decay(cfg: &ExperimentConfig) -> SuiteOutput {
    let o = &cfg.oscillation;
    let mut out = SuiteOutput::new(&["cylinder_id", "rho", "quantity", "osc", "alpha_fit", "fit_residual", "status"]);
    let failed = |out: &mut SuiteOutput, id: String, e: Error| {
        out.rows.push(vec![id, String::new(), String::new(), String::new(), String::new(), String::new(), e.to_string()]);
    };
    let flow = (|| -> Result<(FlowField, f64), Error> {
        let pert = sine_modes(o.amplitude, &o.modes)?;
        let mut f = saddle_flow(o.nodes, 1.0, &pert, o.class_bounds)?;
        f.dt = 0.99 * f.cfl_limit();
        let r = o.radius_cells * f.grid.h_min();
        let steps = ((1.0 + o.warmup) * r * r / f.dt).ceil() as usize;
        f.run(steps, Scheme::Rk4, o.record_every)?;
        Ok((f, r))
    })();
    let (field, radius) = match flow {
        Ok(v) => v,
        Err(e) => {
            failed(&mut out, "flow".into(), e);
            out.assert_rows_ok();
            return out;
        }
    };
    let class = monitor_class(&field, o.class_bounds.0, o.class_bounds.1);
    out.assertions.push(Assertion::at_most(
        "class_exit_slices",
        class.first_violation.map_or(0.0, |_| 1.0),
        0.0,
    ));
    let slack = cfg.tolerance("ladder_slack");
    let n = o.nodes;
    for (id, c) in o.centers.iter().enumerate() {
        let idx: Vec<usize> = c.iter().map(|f| ((f * n as f64).round() as usize) % n).collect();
        let center = field.grid.coords(field.grid.node(&idx));
        let cyl = CylinderSpec::dyadic(center, field.time(), radius, o.levels);
        let result = SampleSet::from_field_within(&field, &cyl).and_then(|set| {
            let ladder = oscillation_ladder(&set, &cyl)?;
            let fit = holder_exponent_fit(&ladder.iter().map(|r| (r.rho, r.p)).collect::<Vec<_>>())?;
            Ok((set.names, ladder, fit))
        });
        let (names, ladder, fit) = match result {
            Ok(v) => v,
            Err(e) => {
                failed(&mut out, id.to_string(), e);
                continue;
            }
        };
        for rung in &ladder {
            let mut push = |q: &str, v: f64| {
                out.rows.push(vec![
                    id.to_string(),
                    num(rung.rho),
                    q.to_string(),
                    num(v),
                    num(fit.alpha),
                    num(fit.residual),
                    "ok".into(),
                ]);
            };
            for (q, &v) in names.iter().zip(&rung.osc) {
                push(q, v);
            }
            push("P", rung.p);
        }
        let step = fold_max(ladder.windows(2).map(|w| w[1].p / w[0].p));
        let four = fold_max(ladder.windows(3).map(|w| w[2].p / w[0].p));
        out.assertions.push(Assertion::at_most(&format!("cylinder{id}_halving_ratio"), step, 1.0 + slack));
        if four.is_finite() {
            out.assertions.push(Assertion::at_most(&format!("cylinder{id}_quartering_ratio"), four, 1.0 + slack));
        }
        out.assertions.push(Assertion::above(&format!("cylinder{id}_alpha"), fit.alpha, 0.0));
        out.assertions.push(Assertion::below(&format!("cylinder{id}_fit_residual"), fit.residual, cfg.tolerance("fit_residual")));
    }
    out.assert_rows_ok();
    out
}

fn rigidity(cfg: &ExperimentConfig) -> SuiteOutput {
    let r = &cfg.rigidity;
    let mut out = SuiteOutput::new(&["case", "det_deviation", "w_variation", "f_residual", "identity_defect", "status"]);
    let grid = Grid::cube(2, -1.0, 1.0, r.nodes, false);
    // vanishes on the first frame layer, so the guess matches the frame
    let e = 1.0 - 2.0 / (r.nodes - 1) as f64;
    let w = std::f64::consts::PI / (2.0 * e);
    let bump = Expr::scale(
        r.guess_bump,
        Expr::product(vec![
            Expr::atom(AtomFn::Sin, vec![w, 0.0], std::f64::consts::FRAC_PI_2),
            Expr::atom(AtomFn::Sin, vec![0.0, w], std::f64::consts::FRAC_PI_2),
        ]),
    );
    let guess = ExpressionSpec::new(1, 1, Flavor::Real, false, Expr::sum(vec![r.boundary.expr.clone(), bump]));
    let solved = guess.clone().and_then(|g| {
        let sol = solve_elliptic(grid.clone(), &r.boundary, Some(&g), EllipticOptions::default())?;
        rigidity_probe(&sol.field, sol.field.slices.len() - 1)
    });
    let control = guess.and_then(|g| {
        let f = FlowField::framed_with_initial(grid.clone(), r.boundary.clone(), &g, 1.0, (1e-300, 1e300))?;
        rigidity_probe(&f, 0)
    });
    let mut push = |case: &str, res: &Result<tma_core::estimates::RigidityReport, Error>| {
        let mut row = vec![case.to_string()];
        match res {
            Ok(p) => row.extend([p.det_deviation, p.w_variation, p.f_residual, p.identity_defect].map(num)),
            Err(_) => row.extend(std::iter::repeat_n(num(f64::NAN), 4)),
        }
        row.push(status(res));
        out.rows.push(row);
    };
    push("solved", &solved);
    push("control", &control);
    let nan = f64::NAN;
    let (det, var) = solved.as_ref().map_or((nan, nan), |p| (p.det_deviation, p.w_variation));
    out.assertions.push(Assertion::at_most("solved_det_deviation", det, cfg.tolerance("det_deviation")));
    out.assertions.push(Assertion::at_most("solved_w_variation", var, cfg.tolerance("w_variation")));
    let ctl = control.as_ref().map_or(nan, |p| p.det_deviation);
    out.assertions.push(Assertion::at_least("control_det_deviation", ctl, cfg.tolerance("control_gap")));
    out.assert_rows_ok();
    out
}
