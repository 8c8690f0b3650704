use std::f64::consts::{E, TAU};

use tma_core::jets::{AtomFn, Expr, ExpressionSpec, Flavor};
use tma_core::solver::*;
use tma_core::Error;

fn real_spec(expr: Expr) -> ExpressionSpec {
    ExpressionSpec::new(1, 1, Flavor::Real, false, expr).unwrap()
}

fn modes(eps: f64, list: &[([f64; 2], f64)]) -> ExpressionSpec {
    real_spec(Expr::sum(
        list.iter()
            .map(|(m, ph)| Expr::scale(eps, Expr::atom(AtomFn::Sin, m.to_vec(), *ph)))
            .collect(),
    ))
}

/// `ε sin(π(x+e)/2e) sin(π(y+e)/2e)`, zero on the lines `|x| = e`, `|y| = e`.
fn bump(eps: f64, e: f64) -> Expr {
    let w = std::f64::consts::PI / (2.0 * e);
    let half = std::f64::consts::FRAC_PI_2;
    Expr::scale(
        eps,
        Expr::product(vec![
            Expr::atom(AtomFn::Sin, vec![w, 0.0], half),
            Expr::atom(AtomFn::Sin, vec![0.0, w], half),
        ]),
    )
}

fn periodic(n: usize, dt: f64, pert: &ExpressionSpec) -> FlowField {
    let g = Grid::cube(2, 0.0, TAU, n, true);
    FlowField::periodic(g, 1, 1, Flavor::Real, vec![vec![1.0, 0.0], vec![0.0, -1.0]], pert, dt, (0.5, 2.0)).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn balanced_quadratic_is_stationary() {
    let u0 = real_spec(Expr::diag_quad(&[1.0, -1.0]));
    let mut f = FlowField::framed(Grid::cube(2, -1.0, 1.0, 33, false), u0, 1e-4, (0.5, 2.0)).unwrap();
    let start = f.current().to_vec();
    for _ in 0..5 {
        step_parabolic(&mut f, Scheme::Rk4).unwrap();
        assert!(sup_diff(&start, f.current()) < 1e-12);
    }
    let series = monitor_class(&f, 1.0 - 1e-9, 1.0 + 1e-9);
    assert_eq!(series.first_violation, None);
    for s in &series.slices {
        for v in [s.convex_min, s.convex_max, s.concave_min, s.concave_max] {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn linear_drift_is_reproduced_each_step() {
    let exact = real_spec(Expr::diag_quad(&[E, -1.0])).with_time_drift(1.0);
    let g = Grid::cube(2, -1.0, 1.0, 65, false);
    let mut f = FlowField::framed(g.clone(), exact.clone(), 2e-5, (0.5, 4.0)).unwrap();
    for scheme in [Scheme::Rk4, Scheme::SemiImplicit] {
        for _ in 0..3 {
            step_parabolic(&mut f, scheme).unwrap();
            let t = f.time();
            for &n in f.interior() {
                assert!((f.current()[n] - exact.value(&g.coords(n), t).unwrap()).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn step_limit_is_enforced() {
    let u0 = real_spec(Expr::diag_quad(&[1.0, -1.0]));
    let mut f = FlowField::framed(Grid::cube(2, -1.0, 1.0, 17, false), u0, 1.0, (0.5, 2.0)).unwrap();
    assert!(matches!(step_parabolic(&mut f, Scheme::Rk4), Err(Error::CflViolation { .. })));
    assert!(step_parabolic(&mut f, Scheme::SemiImplicit).is_ok());
}

#[test]
fn rk4_self_convergence_is_fourth_order() {
    let pert = modes(0.02, &[([3.0, 1.0], 0.3), ([-2.0, 3.0], 1.1), ([1.0, -4.0], 2.0)]);
    let n = 8;
    let h = TAU / n as f64;
    let total = 40.0 * CFL_CONSTANT * h * h * 0.25;
    let runs: Vec<Vec<f64>> = [40usize, 80, 160]
        .iter()
        .map(|&s| {
            let mut f = periodic(n, total / s as f64, &pert);
            f.run(s, Scheme::Rk4, s).unwrap();
            f.current().to_vec()
        })
        .collect();
    let order = (sup_diff(&runs[0], &runs[1]) / sup_diff(&runs[1], &runs[2])).log2();
    assert!(order >= 3.5, "order {order}");
}

#[test]
fn centered_differences_are_second_order_in_space() {
    let pert = modes(0.05, &[([1.0, 1.0], 0.3), ([-1.0, 2.0], 1.1)]);
    let dt = CFL_CONSTANT * (TAU / 64.0f64).powi(2) * 0.25;
    let steps = 50;
    let fields: Vec<FlowField> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let mut f = periodic(n, dt, &pert);
            f.run(steps, Scheme::Rk4, steps).unwrap();
            f
        })
        .collect();
    let at = |f: &FlowField, i: usize, j: usize, r: usize| f.current()[f.grid.node(&[i * r, j * r])];
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for i in 0..16 {
        for j in 0..16 {
            e1 = e1.max((at(&fields[0], i, j, 1) - at(&fields[1], i, j, 2)).abs());
            e2 = e2.max((at(&fields[1], i, j, 2) - at(&fields[2], i, j, 4)).abs());
        }
    }
    let order = (e1 / e2).log2();
    assert!((1.8..=2.2).contains(&order), "order {order}");
}

#[test]
fn discrete_hessian_converges_to_jet_hessian() {
    let spec = real_spec(Expr::sum(vec![
        Expr::diag_quad(&[1.0, -1.0]),
        Expr::scale(0.1, Expr::atom(AtomFn::Sin, vec![1.3, 0.7], 0.2)),
    ]));
    let x = [0.25, -0.25];
    let jet = spec.raw_jet(&x, 0.0, 2).unwrap();
    let err = |n: usize| {
        let g = Grid::cube(2, -1.0, 1.0, n, false);
        let f = FlowField::framed(g.clone(), spec.clone(), 1e-9, (0.5, 2.0)).unwrap();
        let node = g.nearest(&x);
        assert_eq!(g.coords(node), x.to_vec());
        let h = f.hessian(f.current(), node);
        let mut e = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                e = e.max((h[a][b] - jet.partial(&[a, b])).abs());
            }
        }
        e
    };
    let (e1, e2, e3) = (err(9), err(17), err(33));
    for r in [e1 / e2, e2 / e3] {
        assert!((3.6..=4.4).contains(&r), "ratio {r}");
    }
}

#[test]
fn periodic_flow_stays_in_class_and_large_perturbation_is_flagged() {
    let pert = modes(0.05, &[([1.0, 1.0], 0.3), ([-1.0, 2.0], 1.1)]);
    let mut f = periodic(16, 0.005, &pert);
    f.run(20, Scheme::Rk4, 5).unwrap();
    let s = monitor_class(&f, 0.5, 2.0);
    assert_eq!(s.first_violation, None);
    assert!(s.slices.iter().all(|b| b.within(0.75, 1.25)));

    let big = modes(0.6, &[([1.0, 1.0], 0.3), ([-1.0, 2.0], 1.1)]);
    let f = periodic(16, 0.005, &big);
    assert_eq!(monitor_class(&f, 0.5, 2.0).first_violation, Some(0));
}

#[test]
fn semi_implicit_tracks_rk4_on_periodic_flow() {
    let pert = modes(0.05, &[([1.0, 1.0], 0.3), ([-1.0, 2.0], 1.1)]);
    let dt = 0.005;
    let mut a = periodic(16, dt, &pert);
    a.run(20, Scheme::Rk4, 20).unwrap();
    let mut b = periodic(16, dt, &pert);
    b.run(20, Scheme::SemiImplicit, 20).unwrap();
    let d = sup_diff(a.current(), b.current());
    assert!(d < 1e-3 && d > 0.0, "{d}");
}

#[test]
fn frozen_frame_ut_maximum_does_not_grow() {
    let spec = real_spec(Expr::sum(vec![Expr::diag_quad(&[1.0, -1.0]), bump(-0.05, 0.9)]));
    let boundary = real_spec(Expr::diag_quad(&[1.0, -1.0]));
    let g = Grid::cube(2, -1.0, 1.0, 21, false);
    let mut f = FlowField::framed_with_initial(g, boundary, &spec, 4e-4, (0.5, 2.0)).unwrap();
    f.run(100, Scheme::Rk4, 10).unwrap();
    let maxima: Vec<f64> = f
        .slices
        .iter()
        .zip(&f.times)
        .map(|(u, &t)| {
            let ut = f.eval_f(u, t).unwrap();
            f.interior().iter().map(|&n| ut[n]).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    assert!(maxima[0] > 0.0);
    for w in maxima.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{maxima:?}");
    }
}

#[test]
fn elliptic_recovers_quadratics() {
    for u in [
        real_spec(Expr::diag_quad(&[2.0, -2.0])),
        real_spec(Expr::quad(vec![vec![1.0, 0.5], vec![0.5, -1.0]], vec![0.0, 0.0], 0.0)),
    ] {
        let guess = real_spec(Expr::sum(vec![u.expr.clone(), bump(0.02, 0.9)]));
        let g = Grid::cube(2, -1.0, 1.0, 21, false);
        let sol = solve_elliptic(g.clone(), &u, Some(&guess), EllipticOptions::default()).unwrap();
        assert!(sol.residual <= 1e-10);
        for n in 0..g.len() {
            assert!((sol.field.current()[n] - u.value(&g.coords(n), 0.0).unwrap()).abs() < 1e-11);
        }
    }
}

#[test]
fn elliptic_converges_for_non_solution_boundary() {
    let boundary = real_spec(Expr::sum(vec![
        Expr::diag_quad(&[1.0, -1.0]),
        Expr::scale(0.05, Expr::atom(AtomFn::Sin, vec![1.0, 2.0], 0.4)),
    ]));
    let g = Grid::cube(2, -1.0, 1.0, 25, false);
    let sol = solve_elliptic(g, &boundary, None, EllipticOptions::default()).unwrap();
    assert!(sol.residual <= 1e-10);
    assert!(sol.iterations >= 2);
    assert_eq!(monitor_class(&sol.field, 0.5, 2.0).first_violation, None);
}

#[test]
fn snapshots_round_trip() {
    let pert = modes(0.05, &[([1.0, 1.0], 0.3)]);
    let f = periodic(8, 0.01, &pert);
    let dir = tempfile::tempdir().unwrap();
    let meta = write_binary(&f, 0, dir.path(), "snap").unwrap();
    let (m, v) = read_binary(&meta).unwrap();
    assert_eq!(v, f.slices[0]);
    assert_eq!(m.grid, f.grid);
    let csv = dir.path().join("snap.csv");
    write_csv(&f, 0, &csv).unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 64);
    assert!(text.starts_with("x0,x1,u\n"));
}
