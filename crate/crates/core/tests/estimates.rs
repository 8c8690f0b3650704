use std::f64::consts::TAU;

use tma_core::estimates::*;
use tma_core::jets::{AtomFn, Expr, ExpressionSpec, Flavor};
use tma_core::solver::*;

fn real_spec(e: Expr) -> ExpressionSpec {
    ExpressionSpec::new(1, 1, Flavor::Real, false, e).unwrap()
}

/// Hessian `[[2, 1/2], [1/2, −2]]`: balanced blocks, so `F = 0` and `det W = 1`.
fn balanced() -> ExpressionSpec {
    real_spec(Expr::quad(vec![vec![2.0, 0.5], vec![0.5, -2.0]], vec![0.1, -0.2], 0.3))
}

#[test]
fn rigidity_of_exact_quadratic() {
    let f = FlowField::framed(Grid::cube(2, -1.0, 1.0, 17, false), balanced(), 1e-4, (0.25, 4.0)).unwrap();
    let r = rigidity_probe(&f, 0).unwrap();
    assert!(r.det_deviation <= 1e-11, "{r:?}");
    assert!(r.w_variation <= 1e-11, "{r:?}");
}

#[test]
fn rigidity_of_solved_quadratic_boundary() {
    let u = balanced();
    let bump = Expr::scale(
        0.02,
        Expr::product(vec![
            Expr::atom(AtomFn::Sin, vec![std::f64::consts::PI / 1.8, 0.0], std::f64::consts::FRAC_PI_2),
            Expr::atom(AtomFn::Sin, vec![0.0, std::f64::consts::PI / 1.8], std::f64::consts::FRAC_PI_2),
        ]),
    );
    let guess = real_spec(Expr::sum(vec![u.expr.clone(), bump]));
    let sol = solve_elliptic(Grid::cube(2, -1.0, 1.0, 21, false), &u, Some(&guess), EllipticOptions::default()).unwrap();
    let r = rigidity_probe(&sol.field, sol.field.slices.len() - 1).unwrap();
    assert!(r.det_deviation <= 1e-9, "{r:?}");
    assert!(r.w_variation <= 1e-8, "{r:?}");
}

#[test]
fn rigidity_flags_non_solutions() {
    let wavy = real_spec(Expr::sum(vec![
        Expr::diag_quad(&[1.0, -1.0]),
        Expr::scale(0.05, Expr::atom(AtomFn::Sin, vec![1.0, 2.0], 0.4)),
    ]));
    let f = FlowField::framed(Grid::cube(2, -1.0, 1.0, 17, false), wavy.clone(), 1e-4, (0.25, 4.0)).unwrap();
    let r = rigidity_probe(&f, 0).unwrap();
    assert!(r.det_deviation > 1e-3 && r.w_variation > 1e-3, "{r:?}");

    let sol = solve_elliptic(Grid::cube(2, -1.0, 1.0, 21, false), &wavy, None, EllipticOptions::default()).unwrap();
    let r = rigidity_probe(&sol.field, sol.field.slices.len() - 1).unwrap();
    assert!(r.det_deviation <= 1e-9, "{r:?}");
    assert!(r.w_variation > 1e-3, "{r:?}");
}

#[test]
fn field_samples_match_pointwise_operator() {
    let u = balanced();
    let f = FlowField::framed(Grid::cube(2, -1.0, 1.0, 9, false), u, 1e-4, (0.25, 4.0)).unwrap();
    let set = SampleSet::from_field(&f).unwrap();
    assert_eq!(set.len(), f.interior().len());
    let lq = set.ladder_quantities();
    assert_eq!(lq.family.len(), 4);
    let wvv = |name: &str| set.names.iter().position(|n| n == name).unwrap();
    for row in &set.values {
        assert!(row[lq.ut].abs() < 1e-12);
        assert!((row[wvv("Wvv[e0]")] - 2.125).abs() < 1e-12);
        assert!((row[wvv("Wvv[e1]")] - 0.5).abs() < 1e-12);
        assert!((row[wvv("Wvv[e0+e1]")] - (2.125 + 0.5 - 0.5) / 2.0).abs() < 1e-12);
    }
    let cyl = CylinderSpec::dyadic(vec![0.0, 0.0], 0.0, 0.5, 3);
    assert!(oscillation_ladder(&set, &cyl).unwrap().iter().all(|r| r.p.abs() < 1e-11));
}

#[test]
fn complex_samples_use_wirtinger_blocks() {
    let u = ExpressionSpec::new(1, 1, Flavor::Complex, false, Expr::diag_quad(&[4.0, 4.0, -2.0, -2.0])).unwrap();
    let f = FlowField::framed(Grid::cube(4, -1.0, 1.0, 5, false), u, 1e-4, (0.25, 4.0)).unwrap();
    let set = SampleSet::from_field(&f).unwrap();
    assert_eq!(set.ladder_quantities().family.len(), 2 + 4);
    let i = set.names.iter().position(|n| n == "Wvv[e0]").unwrap();
    let j = set.names.iter().position(|n| n == "Wvv[e1]").unwrap();
    for row in &set.values {
        assert!((row[0] - 2.0f64.ln()).abs() < 1e-12);
        assert!((row[i] - 2.0).abs() < 1e-12 && (row[j] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn perturbed_flow_oscillation_decays() {
    let n = 48;
    let g = Grid::cube(2, 0.0, TAU, n, true);
    let h = g.h_min();
    let dt = 0.99 * 0.2 * h * h * 0.25;
    let pert = real_spec(Expr::sum(
        [([1.0, 1.0], 0.3), ([1.0, 0.0], 1.1), ([0.0, 1.0], 0.4)]
            .iter()
            .map(|(m, ph)| Expr::scale(0.02, Expr::atom(AtomFn::Sin, m.to_vec(), *ph)))
            .collect(),
    ));
    let mut f = FlowField::periodic(g.clone(), 1, 1, Flavor::Real, vec![vec![1.0, 0.0], vec![0.0, -1.0]], &pert, dt, (0.5, 2.0)).unwrap();
    let r = 8.0 * h;
    f.run((2.0 * r * r / dt).ceil() as usize, Scheme::Rk4, 2).unwrap();
    let cyl = CylinderSpec::dyadic(g.coords(g.len() / 2 + n / 2), f.time(), r, 4);
    let set = SampleSet::from_field_within(&f, &cyl).unwrap();
    let ladder = oscillation_ladder(&set, &cyl).unwrap();
    assert!(ladder.windows(2).all(|w| w[1].p <= w[0].p));
    let fit = holder_exponent_fit(&ladder.iter().map(|r| (r.rho, r.p)).collect::<Vec<_>>()).unwrap();
    assert!(fit.alpha > 0.0, "{fit:?}");

    let inner = CylinderSpec { radius: r / 2.0, ladder: vec![r / 2.0], ..cyl.clone() };
    let outer = cylinder_oscillation(&set, &cyl, r).unwrap();
    for (a, b) in cylinder_oscillation(&set, &inner, r / 2.0).unwrap().iter().zip(&outer) {
        assert!(a <= b);
    }
}

#[test]
fn rescaled_field_keeps_operator_values() {
    let pert = real_spec(Expr::scale(0.02, Expr::atom(AtomFn::Sin, vec![1.0, 1.0], 0.3)));
    let g = Grid::cube(2, 0.0, TAU, 16, true);
    let f = FlowField::periodic(g, 1, 1, Flavor::Real, vec![vec![1.0, 0.0], vec![0.0, -1.0]], &pert, 0.005, (0.5, 2.0)).unwrap();
    let r = rescale_field(&f, 2.0).unwrap();
    assert!((r.grid.hi[0] - TAU / 2.0).abs() < 1e-15);
    let a = f.eval_f(f.current(), 0.0).unwrap();
    let b = r.eval_f(r.current(), 0.0).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
    assert!(rescale_field(&f, -1.0).is_err());
}
