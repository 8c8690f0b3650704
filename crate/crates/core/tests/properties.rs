use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tma_core::estimates::*;
use tma_core::evolution::*;
use tma_core::funclass::*;
use tma_core::jets::*;
use tma_core::legendre::*;
use tma_core::linalg::*;
use tma_core::solver::*;
use tma_core::twisted::*;

fn ensemble(k: usize, l: usize, flavor: Flavor, seed: u64) -> EnsembleSpec {
    EnsembleSpec {
        k,
        l,
        flavor,
        epsilon: 0.2,
        seed,
        ..Default::default()
    }
}

fn draw(k: usize, l: usize, flavor: Flavor, seed: u64, index: u64) -> (ExpressionSpec, Vec<f64>) {
    let es = ensemble(k, l, flavor, seed);
    (es.member(index).unwrap(), es.points(index, 1).remove(0))
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((1, 1)), Just((2, 1)), Just((1, 2)), Just((2, 2))]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn jet_entries_match_central_differences(seed in 0u64..1000, index in 0u64..1000, (k, l) in shape()) {
        let (spec, p) = draw(k, l, Flavor::Real, seed, index);
        let jet = evaluate_jet(&spec, &p, 0.0).unwrap();
        let n = spec.dim();
        let h = 1e-4;
        let mut stack: Vec<Vec<usize>> = vec![vec![]];
        while let Some(vars) = stack.pop() {
            if vars.len() == 3 {
                continue;
            }
            let start = vars.last().copied().unwrap_or(0);
            for i in start..n {
                let shifted = |s: f64| {
                    let mut q = p.clone();
                    q[i] += s;
                    evaluate_jet(&spec, &q, 0.0).unwrap().partial(&vars)
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                let mut next = vars.clone();
                next.push(i);
                let exact = jet.partial(&next);
                prop_assert!(close(exact, fd, 1e-6), "{next:?}: {exact} vs {fd}");
                stack.push(next);
            }
        }
    }

    #[test]
    fn wirtinger_table_recovers_real_jet(seed in 0u64..1000, index in 0u64..1000, (k, l) in shape()) {
        let (spec, p) = draw(k, l, Flavor::Complex, seed, index);
        let jet = evaluate_jet(&spec, &p, 0.0).unwrap();
        let table = wirtinger_from_real(&jet).unwrap();
        let n = spec.dim();
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    for vars in [vec![a], vec![a, b], vec![a, b, c]] {
                        let mut exps = vec![0u8; n];
                        for &v in &vars {
                            exps[v] += 1;
                        }
                        let z = table.real_partial(&exps);
                        let r = jet.partial(&vars);
                        prop_assert!(close(z.re, r, 1e-12) && z.im.abs() <= 1e-12 * (1.0 + r.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn wirtinger_table_is_conjugation_symmetric(seed in 0u64..1000, index in 0u64..1000, (k, l) in shape()) {
        let (spec, p) = draw(k, l, Flavor::Complex, seed, index);
        let t = wirtinger_from_real(&evaluate_jet(&spec, &p, 0.0).unwrap()).unwrap();
        let m = k + l;
        for a in 0..m {
            for b in 0..m {
                prop_assert_eq!(t.get(&[a], &[b]), t.get(&[b], &[a]).conj());
                for c in 0..m {
                    prop_assert_eq!(t.get(&[a, c], &[b]), t.get(&[b], &[a, c]).conj());
                }
            }
        }
    }

    #[test]
    fn block_determinant_formula(seed in any::<u64>(), k in 1usize..4, l in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = k + l;
        let m = DMat::from_fn(n, n, |i, j| rng.random_range(-1.0..1.0) + if i == j { 3.0 } else { 0.0 });
        let (a, b, c, d) = (m.block(0, 0, k, k), m.block(0, k, k, l), m.block(k, 0, l, k), m.block(k, k, l, l));
        let schur = a.sub(&b.matmul(&d.inverse()).matmul(&c));
        let rows = |x: &DMat<f64>| (0..x.rows()).map(|i| (0..x.cols()).map(|j| x[(i, j)]).collect()).collect::<Vec<Vec<f64>>>();
        let full = det_lu(&rows(&m));
        let split = det_lu(&rows(&d)) * det_lu(&rows(&schur));
        prop_assert!((full - split).abs() <= 1e-10 * full.abs().max(1.0));
    }

    #[test]
    fn psd_certificates_bound_quadratic_forms(seed in any::<u64>(), n in 1usize..6, shift in -0.5f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let s = SymmetricMatrix::from_fn(n, |i, j| (0..n).map(|p| g[(i, p)] * g[(j, p)]).sum::<f64>() + if i == j { shift } else { 0.0 });
        let cert = s.psd_certificate();
        if cert.certified {
            for _ in 0..100 {
                let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                v.iter_mut().for_each(|x| *x /= norm);
                prop_assert!(s.quad_form(&v) >= -2.0 * cert.tol);
            }
        }
    }

    #[test]
    fn membership_is_monotone(seed in 0u64..1000, index in 0u64..100, shrink in 0.1f64..1.0, grow in 1.0f64..5.0) {
        let es = EnsembleSpec { cloud: CloudSpec { grid_per_axis: 5, quasi_random: 20, ..Default::default() }, ..ensemble(1, 1, Flavor::Real, seed) };
        let spec = es.member(index).unwrap();
        let cloud = es.cloud.points(es.dim());
        let (lo, hi) = (0.8, 1.2);
        if class_membership(&spec, &cloud, lo, hi).unwrap().member {
            prop_assert!(class_membership(&spec, &cloud, lo * shrink, hi * grow).unwrap().member);
        }
    }

    #[test]
    fn swapping_blocks_swaps_bounds(seed in 0u64..1000, index in 0u64..1000) {
        let (spec, p) = draw(1, 1, Flavor::Real, seed, index);
        let swapped = ExpressionSpec::new(1, 1, Flavor::Real, false, Expr::scale(-1.0, spec.expr.substitute(2, &[1, 0], &[1.0, 1.0]))).unwrap();
        let q = [p[1], p[0]];
        let a = block_bounds(&spec, &p).unwrap();
        let b = block_bounds(&swapped, &q).unwrap();
        prop_assert!(close(a.convex_min, b.concave_min, 1e-12) && close(a.concave_max, b.convex_max, 1e-12));
    }

    #[test]
    fn transformed_hessian_is_psd_and_symmetric(seed in 0u64..1000, index in 0u64..1000, (k, l) in shape()) {
        let (spec, p) = draw(k, l, Flavor::Real, seed, index);
        let jet = evaluate_jet(&spec, &p, 0.0).unwrap();
        let (a, b, d) = real_blocks(&jet).unwrap();
        let w = assemble_w(&a, &b, &d);
        for i in 0..k {
            for j in 0..l {
                prop_assert!((w[(i, k + j)] - w[(k + j, i)]).abs() <= 1e-14 * (1.0 + w[(i, k + j)].abs()));
            }
        }
        prop_assert!(real_w(&jet).unwrap().min_max_eigenvalues().0 >= -1e-10);
        let short = transformed_operator_l(&spec, &p).unwrap();
        let long = transformed_operator_l_long(&spec, &p).unwrap();
        for i in 0..k + l {
            for j in 0..k + l {
                prop_assert!((short.get(i, j) - long[(i, j)]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn partial_legendre_inverts_the_gradient(seed in 0u64..1000, index in 0u64..1000, (k, l) in shape()) {
        let (spec, p) = draw(k, l, Flavor::Real, seed, index);
        let (x, z) = (&p[..k], &p[k..]);
        let r = partial_legendre(&spec, x, z).unwrap();
        let q: Vec<f64> = x.iter().chain(&r.y).copied().collect();
        let jet = evaluate_jet(&spec, &q, 0.0).unwrap();
        for j in 0..l {
            prop_assert!((jet.partial(&[k + j]) - z[j]).abs() <= 1e-12 * (1.0 + z[j].abs()));
        }
    }

    #[test]
    fn operator_equals_log_det_w(seed in 0u64..1000, index in 0u64..1000, (k, l) in shape()) {
        let (spec, p) = draw(k, l, Flavor::Real, seed, index);
        let jet = evaluate_jet(&spec, &p, 0.0).unwrap();
        let w = real_w(&jet).unwrap();
        let (_, logdet) = w.inverse_and_logdet(DEFAULT_COND_GUARD).unwrap();
        prop_assert!(close(eval_f_real(&jet).unwrap(), logdet, 1e-12));
        prop_assert!(det_transform_residual(&spec, &p).unwrap() <= 1e-10);
    }

    #[test]
    fn complex_w_is_hermitian_psd(seed in 0u64..1000, index in 0u64..1000, (k, l) in shape()) {
        let (spec, p) = draw(k, l, Flavor::Complex, seed, index);
        let t = wirtinger_table(&spec, &p).unwrap();
        let w = complex_w(&t).unwrap();
        prop_assert!(HermitianMatrix::hermitian_defect(&w.rows()) <= 1e-14);
        prop_assert!(w.min_max_eigenvalues().0 >= -1e-10);
        prop_assert!(logdet_w_equivalence_residual(&t).unwrap() <= 1e-10);
    }

    #[test]
    fn complex_l_is_linear(seed in 0u64..1000, index in 0u64..1000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let es = ensemble(1, 1, Flavor::Complex, seed);
        let (u, phi, psi) = (es.member(index).unwrap(), es.member(index + 1).unwrap(), es.member(index + 2).unwrap());
        let mix = ExpressionSpec::new(1, 1, Flavor::Complex, false, Expr::sum(vec![Expr::scale(a, phi.expr.clone()), Expr::scale(b, psi.expr.clone())])).unwrap();
        let p = es.points(index, 1).remove(0);
        let t = |s: &ExpressionSpec| wirtinger_table(s, &p).unwrap();
        let tu = t(&u);
        let lhs = complex_l_apply(&tu, &t(&mix)).unwrap();
        let rhs = a * complex_l_apply(&tu, &t(&phi)).unwrap() + b * complex_l_apply(&tu, &t(&psi)).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn evolution_identities_hold(seed in 0u64..1000, index in 0u64..1000, (k, l) in shape()) {
        let (spec, p) = draw(k, l, Flavor::Complex, seed, index);
        prop_assert!(evolution_residual(&spec, &p).unwrap() <= 1e-8);
        prop_assert!(heat_residual(&spec, &p).unwrap() <= 1e-10);
        let q = assemble_q(&wirtinger_table(&spec, &p).unwrap()).unwrap();
        prop_assert!(q.hermitian_defect <= 1e-10);
        prop_assert!(q.lambda_max() <= 1e-8);
        prop_assert!(q.group_lambda_max().iter().all(|&g| g <= 1e-8));
    }

    #[test]
    fn q_vanishes_on_quadratics(seed in any::<u64>(), (k, l) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 * (k + l);
        let diag: Vec<f64> = (0..n).map(|i| if i < 2 * k { rng.random_range(0.5..3.0) } else { -rng.random_range(0.5..3.0) }).collect();
        let spec = ExpressionSpec::new(k, l, Flavor::Complex, false, Expr::diag_quad(&diag)).unwrap();
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q = assemble_q(&wirtinger_table(&spec, &p).unwrap()).unwrap();
        prop_assert!(q.matrix.max_abs() == 0.0);
    }

    #[test]
    fn real_functions_reduce_through_complexification(seed in 0u64..1000, index in 0u64..1000, (k, l) in shape()) {
        let (spec, p) = draw(k, l, Flavor::Real, seed, index);
        let r = real_reduction(&spec, &p).unwrap();
        prop_assert!(r.w_residual <= 1e-10 && r.q_residual <= 1e-10 && r.f_residual <= 1e-10);
        prop_assert!(r.lambda_max_complex <= 1e-8);
    }

    #[test]
    fn rescaling_preserves_h(seed in 0u64..1000, index in 0u64..1000, mu in 0.25f64..4.0, t in -0.5f64..0.5) {
        let (spec, p) = draw(1, 1, Flavor::Complex, seed, index);
        let scaled: Vec<f64> = p.iter().map(|x| x / mu).collect();
        let r = rescale_report(&spec, mu, &scaled, t / (mu * mu)).unwrap();
        prop_assert!((r.h_before - r.h_after).abs() <= 1e-12 * (1.0 + r.h_before.abs()));
        if r.third_norm_before > 1e-8 {
            prop_assert!((r.ratio - mu).abs() <= 1e-12 * mu);
        }
    }

    #[test]
    fn oscillation_is_monotone_under_inclusion(seed in any::<u64>(), r1 in 0.05f64..1.0, r2 in 0.05f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut set = SampleSet { flavor: Some(Flavor::Real), names: vec!["a".into(), "b".into()], ..Default::default() };
        for _ in 0..400 {
            set.points.push(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            set.times.push(rng.random_range(-1.0..0.0));
            set.values.push(vec![rng.random_range(-1.0..1.0), rng.random_range(0.0..5.0)]);
        }
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let cyl = CylinderSpec { center: vec![0.0, 0.0], time: 0.0, radius: hi, ladder: vec![hi] };
        if let (Ok(small), Ok(big)) = (cylinder_oscillation(&set, &cyl, lo), cylinder_oscillation(&set, &cyl, hi)) {
            prop_assert!(small.iter().zip(&big).all(|(s, b)| s <= b));
        }
    }
}

proptest! {
    #![proptest_config(cfg(8))]

    #[test]
    fn det_w_equals_exp_f_on_discrete_fields(a in 0.6f64..1.8, b in 0.6f64..1.8, c in -0.3f64..0.3) {
        let spec = ExpressionSpec::new(1, 1, Flavor::Real, false, Expr::quad(vec![vec![a, c], vec![c, -b]], vec![0.0; 2], 0.0)).unwrap();
        let f = FlowField::framed(Grid::cube(2, -1.0, 1.0, 7, false), spec, 1e-4, (0.1, 10.0)).unwrap();
        let r = rigidity_probe(&f, 0).unwrap();
        prop_assert!(r.identity_defect <= 1e-12, "{r:?}");
    }

    #[test]
    fn quadratics_advance_by_their_drift(a in 0.6f64..1.8, b in 0.6f64..1.8) {
        let base = ExpressionSpec::new(1, 1, Flavor::Real, false, Expr::diag_quad(&[a, -b])).unwrap();
        let mut f = FlowField::framed(Grid::cube(2, -1.0, 1.0, 9, false), base.with_time_drift((a / b).ln()), 1e-4, (0.5, 2.0)).unwrap();
        let start = f.current().to_vec();
        for _ in 0..3 {
            step_parabolic(&mut f, Scheme::Rk4).unwrap();
        }
        let shift = 3.0 * 1e-4 * (a / b).ln();
        prop_assert!(f.current().iter().zip(&start).all(|(u, s)| (u - s - shift).abs() <= 1e-12));
    }
}
