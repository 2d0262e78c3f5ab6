use mcs_adi::analysis::{local_error_vector, ExponentialReference};
use mcs_adi::linalg::ScaledVector;
use mcs_adi::schemes::{
    hv_reference_theta, integrate, mcs_step, perturbed_mcs_step, PerturbationSet, SchemeConfig, SchemeKind,
};
use mcs_adi::semidiscretize::{assemble, initial_vector, Grid2D, ProblemSpec, SplitSystem};
use proptest::prelude::*;

#[test]
fn hv_converges_at_second_order() {
    let p = ProblemSpec::model();
    let grid = Grid2D::square(12).unwrap();
    let op = assemble(&p, &grid).unwrap();
    let u0 = initial_vector(&p, &grid);
    let run = |n: usize| {
        let c = SchemeConfig::covering(SchemeKind::Hv, hv_reference_theta(), 2.0, 2 * n).unwrap();
        integrate(&c, &op, &u0).unwrap()
    };
    let exact = ExponentialReference::new(&op.to_dense().unwrap())
        .unwrap()
        .solution_at(&u0, 2.0)
        .unwrap();
    let errs: Vec<f64> = [64, 128, 256].iter().map(|&n| run(n).sub(&exact).norm()).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.4..=4.6).contains(&ratio), "ratios from {errs:?}");
    }
}

#[test]
fn hv_reference_agrees_with_matrix_exponential() {
    let p = ProblemSpec::model();
    let grid = Grid2D::square(15).unwrap();
    let op = assemble(&p, &grid).unwrap();
    let u0 = initial_vector(&p, &grid);
    let exact = ExponentialReference::new(&op.to_dense().unwrap())
        .unwrap()
        .solution_at(&u0, 2.0)
        .unwrap();
    let c = SchemeConfig::covering(SchemeKind::Hv, hv_reference_theta(), 2.0, 4000).unwrap();
    let gap = integrate(&c, &op, &u0).unwrap().sub(&exact).norm();
    assert!(gap < 1e-8, "{gap:e}");
}

#[test]
fn mcs_error_ratio_is_four_at_fixed_mesh() {
    let p = ProblemSpec::model();
    let grid = Grid2D::square(20).unwrap();
    let op = assemble(&p, &grid).unwrap();
    let u0 = initial_vector(&p, &grid);
    let exact = ExponentialReference::new(&op.to_dense().unwrap())
        .unwrap()
        .solution_at(&u0, 2.0)
        .unwrap();
    for theta in [1.0 / 3.0, 0.5, 1.0] {
        let err = |n: usize| {
            let c = SchemeConfig::covering(SchemeKind::Mcs, theta, 2.0, 2 * n).unwrap();
            integrate(&c, &op, &u0).unwrap().sub(&exact).norm()
        };
        let ratio = err(32) / err(64);
        assert!((3.4..=4.6).contains(&ratio), "theta {theta}: ratio {ratio}");
    }
}

/// With all stages pinned to the exact solution, the perturbations are the
/// stage defects, and the dense local-error formula must reproduce
/// `U(t_n) - MCS(U(t_{n-1}))`.
#[test]
fn local_error_formula_matches_one_step_defect() {
    let p = ProblemSpec::model();
    let grid = Grid2D::square(6).unwrap();
    let dense = assemble(&p, &grid).unwrap().to_dense().unwrap();
    let reference = ExponentialReference::new(&dense).unwrap();
    let u0 = initial_vector(&p, &grid);
    let (theta, dt, t0) = (0.4, 0.05, 0.6);
    let t1 = t0 + dt;
    let u_prev = reference.solution_at(&u0, t0).unwrap();
    let u_next = reference.advance(t0, &u_prev, dt).unwrap();
    let phi = |j: usize, t: f64, u: &ScaledVector<f64>| dense.eval_part(j, t, u).unwrap();
    let f = |t: f64, u: &ScaledVector<f64>| dense.apply_full(t, u).unwrap();

    let n = grid.len();
    let mut pert = PerturbationSet::zeros(n, 2);
    pert.rho[0] = u_next.sub(&u_prev).sub(&f(t0, &u_prev).scale(dt));
    for j in 1..=2 {
        let d = phi(j, t1, &u_next).sub(&phi(j, t0, &u_prev)).scale(-theta * dt);
        pert.rho[j] = d.clone();
        pert.rho_tilde[j] = d;
    }
    pert.rho_hat0 = phi(0, t1, &u_next).sub(&phi(0, t0, &u_prev)).scale(-theta * dt);
    pert.rho_tilde[0] = f(t1, &u_next).sub(&f(t0, &u_prev)).scale(-(0.5 - theta) * dt);

    // The pinned perturbed step reproduces the exact solution.
    let (pinned, trace) = perturbed_mcs_step(&dense, theta, dt, t0, &u_prev, &pert).unwrap();
    assert!(pinned.relative_distance(&u_next) < 1e-12);
    assert!(trace.y.iter().all(|y| y.relative_distance(&u_next) < 1e-12));

    let defect = u_next.sub(&mcs_step(&dense, theta, dt, t0, &u_prev).unwrap());
    let d = local_error_vector(&dense.scaled_parts(dt), theta, &pert).unwrap();
    let gap = d.sub(&defect).norm() / defect.norm();
    assert!(gap < 1e-9, "{gap:e}");
}

#[test]
fn trace_records_every_stage() {
    let p = ProblemSpec::model();
    let grid = Grid2D::square(5).unwrap();
    let op = assemble(&p, &grid).unwrap();
    let u = initial_vector(&p, &grid);
    let (out, trace) = perturbed_mcs_step(&op, 0.5, 0.1, 0.0, &u, &PerturbationSet::zeros(25, 2)).unwrap();
    assert_eq!(trace.y.len(), 3);
    assert_eq!(trace.y_tilde.len(), 3);
    assert_eq!(trace.y_tilde[2], out);
    assert_eq!(trace.y_hat0.len(), 25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn zero_perturbations_are_bit_identical(theta in 0.1f64..2.0, dt in 0.001f64..0.5, t in 0.0f64..1.5, seed in 0u64..1000) {
        let p = ProblemSpec::model();
        let grid = Grid2D::new(5, 4).unwrap();
        let op = assemble(&p, &grid).unwrap();
        let u = ScaledVector::from_fn(20, |i| ((i as u64 * 31 + seed) % 17) as f64 / 17.0 - 0.5);
        let plain = mcs_step(&op, theta, dt, t, &u).unwrap();
        let (pert, _) = perturbed_mcs_step(&op, theta, dt, t, &u, &PerturbationSet::zeros(20, 2)).unwrap();
        prop_assert_eq!(plain, pert);
    }

    #[test]
    fn homogeneous_step_is_linear(theta in 0.2f64..1.5, dt in 0.01f64..0.5, a in -3.0f64..3.0) {
        let p = ProblemSpec::model().with_boundary_profile(|_, _| 0.0);
        let grid = Grid2D::square(4).unwrap();
        let op = assemble(&p, &grid).unwrap();
        let u = ScaledVector::from_fn(16, |i| (i as f64).sin());
        let v = ScaledVector::from_fn(16, |i| (i as f64 * 0.3).cos());
        let mut w = u.clone();
        w.axpy(a, &v);
        let lhs = mcs_step(&op, theta, dt, 0.0, &w).unwrap();
        let mut rhs = mcs_step(&op, theta, dt, 0.0, &u).unwrap();
        rhs.axpy(a, &mcs_step(&op, theta, dt, 0.0, &v).unwrap());
        prop_assert!(lhs.relative_distance(&rhs) < 1e-12);
    }
}
