use sympred::basis::{generate_basis, BasisMethod};
use sympred::config::RunConfig;
use sympred::integrator::{snapshot_collect, solve_full};
use sympred::models::ForcingKind;
use sympred::rom::{
    hamiltonian_drift, hamiltonian_scale, projection_error, reduce_system, relative_error,
    run_generalization_experiment, solve_reduced, ProjectionMode, ReducedOperators,
};
use sympred::symplectic::{BasisKind, PoissonOperator, ReducedBasis};
use sympred::{Error, Matrix};

fn smoke(forcing: ForcingKind) -> RunConfig {
    let mut cfg = RunConfig::from_toml(include_str!("../../../configs/smoke.toml")).unwrap();
    cfg.model.forcing = forcing;
    cfg
}

#[test]
fn identity_basis_reproduces_the_full_model() {
    let exp = smoke(ForcingKind::SinusoidalTip).experiment().unwrap();
    let dim = 2 * exp.model.n();
    let v = ReducedBasis::new(Matrix::identity(dim, dim), BasisKind::OrthonormalSymplectic).unwrap();
    let p = exp.design.test[0];
    let full = solve_full(&exp.model, p, exp.profile, &exp.design.grid).unwrap();
    let sys = exp.model.system(p, exp.profile).unwrap();
    for mode in [ProjectionMode::Symplectic, ProjectionMode::Galerkin] {
        let red = reduce_system(&sys, &v, mode).unwrap();
        let r = solve_reduced(&red, &exp.design.grid).unwrap();
        assert!(relative_error(&full, &r.trajectory, &v).unwrap() < 1e-10, "{mode}");
    }
}

#[test]
fn offline_online_split_matches_direct_projection() {
    let exp = smoke(ForcingKind::SinusoidalTip).experiment().unwrap();
    let snaps = snapshot_collect(&exp.design, &exp.model, exp.profile).unwrap();
    for method in [BasisMethod::PsdSvdLike, BasisMethod::PodFull] {
        let v = generate_basis(method, &snaps.data, 8).unwrap().basis;
        let mode = ProjectionMode::for_basis(&v);
        let ops = ReducedOperators::new(&exp.model, &v, mode).unwrap();
        for &p in exp.design.test.iter().take(3) {
            let sys = exp.model.system(p, exp.profile).unwrap();
            let direct = reduce_system(&sys, &v, mode).unwrap();
            let online = ops.system(&exp.model, p, exp.profile, &sys.x0).unwrap();
            let scale = direct.a_hat.norm();
            assert!((&direct.a_hat - &online.a_hat).norm() <= 1e-12 * scale, "{method}");
            assert!((&direct.h_hat - &online.h_hat).norm() <= 1e-12 * direct.h_hat.norm());
            assert!((&direct.b_hat - &online.b_hat).norm() <= 1e-12 * direct.b_hat.norm().max(1.0));
        }
    }
}

#[test]
fn reduced_operator_is_the_projected_full_operator() {
    let exp = smoke(ForcingKind::SinusoidalTip).experiment().unwrap();
    let snaps = snapshot_collect(&exp.design, &exp.model, exp.profile).unwrap();
    let sys = exp.model.system(exp.design.test[1], exp.profile).unwrap();
    let a = sys.ode().a;
    for method in [
        BasisMethod::PsdSvdLike,
        BasisMethod::PsdComplexSvd,
        BasisMethod::PodSeparate,
    ] {
        let v = generate_basis(method, &snaps.data, 6).unwrap().basis;
        let mode = ProjectionMode::for_basis(&v);
        let wt = match mode {
            ProjectionMode::Symplectic => v.symplectic_inverse(),
            ProjectionMode::Galerkin => v.matrix().transpose(),
        };
        let expected = &wt * &a * v.matrix();
        let red = reduce_system(&sys, &v, mode).unwrap();
        assert!((&red.a_hat - &expected).norm() <= 1e-10 * expected.norm(), "{method}");
        if mode == ProjectionMode::Symplectic {
            let jh = PoissonOperator::for_dim(6).unwrap().left_mul(&red.h_hat).unwrap();
            assert!((&red.a_hat - jh).norm() <= 1e-10 * expected.norm());
        }
    }
}

#[test]
fn symplectic_reduction_conserves_the_reduced_energy() {
    let exp = smoke(ForcingKind::ConstantTip).experiment().unwrap();
    let snaps = snapshot_collect(&exp.design, &exp.model, exp.profile).unwrap();
    for method in [
        BasisMethod::PsdSvdLike,
        BasisMethod::PsdGreedy,
        BasisMethod::PsdCotangentLift,
    ] {
        let v = generate_basis(method, &snaps.data, 8).unwrap().basis;
        let sys = exp.model.system(exp.design.test[0], exp.profile).unwrap();
        let red = reduce_system(&sys, &v, ProjectionMode::Symplectic).unwrap();
        let r = solve_reduced(&red, &exp.design.grid).unwrap();
        let full = solve_full(&exp.model, exp.design.test[0], exp.profile, &exp.design.grid).unwrap();
        let h_rel = hamiltonian_scale(&sys, &full).unwrap();
        let drift = hamiltonian_drift(&r.hamiltonian, h_rel).unwrap();
        assert!(drift.max_relative < 1e-10, "{method}: {:e}", drift.max_relative);
    }
}

#[test]
fn projection_mode_must_match_the_basis() {
    let exp = smoke(ForcingKind::SinusoidalTip).experiment().unwrap();
    let snaps = snapshot_collect(&exp.design, &exp.model, exp.profile).unwrap();
    let sys = exp.model.system(exp.design.test[0], exp.profile).unwrap();
    let pod = generate_basis(BasisMethod::PodFull, &snaps.data, 4).unwrap().basis;
    assert!(matches!(
        reduce_system(&sys, &pod, ProjectionMode::Symplectic),
        Err(Error::Mode(_))
    ));
    let sl = generate_basis(BasisMethod::PsdSvdLike, &snaps.data, 4).unwrap().basis;
    if sl.kind() == BasisKind::SymplecticNonorthonormal {
        assert!(matches!(
            reduce_system(&sys, &sl, ProjectionMode::Galerkin),
            Err(Error::Mode(_))
        ));
    }
}

#[test]
fn snapshot_columns_are_full_model_states() {
    let exp = smoke(ForcingKind::SinusoidalTip).experiment().unwrap();
    let snaps = snapshot_collect(&exp.design, &exp.model, exp.profile).unwrap();
    for col in [0, snaps.nt + 7, snaps.ncols() - 1] {
        let (p, step) = snaps.tag(col);
        let traj = solve_full(&exp.model, p, exp.profile, &exp.design.grid).unwrap();
        assert_eq!(snaps.data.column(col), traj.states.column(step));
    }
}

#[test]
fn sweep_produces_one_cell_per_method_size_and_parameter() {
    let mut cfg = smoke(ForcingKind::SinusoidalTip);
    cfg.design.sweep = vec![4, 8];
    let exp = cfg.experiment().unwrap();
    let snaps = snapshot_collect(&exp.design, &exp.model, exp.profile).unwrap();
    let methods = [BasisMethod::PsdSvdLike, BasisMethod::PodFull];
    let rep = run_generalization_experiment(&exp.model, &exp.design, exp.profile, &snaps, &methods).unwrap();
    assert_eq!(exp.design.test.len(), 16);
    assert_eq!(rep.cells.len(), 64);
    assert_eq!(rep.bases.len(), 4);
    for b in &rep.bases {
        let v = generate_basis(b.method, &snaps.data, b.size).unwrap().basis;
        let e = projection_error(&v, &snaps.data).unwrap();
        assert!(
            (b.e_l2 - e).abs() <= 1e-10 * rep.snapshot_norm_sq,
            "{} {}",
            b.method,
            b.size
        );
    }
}
