use proptest::prelude::*;

use sympred::basis::{generate_basis, pod_loss, psd_loss, BasisMethod};
use sympred::integrator::{implicit_midpoint_linear, SnapshotMatrix, TimeGrid};
use sympred::io;
use sympred::models::{LinearHamiltonianSystem, Param};
use sympred::report::{box_stats, quantile};
use sympred::spectral::{svd_like_decompose, weighted_spectrum};
use sympred::symplectic::PoissonOperator;
use sympred::{Matrix, Vector};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v))
}

/// `(X, 2k)` with `2n` rows and `2k <= min(2n, cols)`.
fn snapshots() -> impl Strategy<Value = (Matrix, usize)> {
    (2usize..6, 3usize..12)
        .prop_flat_map(|(n, m)| (matrix(2 * n, m), 1..=n.min(m / 2).max(1)))
        .prop_map(|(x, k)| (x, 2 * k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn poisson_operator_is_skew_and_orthogonal(x in matrix(8, 3)) {
        let j = PoissonOperator::for_dim(8).unwrap();
        let jj = j.left_mul(&j.left_mul(&x).unwrap()).unwrap();
        prop_assert!((jj + &x).norm() < 1e-14);
        let jt = j.left_mul_transpose(&j.left_mul(&x).unwrap()).unwrap();
        prop_assert!((jt - &x).norm() < 1e-14);
    }

    #[test]
    fn bases_have_their_declared_structure((x, size) in snapshots()) {
        let norm = x.norm_squared();
        for m in BasisMethod::ALL {
            let Ok(out) = generate_basis(m, &x, size) else { continue };
            let v = out.basis;
            prop_assert_eq!(v.full_dim(), x.nrows());
            prop_assert!(v.size() <= size && v.size() % 2 == 0);
            if m.kind().is_symplectic() {
                prop_assert!(v.symplecticity() < 1e-6 * (x.nrows() as f64).sqrt(), "{} s_V {:e}", m, v.symplecticity());
                let loss = psd_loss(&v, &x).unwrap();
                prop_assert!(loss >= 0.0);
                let vp = v.symplectic_inverse() * v.matrix();
                prop_assert!((vp - Matrix::identity(v.size(), v.size())).norm() < 1e-6);
            }
            if m.kind().is_orthonormal() {
                prop_assert!(v.orthonormality() < 1e-10 * (v.size() as f64).sqrt().max(1.0), "{} o_V {:e}", m, v.orthonormality());
                prop_assert!(pod_loss(&v, &x).unwrap() <= norm * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn weights_carry_the_snapshot_energy(x in (1usize..5, 1usize..9).prop_flat_map(|(n, m)| matrix(2 * n, m))) {
        let f = svd_like_decompose(&x).unwrap();
        let w = weighted_spectrum(&f);
        let total: f64 = w.weights.iter().map(|v| v * v).sum();
        prop_assert!((total - x.norm_squared()).abs() <= 1e-8 * x.norm_squared());
        prop_assert!(f.sigma().iter().all(|s| *s > 0.0));
        prop_assert!((f.reconstruct() - &x).norm() <= 1e-8 * x.norm());
    }

    #[test]
    fn midpoint_conserves_quadratic_energy(
        k in matrix(3, 3),
        minv in prop::collection::vec(0.5f64..2.0, 3),
        x0 in prop::collection::vec(-1.0f64..1.0, 6),
        nt in 2usize..40,
    ) {
        let spd = &k * k.transpose() + Matrix::identity(3, 3);
        let sys = LinearHamiltonianSystem::new(spd, Vector::from_vec(minv), Vector::zeros(3))
            .unwrap()
            .with_initial_state(Vector::from_vec(x0))
            .unwrap();
        let grid = TimeGrid::new(0.0, 3.0, nt).unwrap();
        let tr = implicit_midpoint_linear(&sys.ode(), &grid, &sys.x0).unwrap();
        let e0 = sys.quadratic_energy(&sys.x0);
        for i in 0..tr.nt() {
            prop_assert!((sys.quadratic_energy(&tr.state(i)) - e0).abs() <= 1e-12 * e0.max(1e-300));
        }
    }

    #[test]
    fn snapshot_container_round_trips(x in matrix(6, 4), lambda in 1.0f64..2.0, mu in 1.0f64..2.0) {
        let s = SnapshotMatrix::new(x, vec![Param::new(lambda, mu); 2], 2).unwrap();
        let back = io::decode_snapshots(&io::encode_snapshots(&s)).unwrap();
        prop_assert_eq!(back.data, s.data);
        prop_assert_eq!(back.params, s.params);
        prop_assert_eq!(back.nt, 2);
    }

    #[test]
    fn truncated_containers_are_rejected(x in matrix(4, 2), cut in 1usize..40) {
        let s = SnapshotMatrix::new(x, vec![Param::new(1.0, 1.0)], 2).unwrap();
        let bytes = io::encode_snapshots(&s);
        prop_assert!(io::decode_snapshots(&bytes[..bytes.len() - cut.min(bytes.len())]).is_err());
    }

    #[test]
    fn quartiles_are_ordered(mut v in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let st = box_stats(&v);
        v.sort_by(f64::total_cmp);
        prop_assert!(v[0] <= st.whisker_low && st.whisker_low <= st.q1);
        prop_assert!(st.q1 <= st.median && st.median <= st.q3);
        prop_assert!(st.q3 <= st.whisker_high && st.whisker_high <= v[v.len() - 1]);
        prop_assert_eq!(quantile(&v, 0.0), v[0]);
        prop_assert_eq!(quantile(&v, 1.0), v[v.len() - 1]);
    }
}
