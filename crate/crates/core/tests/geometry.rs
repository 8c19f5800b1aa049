mod common;

use approx::assert_relative_eq;
use common::{matrix, rotation, rng, spectral_norm, vector, SAMPLES};
use proptest::prelude::*;
use robust_se3::geometry::{
    attitude_error_function, attitude_error_vector, error_jacobian, exp_so3, hat, log_so3,
    project_to_rotation, vee, Mat3, Rotation, Vec3,
};

fn arb_vec(scale: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-scale..scale).prop_map(|a| Vec3::new(a[0], a[1], a[2]))
}

fn arb_rotation() -> impl Strategy<Value = Rotation> {
    (arb_vec(1.0), 0.0..std::f64::consts::PI).prop_map(|(v, angle)| {
        let axis = if v.norm() > 1e-3 { v.normalize() } else { Vec3::x() };
        exp_so3(&(axis * angle))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn vee_inverts_hat(v in arb_vec(1e3)) {
        prop_assert_eq!(vee(&hat(&v)).unwrap(), v);
    }

    #[test]
    fn hat_is_cross_product(x in arb_vec(1.0), y in arb_vec(1.0)) {
        prop_assert!((hat(&x) * y - x.cross(&y)).norm() <= 1e-15);
    }

    #[test]
    fn error_function_is_bounded(r in arb_rotation(), rd in arb_rotation()) {
        let psi = attitude_error_function(&r, &rd);
        prop_assert!((0.0..=2.0).contains(&psi));
    }

    #[test]
    fn error_vector_norm_matches_error_function(r in arb_rotation(), rd in arb_rotation()) {
        let psi = attitude_error_function(&r, &rd);
        let e = attitude_error_vector(&r, &rd);
        prop_assert!((e.norm_squared() - psi * (2.0 - psi)).abs() <= 1e-10);
    }

    #[test]
    fn log_inverts_exp_below_pi(v in arb_vec(1.0), angle in 0.0..3.1f64) {
        let w = if v.norm() > 1e-3 { v.normalize() * angle } else { Vec3::zeros() };
        prop_assert!((log_so3(&exp_so3(&w)) - w).norm() <= 1e-12);
    }
}

#[test]
fn hat_map_identities_hold_on_random_samples() {
    let mut rng = rng(1);
    for _ in 0..SAMPLES {
        let x = vector(&mut rng, 1.0);
        let y = vector(&mut rng, 1.0);
        let a = matrix(&mut rng, 1.0);
        let r = rotation(&mut rng);
        assert!((-0.5 * (hat(&x) * hat(&y)).trace() - x.dot(&y)).abs() <= 1e-12);
        let skew = a - a.transpose();
        let vee_skew = Vec3::new(skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]);
        assert!(((hat(&x) * a).trace() + x.dot(&vee_skew)).abs() <= 1e-12);
        assert!(((a * hat(&x)).trace() - (hat(&x) * a).trace()).abs() <= 1e-12);
        let lhs = hat(&x) * a + a.transpose() * hat(&x);
        let rhs = hat(&((a.trace() * Mat3::identity() - a) * x));
        assert!((lhs - rhs).amax() <= 1e-12);
        let rm = r.matrix();
        assert!((rm * hat(&x) * rm.transpose() - hat(&(rm * x))).amax() <= 1e-12);
    }
}

#[test]
fn error_bounds_on_random_pairs() {
    let mut rng = rng(2);
    for _ in 0..SAMPLES {
        let r = rotation(&mut rng);
        let rd = rotation(&mut rng);
        let psi = attitude_error_function(&r, &rd);
        let e2 = attitude_error_vector(&r, &rd).norm_squared();
        assert!(0.5 * e2 <= psi + 1e-10);
        assert!((e2 - psi * (2.0 - psi)).abs() <= 1e-10);
        if psi < 2.0 {
            let bound: f64 = rand::Rng::random_range(&mut rng, psi..2.0);
            if bound < 2.0 && bound > psi {
                assert!(psi <= e2 / (2.0 - bound) + 1e-10, "psi {psi} bound {bound}");
            }
        }
        assert!(spectral_norm(&error_jacobian(&r, &rd)) <= 1.0 + 1e-12);
    }
}

/// `U V^T` from the SVD, with the sign of the last column fixed for `det = +1`.
fn svd_projection(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let (mut u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    if (u * v_t).determinant() < 0.0 {
        let col = -u.column(2);
        u.set_column(2, &col);
    }
    u * v_t
}

#[test]
fn projection_matches_svd_oracle() {
    let mut rng = rng(3);
    for _ in 0..SAMPLES {
        let r = rotation(&mut rng);
        let m = r.matrix() + matrix(&mut rng, 1e-3);
        let p = project_to_rotation(&m).unwrap();
        assert_relative_eq!(*p.matrix(), svd_projection(&m), epsilon = 1e-10);
        assert!(p.orthogonality_error() <= 1e-12);
    }
}

#[test]
fn exp_matches_matrix_exponential() {
    let mut rng = rng(4);
    for _ in 0..1000 {
        let w = vector(&mut rng, 3.0);
        assert_relative_eq!(*exp_so3(&w).matrix(), hat(&w).exp(), epsilon = 1e-12);
    }
}
