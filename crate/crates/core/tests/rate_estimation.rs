mod common;

use approx::assert_relative_eq;
use common::{rng, unit_vector};
use robust_se3::control::{estimate_computed_rates, ComputedRateEstimator};
use robust_se3::geometry::{exp_so3, Rotation, Vec3};
use robust_se3::Error;

/// Rotation about a fixed axis with angle `a + b t + c t^2`: the body rate is
/// `(b + 2 c t) axis` and its derivative `2 c axis`.
#[test]
fn exact_for_quadratic_angle_about_fixed_axis() {
    let mut rng = rng(30);
    let dt = 1e-3;
    for _ in 0..100 {
        let axis = unit_vector(&mut rng);
        let r0 = exp_so3(&(unit_vector(&mut rng) * 1.3));
        let (a, b, c) = (0.2, 1.5, -0.7);
        let history: Vec<Rotation> = (0..10)
            .map(|k| {
                let t = k as f64 * dt;
                r0 * exp_so3(&(axis * (a + b * t + c * t * t)))
            })
            .collect();
        let rates = estimate_computed_rates(&history, dt).unwrap();
        let t = 9.0 * dt;
        assert!(rates.is_warm());
        assert_relative_eq!(rates.angular_velocity, axis * (b + 2.0 * c * t), epsilon = 1e-8);
        assert_relative_eq!(rates.angular_acceleration, axis * 2.0 * c, epsilon = 1e-5);
    }
}

#[test]
fn second_order_for_general_motion() {
    // Rate varying in direction as well as magnitude.
    let omega = |t: f64| Vec3::new(0.5 * t.sin(), 0.3, 0.2 * t);
    let mut errs = Vec::new();
    for dt in [2e-3, 1e-3] {
        let n = (0.5 / dt) as usize;
        let mut r = Rotation::identity();
        let mut est = ComputedRateEstimator::new(dt);
        let mut out = est.push(&r);
        for k in 0..n {
            // Midpoint update: exact enough at this dt for the comparison below.
            let t = (k as f64 + 0.5) * dt;
            r = r * exp_so3(&(omega(t) * dt));
            out = est.push(&r);
        }
        errs.push((out.angular_velocity - omega(n as f64 * dt)).norm());
    }
    assert!(errs[1] < 1e-5, "{errs:?}");
    assert!(errs[1] < 0.3 * errs[0], "{errs:?}");
}

#[test]
fn short_history_is_an_error_for_the_free_function() {
    let r = [Rotation::identity()];
    assert!(matches!(estimate_computed_rates(&r, 1e-3), Err(Error::InsufficientHistory { have: 1 })));
    let mut est = ComputedRateEstimator::new(1e-3);
    let first = est.push(&Rotation::identity());
    assert_eq!(first.angular_velocity, Vec3::zeros());
    assert!(!first.is_warm());
}
