mod common;

use common::{rng, SAMPLES};
use proptest::prelude::*;
use rand::Rng;
use robust_se3::geometry::Vec3;
use robust_se3::model::{allocate_rotors, allocation_matrix, wrench_from_rotors, QuadrotorParams, Wrench};
use robust_se3::Error;

#[test]
fn roundtrip_on_random_wrenches() {
    let p = QuadrotorParams::reference();
    let mut rng = rng(10);
    for _ in 0..SAMPLES {
        let w = Wrench {
            thrust: rng.random_range(0.0..100.0),
            moment: Vec3::from_fn(|_, _| rng.random_range(-5.0..5.0)),
        };
        let back = wrench_from_rotors(&allocate_rotors(&w, &p).unwrap(), &p);
        assert!((back.thrust - w.thrust).abs() <= 1e-12);
        assert!((back.moment - w.moment).amax() <= 1e-12);
    }
}

#[test]
fn determinant_matches_lu() {
    let p = QuadrotorParams::reference();
    let lu = allocation_matrix(&p).lu().determinant();
    let expected = 8.0 * p.torque_coefficient * p.arm_length * p.arm_length;
    assert!((lu - expected).abs() <= 1e-12, "{lu} vs {expected}");
}

#[test]
fn singular_geometry_is_rejected() {
    let mut p = QuadrotorParams::reference();
    p.torque_coefficient = 0.0;
    let w = Wrench { thrust: 40.0, moment: Vec3::zeros() };
    assert!(matches!(allocate_rotors(&w, &p), Err(Error::SingularAllocation { .. })));
}

proptest! {
    #[test]
    fn allocation_matches_linear_solve(f in 0.0..100.0f64, m in prop::array::uniform3(-5.0..5.0f64)) {
        let p = QuadrotorParams::reference();
        let w = Wrench { thrust: f, moment: Vec3::new(m[0], m[1], m[2]) };
        let rotors = allocate_rotors(&w, &p).unwrap();
        let rhs = nalgebra::Vector4::new(f, m[0], m[1], m[2]);
        let solved = allocation_matrix(&p).lu().solve(&rhs).unwrap();
        for i in 0..4 {
            prop_assert!((rotors.0[i] - solved[i]).abs() <= 1e-9);
        }
    }
}
