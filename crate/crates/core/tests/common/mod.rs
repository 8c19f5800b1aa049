#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_se3::geometry::{exp_so3, Mat3, Rotation, Vec3};

pub const SAMPLES: usize = 10_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction on the unit sphere.
pub fn unit_vector(rng: &mut impl Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// `exp(theta hat(a))` with `a` uniform on the sphere and `theta` uniform in `[0, pi]`.
pub fn rotation(rng: &mut impl Rng) -> Rotation {
    let angle: f64 = rng.random_range(0.0..=PI);
    exp_so3(&(unit_vector(rng) * angle))
}

pub fn vector(rng: &mut impl Rng, scale: f64) -> Vec3 {
    Vec3::from_fn(|_, _| rng.random_range(-scale..=scale))
}

pub fn matrix(rng: &mut impl Rng, scale: f64) -> Mat3 {
    Mat3::from_fn(|_, _| rng.random_range(-scale..=scale))
}

/// Largest singular value from nalgebra's SVD.
pub fn spectral_norm(m: &Mat3) -> f64 {
    m.svd(false, false).singular_values.max()
}
