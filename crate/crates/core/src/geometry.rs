//! SO(3) primitives and the attitude error quantities used by both flight modes.
//!
//! All rotations are 3x3 matrices mapping body-fixed coordinates to inertial
//! coordinates. The attitude error function `Psi(R, Rd) = 1/2 tr(I - Rd^T R)`
//! lies in `[0, 2]` and vanishes only at `R = Rd`; `e_R` and `e_Omega` are the
//! error vectors the moment controllers feed back on.

use nalgebra::{Matrix3, Vector3};
use std::ops::Mul;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance on `|R^T R - I|_F` and `|det R - 1|` for a matrix to count as a rotation.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Tolerance on `|S + S^T|_F` accepted by [`vee`].
pub const SKEW_TOLERANCE: f64 = 1e-8;

const SERIES_THRESHOLD: f64 = 1e-12;

/// A matrix in SO(3).
///
/// Construction from a raw matrix validates and rejects; it never projects.
/// Use [`project_to_rotation`] when a nearby rotation is wanted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let orthogonality = orthogonality_error(&m);
        let det = m.determinant();
        if !orthogonality.is_finite()
            || orthogonality > ROTATION_TOLERANCE
            || (det - 1.0).abs() > ROTATION_TOLERANCE
        {
            return Err(Error::NotARotation { orthogonality, det });
        }
        Ok(Rotation(m))
    }

    /// Builds a rotation from its three columns.
    pub fn from_columns(b1: &Vec3, b2: &Vec3, b3: &Vec3) -> Result<Self> {
        Self::from_matrix(Mat3::from_columns(&[*b1, *b2, *b3]))
    }

    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    /// Rotation by `angle` about the unit direction of `axis`.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::identity();
        }
        exp_so3(&(axis * (angle / n)))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_inner(self) -> Mat3 {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    /// The `i`-th body axis expressed in the inertial frame.
    pub fn axis(&self, i: usize) -> Vec3 {
        self.0.column(i).into_owned()
    }

    pub fn orthogonality_error(&self) -> f64 {
        orthogonality_error(&self.0)
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for Rotation {
    type Output = Vec3;

    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

impl Mul<&Vec3> for &Rotation {
    type Output = Vec3;

    fn mul(self, rhs: &Vec3) -> Vec3 {
        self.0 * rhs
    }
}

/// `|M^T M - I|_F`.
pub fn orthogonality_error(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).norm()
}

/// The hat map: `hat(v) w = v x w`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -v[2], v[1], //
        v[2], 0.0, -v[0], //
        -v[1], v[0], 0.0,
    )
}

/// Inverse of [`hat`]. Rejects matrices that are not skew-symmetric within
/// [`SKEW_TOLERANCE`].
pub fn vee(s: &Mat3) -> Result<Vec3> {
    let asymmetry = (s + s.transpose()).norm();
    if !asymmetry.is_finite() || asymmetry > SKEW_TOLERANCE {
        return Err(Error::NotSkewSymmetric { asymmetry });
    }
    Ok(vee_unchecked(s))
}

/// Reads the three independent entries below the diagonal without checking
/// skew-symmetry.
pub(crate) fn vee_unchecked(s: &Mat3) -> Vec3 {
    Vec3::new(s[(2, 1)], s[(0, 2)], s[(1, 0)])
}

/// `(A - A^T)^vee`, always well-defined.
pub fn vee_of_skew_part(a: &Mat3) -> Vec3 {
    vee_unchecked(&(a - a.transpose()))
}

/// Exponential map via the Rodrigues formula.
pub fn exp_so3(v: &Vec3) -> Rotation {
    let theta = v.norm();
    let k = hat(v);
    let k2 = k * k;
    let m = if theta < SERIES_THRESHOLD {
        Mat3::identity() + k + 0.5 * k2
    } else {
        let a = theta.sin() / theta;
        let b = (1.0 - theta.cos()) / (theta * theta);
        Mat3::identity() + a * k + b * k2
    };
    Rotation(m)
}

/// Logarithm on SO(3), returning the rotation vector with angle in `[0, pi]`.
pub fn log_so3(r: &Rotation) -> Vec3 {
    let m = r.matrix();
    let cos = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = cos.acos();
    let skew = 0.5 * vee_of_skew_part(m);
    if theta < 1e-6 {
        // sin(theta)/theta ~ 1 - theta^2/6
        return skew * (1.0 + theta * theta / 6.0);
    }
    if std::f64::consts::PI - theta > 1e-6 {
        return skew * (theta / theta.sin());
    }
    // Near a half turn: recover the axis from the symmetric part.
    let sym = (m + m.transpose()) * 0.5 - Mat3::identity() * cos;
    let diag = Vec3::new(sym[(0, 0)], sym[(1, 1)], sym[(2, 2)]);
    let i = diag.imax();
    let mut axis = sym.column(i).into_owned();
    axis /= axis.norm();
    if axis.dot(&skew) < 0.0 {
        axis = -axis;
    }
    axis * theta
}

/// Nearest rotation in the Frobenius norm (orthogonal polar factor), computed
/// by the Newton iteration `X <- (X + X^-T) / 2`.
pub fn project_to_rotation(m: &Mat3) -> Result<Rotation> {
    let det = m.determinant();
    if !det.is_finite() || det <= 0.0 {
        return Err(Error::Degenerate("determinant is not positive"));
    }
    let mut x = *m;
    for _ in 0..100 {
        let inv_t = x
            .try_inverse()
            .ok_or(Error::Degenerate("rank-deficient iterate"))?
            .transpose();
        let next = 0.5 * (x + inv_t);
        let delta = (next - x).norm();
        x = next;
        if delta <= 1e-15 * x.norm() {
            break;
        }
    }
    if !x.iter().all(|e| e.is_finite()) {
        return Err(Error::Degenerate("iteration diverged"));
    }
    Ok(Rotation(x))
}

/// Attitude error function `Psi = 1/2 tr(I - Rd^T R)`, in `[0, 2]`.
pub fn attitude_error_function(r: &Rotation, rd: &Rotation) -> f64 {
    let tr = (rd.matrix().transpose() * r.matrix()).trace();
    (0.5 * (3.0 - tr)).clamp(0.0, 2.0)
}

/// Attitude error vector `e_R = 1/2 (Rd^T R - R^T Rd)^vee`.
pub fn attitude_error_vector(r: &Rotation, rd: &Rotation) -> Vec3 {
    let p = rd.matrix().transpose() * r.matrix();
    0.5 * vee_of_skew_part(&p)
}

/// Angular velocity error `e_Omega = Omega - R^T Rd Omega_d`.
pub fn angular_velocity_error(r: &Rotation, rd: &Rotation, omega: &Vec3, omega_d: &Vec3) -> Vec3 {
    omega - r.matrix().transpose() * (rd.matrix() * omega_d)
}

/// `E(R, Rd) = 1/2 (tr(R^T Rd) I - R^T Rd)`, so that `d/dt e_R = E e_Omega`.
pub fn error_jacobian(r: &Rotation, rd: &Rotation) -> Mat3 {
    let p = r.matrix().transpose() * rd.matrix();
    0.5 * (Mat3::identity() * p.trace() - p)
}
