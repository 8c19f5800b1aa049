//! Sufficient gain conditions for uniform ultimate boundedness and the
//! resulting ultimate bounds.
//!
//! Every condition is reported with a signed margin `rhs - lhs` (positive
//! when satisfied) so that failures are quantified. Certificates never gate
//! a simulation: the conditions are sufficient, not necessary.

use nalgebra::Matrix2;
use serde::Serialize;

use crate::control::Gains;
use crate::error::{Error, Result};
use crate::model::QuadrotorParams;

pub type Mat2 = Matrix2<f64>;

/// Eigenvalues `(min, max)` of a symmetric 2x2 matrix in closed form.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let (a, b, c) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    (mean - radius, mean + radius)
}

pub fn lambda_min(m: &Mat2) -> f64 {
    sym_eigenvalues(m).0
}

pub fn lambda_max(m: &Mat2) -> f64 {
    sym_eigenvalues(m).1
}

/// Largest singular value of a 2x2 matrix.
pub fn spectral_norm(m: &Mat2) -> f64 {
    lambda_max(&(m.transpose() * m)).max(0.0).sqrt()
}

/// One sufficient condition `lhs < rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `rhs - lhs`; negative when violated.
    pub margin: f64,
}

impl Condition {
    fn less_than(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Condition {
            name,
            lhs,
            rhs,
            satisfied: lhs < rhs,
            margin: rhs - lhs,
        }
    }
}

/// `min{k, 4 k k' l_m^2 / (k^2 l_M + 4 k' l_m^2), sqrt(k' l_m)}` pattern shared by
/// the `c1` and `c2` bounds.
fn c2_bound(g: &Gains, lm: f64, lmax: f64) -> f64 {
    let (kr, kw) = (g.k_r, g.k_omega);
    let second = 4.0 * kw * kr * lm * lm / (kw * kw * lmax + 4.0 * kr * lm * lm);
    kw.min(second).min((kr * lm).sqrt())
}

fn m21(g: &Gains, lm: f64) -> Mat2 {
    0.5 * Mat2::new(g.k_r, -g.c2, -g.c2, lm)
}

fn m22(g: &Gains, psi: f64, lmax: f64) -> Mat2 {
    0.5 * Mat2::new(2.0 * g.k_r / (2.0 - psi), g.c2, g.c2, lmax)
}

fn w2(g: &Gains, lm: f64, lmax: f64) -> Mat2 {
    let off = -g.c2 * g.k_omega / (2.0 * lm);
    Mat2::new(g.c2 * g.k_r / lmax, off, off, g.k_omega - g.c2)
}

/// Certificate for the attitude flight mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttitudeCertificate {
    pub m21: [[f64; 2]; 2],
    pub m22: [[f64; 2]; 2],
    pub w2: [[f64; 2]; 2],
    pub c2_max: f64,
    pub eps_r_max: f64,
    /// Bound on `|e_R|^2 + |e_Omega|^2`.
    pub ultimate_bound: f64,
    /// Level of `V2` above which `V2` is guaranteed to decrease.
    pub decrease_level: f64,
    pub conditions: Vec<Condition>,
}

impl AttitudeCertificate {
    pub fn is_satisfied(&self) -> bool {
        self.conditions.iter().all(|c| c.satisfied)
    }
}

fn rows(m: &Mat2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

pub fn certify_attitude(g: &Gains, p: &QuadrotorParams) -> Result<AttitudeCertificate> {
    g.validate()?;
    p.validate()?;
    let (lm, lmax) = p.inertia_eigenvalues();
    let m21 = m21(g, lm);
    let m22 = m22(g, g.psi2, lmax);
    let w2 = w2(g, lm, lmax);
    let c2_max = c2_bound(g, lm, lmax);
    let (lm21, lm_w2, lmax22) = (lambda_min(&m21), lambda_min(&w2), lambda_max(&m22));
    let eps_r_max = lm21 * lm_w2 * g.psi2 * (2.0 - g.psi2) / lmax22;
    let ultimate_bound = lmax22 * g.eps_r / (lm21 * lm_w2);
    Ok(AttitudeCertificate {
        m21: rows(&m21),
        m22: rows(&m22),
        w2: rows(&w2),
        c2_max,
        eps_r_max,
        ultimate_bound,
        decrease_level: lmax22 * g.eps_r / lm_w2,
        conditions: vec![
            Condition::less_than("c2 < c2_max", g.c2, c2_max),
            Condition::less_than("eps_R < eps_R_max", g.eps_r, eps_r_max),
        ],
    })
}

/// Certificate for the position flight mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionCertificate {
    pub alpha: f64,
    pub m11: [[f64; 2]; 2],
    pub m12: [[f64; 2]; 2],
    pub m21: [[f64; 2]; 2],
    pub m22_prime: [[f64; 2]; 2],
    pub w1: [[f64; 2]; 2],
    pub w12: [[f64; 2]; 2],
    pub w2: [[f64; 2]; 2],
    pub w: [[f64; 2]; 2],
    pub c1_max: f64,
    pub c2_max: f64,
    pub eps_sum_max: f64,
    /// Bound on `|e_x|^2 + |e_v|^2 + |e_R|^2 + |e_Omega|^2`.
    pub ultimate_bound: f64,
    /// Level of `V` above which `V` is guaranteed to decrease; infinite when
    /// `W` is not positive definite.
    pub decrease_level: f64,
    pub conditions: Vec<Condition>,
}

impl PositionCertificate {
    pub fn is_satisfied(&self) -> bool {
        self.conditions.iter().all(|c| c.satisfied)
    }
}

/// The eight matrices of the position-mode certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionMatrices {
    pub alpha: f64,
    pub m11: Mat2,
    pub m12: Mat2,
    pub m21: Mat2,
    pub m22_prime: Mat2,
    pub w1: Mat2,
    pub w12: Mat2,
    pub w2: Mat2,
    pub w: Mat2,
}

pub fn position_matrices(g: &Gains, p: &QuadrotorParams) -> PositionMatrices {
    let (lm, lmax) = p.inertia_eigenvalues();
    let m = p.mass;
    let alpha = (g.psi1 * (2.0 - g.psi1)).sqrt();
    let m11 = 0.5 * Mat2::new(g.kx, -g.c1, -g.c1, m);
    let m12 = 0.5 * Mat2::new(g.kx, g.c1, g.c1, m);
    let w1_off = -g.c1 * g.kv / (2.0 * m) * (1.0 + alpha);
    let w1 = Mat2::new(
        g.c1 * g.kx / m * (1.0 - alpha),
        w1_off,
        w1_off,
        g.kv * (1.0 - alpha) - g.c1,
    );
    let b = g.accel_bound + p.delta_x;
    let w12 = Mat2::new(g.c1 / m * b, 0.0, b + g.kx * g.ex_max, 0.0);
    let w2 = w2(g, lm, lmax);
    let half_norm = -0.5 * spectral_norm(&w12);
    let w = Mat2::new(lambda_min(&w1), half_norm, half_norm, lambda_min(&w2));
    PositionMatrices {
        alpha,
        m11,
        m12,
        m21: m21(g, lm),
        m22_prime: m22(g, g.psi1, lmax),
        w1,
        w12,
        w2,
        w,
    }
}

pub fn certify_position(g: &Gains, p: &QuadrotorParams) -> Result<PositionCertificate> {
    g.validate()?;
    p.validate()?;
    let (lm, lmax) = p.inertia_eigenvalues();
    let mats = position_matrices(g, p);
    let PositionMatrices {
        alpha,
        m11,
        m12,
        m21,
        m22_prime,
        w1,
        w12,
        w2,
        w,
    } = mats;
    let m = p.mass;
    let (kx, kv) = (g.kx, g.kv);
    let c1_max = (kv * (1.0 - alpha))
        .min(
            4.0 * m * kx * kv * (1.0 - alpha).powi(2)
                / (kv * kv * (1.0 + alpha).powi(2) + 4.0 * m * kx * (1.0 - alpha)),
        )
        .min((kx * m).sqrt());
    let c2_max = c2_bound(g, lm, lmax);

    let lm_w1 = lambda_min(&w1);
    let lm_w2 = lambda_min(&w2);
    let w12_norm = spectral_norm(&w12);
    let lower = lambda_min(&m11).min(lambda_min(&m21));
    let upper = lambda_max(&m12).max(lambda_max(&m22_prime));
    let lm_w = lambda_min(&w);
    let domain = (g.ex_max * g.ex_max).min(g.psi1 * (2.0 - g.psi1));
    let eps_sum_max = lower * domain / upper * lm_w;
    let eps_sum = g.eps_x + g.eps_r;
    let ultimate_bound = upper / (lower * lm_w) * eps_sum;
    let decrease_level = if lm_w > 0.0 {
        upper * eps_sum / lm_w
    } else {
        f64::INFINITY
    };

    Ok(PositionCertificate {
        alpha,
        m11: rows(&m11),
        m12: rows(&m12),
        m21: rows(&m21),
        m22_prime: rows(&m22_prime),
        w1: rows(&w1),
        w12: rows(&w12),
        w2: rows(&w2),
        w: rows(&w),
        c1_max,
        c2_max,
        eps_sum_max,
        ultimate_bound,
        decrease_level,
        conditions: vec![
            Condition::less_than("c1 < c1_max", g.c1, c1_max),
            Condition::less_than("c2 < c2_max", g.c2, c2_max),
            Condition::less_than(
                "|W12|^2 / (4 lambda_m(W1)) < lambda_m(W2)",
                // The condition presumes W1 positive definite.
                if lm_w1 > 0.0 {
                    w12_norm * w12_norm / (4.0 * lm_w1)
                } else {
                    f64::INFINITY
                },
                lm_w2,
            ),
            Condition::less_than("eps_x + eps_R < eps_sum_max", eps_sum, eps_sum_max),
        ],
    })
}

/// Extra condition on `eps_R` for starting with `1 <= Psi(0) < psi2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargeAngleCertificate {
    pub eps_r_max: f64,
    pub condition: Condition,
}

impl LargeAngleCertificate {
    pub fn is_satisfied(&self) -> bool {
        self.condition.satisfied
    }
}

pub fn certify_large_angle(g: &Gains, p: &QuadrotorParams) -> Result<LargeAngleCertificate> {
    if !(g.psi1 < 1.0 && 1.0 <= g.psi2 && g.psi2 < 2.0) {
        return Err(Error::PsiOrdering {
            psi1: g.psi1,
            psi2: g.psi2,
        });
    }
    g.validate()?;
    p.validate()?;
    let (lm, lmax) = p.inertia_eigenvalues();
    let m21 = m21(g, lm);
    let m22 = m22(g, g.psi2, lmax);
    let w2 = w2(g, lm, lmax);
    let eps_r_max =
        lambda_min(&m21) * lambda_min(&w2) * g.psi1 * (2.0 - g.psi1) / lambda_max(&m22);
    Ok(LargeAngleCertificate {
        eps_r_max,
        condition: Condition::less_than("eps_R < eps_R_max(psi1)", g.eps_r, eps_r_max),
    })
}
