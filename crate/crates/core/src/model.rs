//! Quadrotor rigid-body model, rotor allocation and disturbance signals.
//!
//! Frame convention: the inertial third axis `e3` points *down*, so gravity
//! enters the translational dynamics as `+m g e3` and a positive collective
//! thrust `f` acts along `-b3`:
//!
//! ```text
//! x' = v
//! m v' = m g e3 - f R e3 + Delta_x
//! R' = R hat(Omega)
//! J Omega' + Omega x J Omega = M + Delta_R
//! ```

use nalgebra::{Matrix4, Vector4};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{hat, Mat3, Rotation, Vec3};

/// Standard gravity used by the shipped scenarios.
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Physical constants of the vehicle and the assumed disturbance bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrotorParams {
    /// Mass (kg).
    pub mass: f64,
    /// Inertia about the body axes (kg m^2).
    pub inertia: Mat3,
    /// Distance from the centre of mass to each rotor (m).
    pub arm_length: f64,
    /// Reaction torque per unit thrust (m).
    pub torque_coefficient: f64,
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
    /// Bound on `|Delta_x|` (N).
    pub delta_x: f64,
    /// Bound on `|Delta_R|` (N m).
    pub delta_r: f64,
}

impl QuadrotorParams {
    /// Vehicle used in the reference numerical study, with `g = 9.81`.
    pub fn reference() -> Self {
        QuadrotorParams {
            mass: 4.34,
            inertia: Mat3::from_diagonal(&Vec3::new(0.0820, 0.0845, 0.1377)),
            arm_length: 0.315,
            torque_coefficient: 8.004e-3,
            gravity: STANDARD_GRAVITY,
            delta_x: 4.34,
            delta_r: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name, reason| if ok { Ok(()) } else { Err(Error::InvalidParams { name, reason }) };
        check(self.mass.is_finite() && self.mass > 0.0, "m", "must be positive")?;
        check(self.gravity.is_finite() && self.gravity > 0.0, "g", "must be positive")?;
        check(self.arm_length.is_finite() && self.arm_length != 0.0, "d", "must be nonzero")?;
        check(
            self.torque_coefficient.is_finite() && self.torque_coefficient != 0.0,
            "c_tau_f",
            "must be nonzero",
        )?;
        check(self.delta_x.is_finite() && self.delta_x >= 0.0, "delta_x", "must be non-negative")?;
        check(self.delta_r.is_finite() && self.delta_r >= 0.0, "delta_R", "must be non-negative")?;
        let j = &self.inertia;
        check(
            (j - j.transpose()).norm() <= 1e-12 * j.norm(),
            "J",
            "must be symmetric",
        )?;
        check(
            (0..3).all(|i| j[(i, i)] > 0.0) && self.inertia_eigenvalues().0 > 0.0,
            "J",
            "must be positive definite",
        )?;
        Ok(())
    }

    /// `(lambda_min(J), lambda_max(J))`.
    pub fn inertia_eigenvalues(&self) -> (f64, f64) {
        let j = &self.inertia;
        let off_diagonal = j[(0, 1)].abs() + j[(0, 2)].abs() + j[(1, 2)].abs();
        if off_diagonal == 0.0 {
            let d = j.diagonal();
            return (d.min(), d.max());
        }
        let ev = j.symmetric_eigenvalues();
        (ev.min(), ev.max())
    }

    pub fn inertia_inverse(&self) -> Mat3 {
        self.inertia
            .try_inverse()
            .expect("inertia validated positive definite")
    }

    /// Copy of these parameters with both disturbance bounds zeroed. Feeding
    /// this to the controllers switches the robust terms off.
    pub fn without_disturbance_bounds(&self) -> Self {
        QuadrotorParams {
            delta_x: 0.0,
            delta_r: 0.0,
            ..self.clone()
        }
    }
}

/// Position, velocity, attitude and body angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Rotation,
    pub angular_velocity: Vec3,
}

impl Default for RigidBodyState {
    fn default() -> Self {
        RigidBodyState {
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
            attitude: Rotation::identity(),
            angular_velocity: Vec3::zeros(),
        }
    }
}

/// Collective thrust along `-b3` (N) and body moment (N m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub thrust: f64,
    pub moment: Vec3,
}

/// Per-rotor thrusts `f1..f4` (N).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotorThrusts(pub [f64; 4]);

impl RotorThrusts {
    pub fn clamp(&self, min: f64, max: f64) -> Self {
        RotorThrusts(self.0.map(|f| f.clamp(min, max)))
    }
}

/// Time derivative of a [`RigidBodyState`]; the attitude part is `R hat(Omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Mat3,
    pub angular_velocity: Vec3,
}

/// Instantaneous disturbance force (inertial, N) and torque (body, N m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Disturbance {
    pub force: Vec3,
    pub torque: Vec3,
}

/// Constant force plus the oscillatory torque
/// `a [sin(8 pi t), sin(pi t), cos(4 pi t)]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisturbanceModel {
    pub force: Vec3,
    pub torque_amplitude: f64,
}

impl DisturbanceModel {
    pub fn none() -> Self {
        Self::default()
    }

    /// The disturbances of the reference numerical study.
    pub fn reference() -> Self {
        DisturbanceModel {
            force: Vec3::new(2.50, 1.25, 2.00),
            torque_amplitude: 2.0 / 3f64.sqrt(),
        }
    }

    pub fn force_at(&self, _t: f64) -> Vec3 {
        self.force
    }

    pub fn torque_at(&self, t: f64) -> Vec3 {
        self.torque_amplitude
            * Vec3::new((8.0 * PI * t).sin(), (PI * t).sin(), (4.0 * PI * t).cos())
    }

    pub fn sample(&self, t: f64) -> Disturbance {
        Disturbance {
            force: self.force_at(t),
            torque: self.torque_at(t),
        }
    }

    /// `sup_t |Delta_x(t)|`.
    pub fn force_bound(&self) -> f64 {
        self.force.norm()
    }

    /// An upper bound on `sup_t |Delta_R(t)|` (each component is bounded by the amplitude).
    pub fn torque_bound(&self) -> f64 {
        self.torque_amplitude.abs() * 3f64.sqrt()
    }
}

pub(crate) fn derivative_raw(
    attitude: &Mat3,
    velocity: &Vec3,
    angular_velocity: &Vec3,
    wrench: &Wrench,
    dist: &Disturbance,
    p: &QuadrotorParams,
    inertia_inv: &Mat3,
) -> StateDerivative {
    let e3 = Vec3::z();
    let accel =
        p.gravity * e3 - (wrench.thrust / p.mass) * (attitude * e3) + dist.force / p.mass;
    let j_omega = p.inertia * angular_velocity;
    let omega_dot =
        inertia_inv * (wrench.moment - angular_velocity.cross(&j_omega) + dist.torque);
    StateDerivative {
        position: *velocity,
        velocity: accel,
        attitude: attitude * hat(angular_velocity),
        angular_velocity: omega_dot,
    }
}

/// Right-hand side of the equations of motion.
pub fn dynamics(
    state: &RigidBodyState,
    wrench: &Wrench,
    dist: &Disturbance,
    p: &QuadrotorParams,
) -> StateDerivative {
    derivative_raw(
        state.attitude.matrix(),
        &state.velocity,
        &state.angular_velocity,
        wrench,
        dist,
        p,
        &p.inertia_inverse(),
    )
}

/// The 4x4 map from rotor thrusts to `[f, M1, M2, M3]`.
pub fn allocation_matrix(p: &QuadrotorParams) -> Matrix4<f64> {
    let d = p.arm_length;
    let c = p.torque_coefficient;
    Matrix4::new(
        1.0, 1.0, 1.0, 1.0, //
        0.0, -d, 0.0, d, //
        d, 0.0, -d, 0.0, //
        -c, c, -c, c,
    )
}

pub fn wrench_from_rotors(r: &RotorThrusts, p: &QuadrotorParams) -> Wrench {
    let v = allocation_matrix(p) * Vector4::from(r.0);
    Wrench {
        thrust: v[0],
        moment: Vec3::new(v[1], v[2], v[3]),
    }
}

/// Inverts [`wrench_from_rotors`] in closed form.
pub fn allocate_rotors(w: &Wrench, p: &QuadrotorParams) -> Result<RotorThrusts> {
    let d = p.arm_length;
    let c = p.torque_coefficient;
    if d == 0.0 || c == 0.0 || !d.is_finite() || !c.is_finite() {
        return Err(Error::SingularAllocation {
            arm_length: d,
            torque_coefficient: c,
        });
    }
    let f4_minus_f2 = w.moment[0] / d;
    let f1_minus_f3 = w.moment[1] / d;
    let even_minus_odd = w.moment[2] / c;
    let odd = 0.5 * (w.thrust - even_minus_odd);
    let even = 0.5 * (w.thrust + even_minus_odd);
    Ok(RotorThrusts([
        0.5 * (odd + f1_minus_f3),
        0.5 * (even - f4_minus_f2),
        0.5 * (odd - f1_minus_f3),
        0.5 * (even + f4_minus_f2),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hover_is_an_equilibrium() {
        let p = QuadrotorParams::reference();
        let w = Wrench {
            thrust: p.mass * p.gravity,
            moment: Vec3::zeros(),
        };
        let d = dynamics(&RigidBodyState::default(), &w, &Disturbance::default(), &p);
        assert_eq!(d.position, Vec3::zeros());
        assert_relative_eq!(d.velocity, Vec3::zeros(), epsilon = 1e-15);
        assert_eq!(d.attitude, Mat3::zeros());
        assert_eq!(d.angular_velocity, Vec3::zeros());
    }

    #[test]
    fn free_fall() {
        let p = QuadrotorParams::reference();
        let d = dynamics(&RigidBodyState::default(), &Wrench::default(), &Disturbance::default(), &p);
        assert_eq!(d.velocity, Vec3::new(0.0, 0.0, p.gravity));
    }

    #[test]
    fn principal_axis_spin_has_no_gyroscopic_torque() {
        let p = QuadrotorParams::reference();
        let s = RigidBodyState {
            angular_velocity: Vec3::x(),
            ..Default::default()
        };
        let d = dynamics(&s, &Wrench::default(), &Disturbance::default(), &p);
        assert_eq!(d.angular_velocity, Vec3::zeros());
    }

    #[test]
    fn rotor_examples() {
        let p = QuadrotorParams::reference();
        let w = wrench_from_rotors(&RotorThrusts([1.0; 4]), &p);
        assert_eq!(w.thrust, 4.0);
        assert_eq!(w.moment, Vec3::zeros());

        let w = wrench_from_rotors(&RotorThrusts([1.0, 0.0, 0.0, 0.0]), &p);
        assert_eq!(w.thrust, 1.0);
        assert_relative_eq!(w.moment, Vec3::new(0.0, 0.315, -8.004e-3), epsilon = 1e-15);

        let w = wrench_from_rotors(&RotorThrusts([0.0, 1.0, 0.0, 1.0]), &p);
        assert_eq!(w.thrust, 2.0);
        assert_relative_eq!(w.moment, Vec3::new(0.0, 0.0, 1.6008e-2), epsilon = 1e-15);
    }

    #[test]
    fn allocation_examples() {
        let p = QuadrotorParams::reference();
        let r = allocate_rotors(
            &Wrench {
                thrust: 4.0,
                moment: Vec3::zeros(),
            },
            &p,
        )
        .unwrap();
        assert_eq!(r.0, [1.0; 4]);

        let hover = Wrench {
            thrust: p.mass * p.gravity,
            moment: Vec3::zeros(),
        };
        assert_relative_eq!(hover.thrust, 42.5754, epsilon = 1e-10);
        let r = allocate_rotors(&hover, &p).unwrap();
        for f in r.0 {
            assert_relative_eq!(f, 10.64385, epsilon = 1e-10);
        }
    }

    #[test]
    fn singular_allocation() {
        let mut p = QuadrotorParams::reference();
        p.arm_length = 0.0;
        assert!(matches!(
            allocate_rotors(&Wrench::default(), &p),
            Err(Error::SingularAllocation { .. })
        ));
        let mut p = QuadrotorParams::reference();
        p.torque_coefficient = 0.0;
        assert!(allocate_rotors(&Wrench::default(), &p).is_err());
    }

    #[test]
    fn reference_disturbances() {
        let d = DisturbanceModel::reference();
        assert_relative_eq!(d.force_bound(), 11.8125f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(d.force_bound(), 3.4369, epsilon = 1e-4);
        assert!(d.force_bound() <= 4.34);
        assert_relative_eq!(d.torque_bound(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(
            d.torque_at(0.0),
            Vec3::new(0.0, 0.0, 2.0 / 3f64.sqrt()),
            epsilon = 1e-15
        );
        for k in 0..=10_000 {
            let t = 10.0 * k as f64 / 10_000.0;
            let s = d.sample(t);
            assert!(s.force.norm() <= 4.34);
            assert!(s.torque.norm() <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn param_validation() {
        assert!(QuadrotorParams::reference().validate().is_ok());
        let mut p = QuadrotorParams::reference();
        p.mass = 0.0;
        assert!(p.validate().is_err());
        let mut p = QuadrotorParams::reference();
        p.inertia[(0, 0)] = -1.0;
        assert!(p.validate().is_err());
        let mut p = QuadrotorParams::reference();
        p.delta_r = -1.0;
        assert!(p.validate().is_err());
    }
}
