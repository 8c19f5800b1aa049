//! Fixed-step closed-loop simulation, reference trajectories and Lyapunov monitors.

use std::f64::consts::PI;

use crate::control::{
    attitude_control, AttitudeCommand, AttitudeDiagnostics, Gains, PositionCommand,
    PositionController,
};
use crate::error::{Error, Result};
use crate::geometry::{attitude_error_function, exp_so3, project_to_rotation, Mat3, Rotation, Vec3};
use crate::model::{
    allocate_rotors, derivative_raw, wrench_from_rotors, DisturbanceModel, QuadrotorParams,
    RigidBodyState, RotorThrusts, StateDerivative, Wrench,
};

/// Magnitude beyond which a state component counts as a numerical blow-up.
pub const BLOWUP_LIMIT: f64 = 1e6;

/// A smooth position command with analytic first and second derivatives.
pub trait TrajectoryCommand {
    fn sample(&self, t: f64) -> PositionCommand;

    /// Upper bound on `|x_d''|` over the horizon, used to size `B`.
    fn max_acceleration(&self, duration: f64) -> f64;
}

/// `x_d(t) = [v t, a sin(w t), -b cos(w t)]` with fixed heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticHelix {
    pub forward_speed: f64,
    pub lateral_amplitude: f64,
    pub vertical_amplitude: f64,
    pub frequency: f64,
    pub heading: Vec3,
}

impl EllipticHelix {
    /// `x_d = [0.4 t, 0.4 sin(pi t), -0.6 cos(pi t)]`, `b1d = e1`.
    pub fn reference() -> Self {
        EllipticHelix {
            forward_speed: 0.4,
            lateral_amplitude: 0.4,
            vertical_amplitude: 0.6,
            frequency: PI,
            heading: Vec3::x(),
        }
    }
}

impl TrajectoryCommand for EllipticHelix {
    fn sample(&self, t: f64) -> PositionCommand {
        let (a, b, w) = (self.lateral_amplitude, self.vertical_amplitude, self.frequency);
        let (s, c) = (w * t).sin_cos();
        PositionCommand {
            position: Vec3::new(self.forward_speed * t, a * s, -b * c),
            velocity: Vec3::new(self.forward_speed, a * w * c, b * w * s),
            acceleration: Vec3::new(0.0, -a * w * w * s, b * w * w * c),
            heading: self.heading,
        }
    }

    fn max_acceleration(&self, _duration: f64) -> f64 {
        let w2 = self.frequency * self.frequency;
        self.lateral_amplitude.abs().max(self.vertical_amplitude.abs()) * w2
    }
}

/// Hold a fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hover {
    pub position: Vec3,
    pub heading: Vec3,
}

impl Default for Hover {
    fn default() -> Self {
        Hover {
            position: Vec3::zeros(),
            heading: Vec3::x(),
        }
    }
}

impl TrajectoryCommand for Hover {
    fn sample(&self, _t: f64) -> PositionCommand {
        PositionCommand {
            position: self.position,
            velocity: Vec3::zeros(),
            acceleration: Vec3::zeros(),
            heading: self.heading,
        }
    }

    fn max_acceleration(&self, _duration: f64) -> f64 {
        0.0
    }
}

/// Per-axis polynomial `x_d,i(t) = sum_k c_ik t^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coefficients: [Vec<f64>; 3],
    pub heading: Vec3,
}

fn poly_eval(c: &[f64], t: f64, derivative: u32) -> f64 {
    c.iter()
        .enumerate()
        .skip(derivative as usize)
        .rev()
        .fold(0.0, |acc, (k, &ck)| {
            let factor: f64 = (0..derivative).map(|j| (k - j as usize) as f64).product();
            acc * t + factor * ck
        })
}

impl TrajectoryCommand for Polynomial {
    fn sample(&self, t: f64) -> PositionCommand {
        let at = |d| Vec3::from_fn(|i, _| poly_eval(&self.coefficients[i], t, d));
        PositionCommand {
            position: at(0),
            velocity: at(1),
            acceleration: at(2),
            heading: self.heading,
        }
    }

    fn max_acceleration(&self, duration: f64) -> f64 {
        // Dense sampling; polynomials of modest degree are smooth on the horizon.
        let n = 2000;
        (0..=n)
            .map(|k| self.sample(duration * k as f64 / n as f64).acceleration.norm())
            .fold(0.0, f64::max)
    }
}

/// `R_d(t) = R_0 exp(t hat(omega))` with constant body rate `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeTrajectory {
    pub initial: Rotation,
    pub rate: Vec3,
}

impl AttitudeTrajectory {
    pub fn sample(&self, t: f64) -> AttitudeCommand {
        AttitudeCommand {
            attitude: self.initial * exp_so3(&(self.rate * t)),
            angular_velocity: self.rate,
            angular_acceleration: Vec3::zeros(),
        }
    }
}

/// Command source of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Helix(EllipticHelix),
    Hover(Hover),
    Polynomial(Polynomial),
    Attitude(AttitudeTrajectory),
}

impl Trajectory {
    pub fn position(&self) -> Option<&dyn TrajectoryCommand> {
        match self {
            Trajectory::Helix(h) => Some(h),
            Trajectory::Hover(h) => Some(h),
            Trajectory::Polynomial(p) => Some(p),
            Trajectory::Attitude(_) => None,
        }
    }
}

pub fn elliptic_helix(t: f64) -> PositionCommand {
    EllipticHelix::reference().sample(t)
}

pub fn hover_command(_t: f64) -> PositionCommand {
    Hover::default().sample(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlightMode {
    Attitude,
    Position,
    /// Attitude tracking of `R_c` until `Psi < psi1`, then position mode.
    PositionLargeAngle,
}

impl FlightMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlightMode::Attitude => "attitude",
            FlightMode::Position => "position",
            FlightMode::PositionLargeAngle => "position-large-angle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: QuadrotorParams,
    pub gains: Gains,
    pub initial: RigidBodyState,
    pub trajectory: Trajectory,
    pub disturbance: DisturbanceModel,
    pub duration: f64,
    pub dt: f64,
    pub mode: FlightMode,
    pub robust: bool,
    /// Optional `[min, max]` rotor thrust saturation (N); off by default.
    pub rotor_limits: Option<[f64; 2]>,
}

/// `B = 1.1 m (g + sup |x_d''|)`, an upper bound on `|-m g e3 + m x_d''|` with margin.
pub fn default_accel_bound(p: &QuadrotorParams, max_accel: f64) -> f64 {
    1.1 * p.mass * (p.gravity + max_accel)
}

impl Scenario {
    /// Elliptic-helix tracking from `x(0) = [0.1, 0, 0]`, `R(0) = I`.
    pub fn case1() -> Self {
        let params = QuadrotorParams::reference();
        let helix = EllipticHelix::reference();
        let mut gains = Gains::reference();
        gains.accel_bound = default_accel_bound(&params, helix.max_acceleration(10.0));
        Scenario {
            name: "case1".into(),
            params,
            gains,
            initial: RigidBodyState {
                position: Vec3::new(0.1, 0.0, 0.0),
                ..Default::default()
            },
            trajectory: Trajectory::Helix(helix),
            disturbance: DisturbanceModel::reference(),
            duration: 10.0,
            dt: 1e-3,
            mode: FlightMode::Position,
            robust: true,
            rotor_limits: None,
        }
    }

    /// Recovery to hover from `R(0) = exp(0.99 pi hat(e1))`.
    pub fn case2() -> Self {
        let params = QuadrotorParams::reference();
        let mut gains = Gains::reference();
        gains.accel_bound = default_accel_bound(&params, 0.0);
        Scenario {
            name: "case2".into(),
            params,
            gains,
            initial: RigidBodyState {
                position: Vec3::new(0.1, 0.0, 0.0),
                attitude: exp_so3(&Vec3::new(0.99 * PI, 0.0, 0.0)),
                ..Default::default()
            },
            trajectory: Trajectory::Hover(Hover::default()),
            disturbance: DisturbanceModel::reference(),
            duration: 10.0,
            dt: 1e-3,
            mode: FlightMode::PositionLargeAngle,
            robust: true,
            rotor_limits: None,
        }
    }

    /// Attitude-only tracking of a slowly rotating command.
    pub fn attitude_demo() -> Self {
        let params = QuadrotorParams::reference();
        let mut gains = Gains::reference();
        gains.psi2 = 1.0;
        gains.accel_bound = default_accel_bound(&params, 0.0);
        Scenario {
            name: "attitude".into(),
            params,
            gains,
            initial: RigidBodyState::default(),
            trajectory: Trajectory::Attitude(AttitudeTrajectory {
                initial: exp_so3(&Vec3::new(0.0, 0.5, 0.0)),
                rate: Vec3::new(0.0, 0.0, 0.5),
            }),
            disturbance: DisturbanceModel::reference(),
            duration: 10.0,
            dt: 1e-3,
            mode: FlightMode::Attitude,
            robust: true,
            rotor_limits: None,
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.gains.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidScenario("dt must be positive".into()));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return Err(Error::InvalidScenario("duration must be at least dt".into()));
        }
        match (self.mode, &self.trajectory) {
            (FlightMode::Attitude, Trajectory::Attitude(_)) => {}
            (FlightMode::Attitude, _) => {
                return Err(Error::InvalidScenario(
                    "attitude mode needs an attitude trajectory".into(),
                ))
            }
            (_, Trajectory::Attitude(_)) => {
                return Err(Error::InvalidScenario(
                    "position modes need a position trajectory".into(),
                ))
            }
            _ => {}
        }
        if let Some([lo, hi]) = self.rotor_limits {
            if !(lo < hi) {
                return Err(Error::InvalidScenario("rotor limits must satisfy min < max".into()));
            }
        }
        Ok(())
    }
}

fn check_finite(state: &RigidBodyState) -> Result<()> {
    let ok = state
        .position
        .iter()
        .chain(state.velocity.iter())
        .chain(state.angular_velocity.iter())
        .chain(state.attitude.matrix().iter())
        .all(|x| x.is_finite() && x.abs() <= BLOWUP_LIMIT);
    if ok {
        Ok(())
    } else {
        Err(Error::NumericalBlowup {
            limit: BLOWUP_LIMIT,
        })
    }
}

/// One classical Runge-Kutta step of the equations of motion from time `t`.
///
/// The wrench is held over the step; the disturbance is sampled at the stage
/// times. The attitude is integrated as a 3x3 matrix and projected back onto
/// SO(3) at the end of the step.
pub fn step(
    state: &RigidBodyState,
    wrench: &Wrench,
    dist: &DisturbanceModel,
    p: &QuadrotorParams,
    t: f64,
    dt: f64,
) -> Result<RigidBodyState> {
    let jinv = p.inertia_inverse();
    let x0 = state.position;
    let v0 = state.velocity;
    let r0 = *state.attitude.matrix();
    let w0 = state.angular_velocity;
    let f = |ts: f64, v: &Vec3, r: &Mat3, w: &Vec3| -> StateDerivative {
        derivative_raw(r, v, w, wrench, &dist.sample(ts), p, &jinv)
    };
    let k1 = f(t, &v0, &r0, &w0);
    let h = 0.5 * dt;
    let k2 = f(
        t + h,
        &(v0 + h * k1.velocity),
        &(r0 + h * k1.attitude),
        &(w0 + h * k1.angular_velocity),
    );
    let k3 = f(
        t + h,
        &(v0 + h * k2.velocity),
        &(r0 + h * k2.attitude),
        &(w0 + h * k2.angular_velocity),
    );
    let k4 = f(
        t + dt,
        &(v0 + dt * k3.velocity),
        &(r0 + dt * k3.attitude),
        &(w0 + dt * k3.angular_velocity),
    );
    let s = dt / 6.0;
    let position = x0 + s * (k1.position + 2.0 * k2.position + 2.0 * k3.position + k4.position);
    let velocity = v0 + s * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity);
    let r = r0 + s * (k1.attitude + 2.0 * k2.attitude + 2.0 * k3.attitude + k4.attitude);
    let angular_velocity = w0
        + s * (k1.angular_velocity
            + 2.0 * k2.angular_velocity
            + 2.0 * k3.angular_velocity
            + k4.angular_velocity);
    if !r.iter().all(|x| x.is_finite() && x.abs() <= BLOWUP_LIMIT) {
        return Err(Error::NumericalBlowup {
            limit: BLOWUP_LIMIT,
        });
    }
    let next = RigidBodyState {
        position,
        velocity,
        attitude: project_to_rotation(&r)?,
        angular_velocity,
    };
    check_finite(&next)?;
    Ok(next)
}

/// Values of the Lyapunov candidates at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Monitors {
    pub psi: f64,
    pub v1: f64,
    pub v2: f64,
    pub v: f64,
    pub v3: f64,
}

/// Tracking errors at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackingErrors {
    pub e_x: Vec3,
    pub e_v: Vec3,
    pub e_r: Vec3,
    pub e_omega: Vec3,
    pub psi: f64,
}

/// `V1 = 1/2 k_x |e_x|^2 + 1/2 m |e_v|^2 + c1 e_x.e_v`,
/// `V2 = 1/2 e_Omega.J e_Omega + k_R Psi + c2 e_R.e_Omega`, `V = V1 + V2`,
/// `V3 = 1/2 |e_x|^2 + 1/2 m |e_v|^2`.
pub fn lyapunov_monitors(e: &TrackingErrors, g: &Gains, p: &QuadrotorParams) -> Monitors {
    let m = p.mass;
    let v1 = 0.5 * g.kx * e.e_x.norm_squared() + 0.5 * m * e.e_v.norm_squared() + g.c1 * e.e_x.dot(&e.e_v);
    let v2 = 0.5 * e.e_omega.dot(&(p.inertia * e.e_omega)) + g.k_r * e.psi + g.c2 * e.e_r.dot(&e.e_omega);
    let v3 = 0.5 * e.e_x.norm_squared() + 0.5 * m * e.e_v.norm_squared();
    Monitors {
        psi: e.psi,
        v1,
        v2,
        v: v1 + v2,
        v3,
    }
}

/// One row of a [`TrajectoryLog`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub state: RigidBodyState,
    pub wrench: Wrench,
    pub rotors: RotorThrusts,
    pub errors: TrackingErrors,
    pub monitors: Monitors,
    /// Desired (attitude mode) or computed (position modes) attitude.
    pub reference_attitude: Rotation,
    pub disturbance_force_norm: f64,
    pub disturbance_torque_norm: f64,
    /// Whether the position-mode phase is active.
    pub position_phase: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub scenario: String,
    pub mode: FlightMode,
    pub dt: f64,
    pub records: Vec<LogRecord>,
    /// Time of the switch from attitude tracking to position mode, if one happened.
    pub switch_time: Option<f64>,
}

impl TrajectoryLog {
    pub fn last(&self) -> &LogRecord {
        self.records.last().expect("a run logs at least one record")
    }

    pub fn terminal_position_error(&self) -> f64 {
        self.last().errors.e_x.norm()
    }

    /// `sqrt(|e_R|^2 + |e_Omega|^2)` at the final time.
    pub fn terminal_attitude_error(&self) -> f64 {
        let e = &self.last().errors;
        (e.e_r.norm_squared() + e.e_omega.norm_squared()).sqrt()
    }

    pub fn initial_psi(&self) -> f64 {
        self.records[0].errors.psi
    }

    pub fn max_psi(&self) -> f64 {
        self.records.iter().map(|r| r.errors.psi).fold(0.0, f64::max)
    }

    pub fn max_orthogonality_error(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.state.attitude.orthogonality_error())
            .fold(0.0, f64::max)
    }
}

fn rotors_for(wrench: Wrench, sc: &Scenario) -> Result<(Wrench, RotorThrusts)> {
    let rotors = allocate_rotors(&wrench, &sc.params)?;
    Ok(match sc.rotor_limits {
        Some([lo, hi]) => {
            let clamped = rotors.clamp(lo, hi);
            (wrench_from_rotors(&clamped, &sc.params), clamped)
        }
        None => (wrench, rotors),
    })
}

/// Closed-loop simulation of a scenario.
///
/// The controller is evaluated once per integration step and its wrench is
/// held over the step. The log has `steps + 1` records including both end points.
pub fn run(sc: &Scenario) -> Result<TrajectoryLog> {
    sc.validate()?;
    let ctl_params = if sc.robust {
        sc.params.clone()
    } else {
        sc.params.without_disturbance_bounds()
    };
    let n = sc.steps();
    let mut records = Vec::with_capacity(n + 1);
    let mut state = sc.initial;
    let mut switch_time = None;
    let mut position_phase = sc.mode == FlightMode::Position;
    let mut controller = PositionController::new(sc.gains.clone(), ctl_params.clone(), sc.dt);

    for k in 0..=n {
        let t = k as f64 * sc.dt;
        let (wrench, errors, reference) = match &sc.trajectory {
            Trajectory::Attitude(traj) => {
                let cmd = traj.sample(t);
                let (moment, d) = attitude_control(&state, &cmd, &sc.gains, &ctl_params);
                let wrench = Wrench {
                    thrust: sc.params.mass * sc.params.gravity,
                    moment,
                };
                (wrench, attitude_errors(&d), cmd.attitude)
            }
            other => {
                let cmd = other
                    .position()
                    .expect("validated position trajectory")
                    .sample(t);
                let out = controller.update(&state, &cmd).map_err(|e| e.at(t))?;
                let d = &out.diagnostics;
                if k == 0 && sc.mode == FlightMode::Position && d.attitude.psi >= 1.0 {
                    return Err(Error::InitialAttitudeError {
                        psi: d.attitude.psi,
                        limit: 1.0,
                    });
                }
                if !position_phase && d.attitude.psi < sc.gains.psi1 {
                    position_phase = true;
                    switch_time = Some(t);
                }
                let errors = TrackingErrors {
                    e_x: d.e_x,
                    e_v: d.e_v,
                    ..attitude_errors(&d.attitude)
                };
                (out.wrench, errors, out.computed.attitude)
            }
        };
        let (wrench, rotors) = rotors_for(wrench, sc).map_err(|e| e.at(t))?;
        let dist = sc.disturbance.sample(t);
        records.push(LogRecord {
            t,
            state,
            wrench,
            rotors,
            errors,
            monitors: lyapunov_monitors(&errors, &sc.gains, &sc.params),
            reference_attitude: reference,
            disturbance_force_norm: dist.force.norm(),
            disturbance_torque_norm: dist.torque.norm(),
            position_phase,
        });
        if k < n {
            state = step(&state, &wrench, &sc.disturbance, &sc.params, t, sc.dt)
                .map_err(|e| e.at(t))?;
        }
    }
    Ok(TrajectoryLog {
        scenario: sc.name.clone(),
        mode: sc.mode,
        dt: sc.dt,
        records,
        switch_time,
    })
}

fn attitude_errors(d: &AttitudeDiagnostics) -> TrackingErrors {
    TrackingErrors {
        e_x: Vec3::zeros(),
        e_v: Vec3::zeros(),
        e_r: d.e_r,
        e_omega: d.e_omega,
        psi: d.psi,
    }
}

/// `Psi(R, R_c)` of the position controller's first evaluation.
pub fn initial_attitude_error(sc: &Scenario) -> Result<f64> {
    sc.validate()?;
    let ctl_params = if sc.robust {
        sc.params.clone()
    } else {
        sc.params.without_disturbance_bounds()
    };
    match &sc.trajectory {
        Trajectory::Attitude(traj) => Ok(attitude_error_function(
            &sc.initial.attitude,
            &traj.sample(0.0).attitude,
        )),
        other => {
            let cmd = other.position().expect("position trajectory").sample(0.0);
            let mut ctl = PositionController::new(sc.gains.clone(), ctl_params, sc.dt);
            Ok(ctl.update(&sc.initial, &cmd)?.diagnostics.attitude.psi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::exp_so3;
    use approx::assert_relative_eq;

    #[test]
    fn helix_samples() {
        let c = elliptic_helix(0.0);
        assert_relative_eq!(c.position, Vec3::new(0.0, 0.0, -0.6), epsilon = 1e-15);
        let c = elliptic_helix(1.0);
        assert_relative_eq!(c.position, Vec3::new(0.4, 0.0, 0.6), epsilon = 1e-15);
        assert_relative_eq!(c.acceleration, Vec3::new(0.0, 0.0, -0.6 * PI * PI), epsilon = 1e-12);
        assert_eq!(c.heading, Vec3::x());
        let bound = EllipticHelix::reference().max_acceleration(10.0);
        assert_relative_eq!(bound, 5.9218, epsilon = 1e-4);
        for k in 0..1000 {
            assert!(elliptic_helix(k as f64 * 0.01).acceleration.norm() <= bound + 1e-12);
        }
    }

    #[test]
    fn helix_derivatives_match_finite_differences() {
        let h = 1e-5;
        for t in [0.3, 1.7, 4.2] {
            let (a, b, c) = (elliptic_helix(t - h), elliptic_helix(t), elliptic_helix(t + h));
            assert_relative_eq!((c.position - a.position) / (2.0 * h), b.velocity, epsilon = 1e-8);
            assert_relative_eq!((c.velocity - a.velocity) / (2.0 * h), b.acceleration, epsilon = 1e-7);
        }
    }

    #[test]
    fn hover_samples() {
        for t in [0.0, 3.0, 100.0] {
            let c = hover_command(t);
            assert_eq!(c.position, Vec3::zeros());
            assert_eq!(c.acceleration, Vec3::zeros());
            assert_eq!(c.heading, Vec3::x());
        }
        let p = QuadrotorParams::reference();
        assert_eq!(default_accel_bound(&p, 0.0), 1.1 * p.mass * p.gravity);
    }

    #[test]
    fn polynomial_derivatives() {
        let poly = Polynomial {
            coefficients: [vec![1.0, 2.0, 3.0], vec![0.0, 0.0, 0.0, 1.0], vec![]],
            heading: Vec3::x(),
        };
        let c = poly.sample(2.0);
        assert_eq!(c.position, Vec3::new(1.0 + 4.0 + 12.0, 8.0, 0.0));
        assert_eq!(c.velocity, Vec3::new(2.0 + 12.0, 12.0, 0.0));
        assert_eq!(c.acceleration, Vec3::new(6.0, 12.0, 0.0));
    }

    #[test]
    fn step_keeps_rest_state_without_gravity() {
        let mut p = QuadrotorParams::reference();
        p.gravity = 0.0;
        let s = RigidBodyState::default();
        let next = step(&s, &Wrench::default(), &DisturbanceModel::none(), &p, 0.0, 1e-3).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn ballistic_flight_is_exact() {
        let p = QuadrotorParams::reference();
        let mut s = RigidBodyState {
            position: Vec3::new(1.0, -2.0, 0.5),
            ..Default::default()
        };
        for k in 0..1000 {
            s = step(&s, &Wrench::default(), &DisturbanceModel::none(), &p, k as f64 * 1e-3, 1e-3).unwrap();
        }
        let expected = Vec3::new(1.0, -2.0, 0.5 + 0.5 * p.gravity);
        assert!((s.position - expected).norm() < 1e-9);
    }

    #[test]
    fn free_rotation_matches_exponential() {
        let mut p = QuadrotorParams::reference();
        p.inertia = Mat3::identity();
        let mut s = RigidBodyState {
            angular_velocity: Vec3::z(),
            ..Default::default()
        };
        for k in 0..1000 {
            s = step(&s, &Wrench::default(), &DisturbanceModel::none(), &p, k as f64 * 1e-3, 1e-3).unwrap();
        }
        let exact = exp_so3(&Vec3::z());
        assert!((s.attitude.matrix() - exact.matrix()).norm() < 1e-6);
    }

    #[test]
    fn monitors_examples() {
        let g = Gains::reference();
        let p = QuadrotorParams::reference();
        let m = lyapunov_monitors(&TrackingErrors::default(), &g, &p);
        assert_eq!(m, Monitors::default());
        let e = TrackingErrors {
            e_omega: Vec3::x(),
            ..Default::default()
        };
        let m = lyapunov_monitors(&e, &g, &p);
        assert_relative_eq!(m.v2, 0.041, epsilon = 1e-15);
        assert_eq!(m.v1, 0.0);
        assert_eq!(m.v3, 0.0);
    }

    #[test]
    fn mode_trajectory_mismatch_is_rejected() {
        let mut sc = Scenario::case1();
        sc.mode = FlightMode::Attitude;
        assert!(matches!(run(&sc), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn position_mode_rejects_large_initial_error() {
        let mut sc = Scenario::case2();
        sc.mode = FlightMode::Position;
        sc.duration = 0.01;
        assert!(matches!(run(&sc), Err(Error::InitialAttitudeError { .. })));
    }
}
