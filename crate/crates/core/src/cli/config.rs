//! Scenario files.
//!
//! A scenario is a TOML document mirroring [`Scenario`]. Angles may be
//! written symbolically (`"0.99pi"`, `"pi/2"`), and the initial attitude
//! either as nine row-major entries or as `{ axis_angle = [...] }`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::control::Gains;
use crate::error::Error;
use crate::geometry::{exp_so3, Mat3, Rotation, Vec3};
use crate::model::{DisturbanceModel, QuadrotorParams, RigidBodyState};
use crate::sim::{
    default_accel_bound, AttitudeTrajectory, EllipticHelix, FlightMode, Hover, Polynomial,
    Scenario, Trajectory,
};

/// Built-in scenario files, addressable by name on the command line.
pub const BUILTIN: &[(&str, &str)] = &[
    ("case1", include_str!("../../configs/case1.toml")),
    ("case2", include_str!("../../configs/case2.toml")),
    ("attitude", include_str!("../../configs/attitude.toml")),
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field(path: impl Into<String>, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Field {
        path: path.into(),
        message: message.to_string(),
    }
}

/// A number, or an expression `[coef][*]pi[/den]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalar(pub f64);

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Expr(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Scalar(x)),
            Raw::Int(i) => Ok(Scalar(i as f64)),
            Raw::Expr(s) => parse_scalar(&s).map(Scalar).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses `"0.99pi"`, `"-pi"`, `"pi/2"`, `"2*pi/3"` or a plain number.
pub fn parse_scalar(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse `{text}` as a number or multiple of pi");
    if let Ok(x) = s.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (s.as_str(), 1.0),
    };
    let coef = num.strip_suffix("pi").ok_or_else(bad)?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let coef = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coef * PI / den)
}

/// `true`/`false` or `"on"`/`"off"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Toggle(pub bool);

impl Serialize for Toggle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(if self.0 { "on" } else { "off" })
    }
}

impl<'de> Deserialize<'de> for Toggle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bool(bool),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Bool(b) => Ok(Toggle(b)),
            Raw::Text(t) => match t.as_str() {
                "on" => Ok(Toggle(true)),
                "off" => Ok(Toggle(false)),
                other => Err(serde::de::Error::custom(format!(
                    "expected `on` or `off`, got `{other}`"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RotationSpec {
    Matrix([f64; 9]),
    AxisAngle { axis_angle: [Scalar; 3] },
}

impl RotationSpec {
    fn to_rotation(&self, path: &str) -> Result<Rotation, ConfigError> {
        match self {
            RotationSpec::Matrix(m) => {
                Rotation::from_matrix(Mat3::from_row_slice(m)).map_err(|e| field(path, e))
            }
            RotationSpec::AxisAngle { axis_angle } => Ok(exp_so3(&Vec3::new(
                axis_angle[0].0,
                axis_angle[1].0,
                axis_angle[2].0,
            ))),
        }
    }

    fn from_rotation(r: &Rotation) -> Self {
        let m = r.matrix();
        let mut out = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j] = m[(i, j)];
            }
        }
        RotationSpec::Matrix(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeConfig {
    Attitude,
    Position,
    #[serde(alias = "position-with-large-angle")]
    PositionLargeAngle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    /// kg
    pub m: f64,
    /// kg m^2; three principal moments or nine row-major entries
    #[serde(rename = "J")]
    pub inertia: Vec<f64>,
    /// m
    pub d: f64,
    /// m
    pub c_tau_f: f64,
    /// m/s^2
    pub g: f64,
    /// N
    pub delta_x: f64,
    /// N m
    #[serde(rename = "delta_R")]
    pub delta_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub kx: f64,
    pub kv: f64,
    #[serde(rename = "kR")]
    pub k_r: f64,
    #[serde(rename = "kOmega")]
    pub k_omega: f64,
    pub c1: f64,
    pub c2: f64,
    pub eps_x: f64,
    #[serde(rename = "eps_R")]
    pub eps_r: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub psi1: f64,
    pub psi2: f64,
    /// m
    pub ex_max: f64,
    /// N; derived from the trajectory when omitted
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub accel_bound: Option<f64>,
}

fn default_tau() -> f64 {
    crate::control::DEFAULT_TAU
}

/// Names accepted by `sweep` and `--override gains.<name>`.
pub const GAIN_NAMES: &[&str] = &[
    "kx", "kv", "kR", "kOmega", "c1", "c2", "eps_x", "eps_R", "tau", "psi1", "psi2", "ex_max", "B",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub x: [f64; 3],
    pub v: [f64; 3],
    #[serde(rename = "R")]
    pub attitude: RotationSpec,
    #[serde(rename = "Omega")]
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    Helix {
        #[serde(default = "helix_speed")]
        forward_speed: f64,
        #[serde(default = "helix_lateral")]
        lateral_amplitude: f64,
        #[serde(default = "helix_vertical")]
        vertical_amplitude: f64,
        #[serde(default = "helix_frequency")]
        frequency: Scalar,
        b1d: [f64; 3],
    },
    Hover {
        #[serde(default)]
        x_d: [f64; 3],
        b1d: [f64; 3],
    },
    CustomPolynomial {
        x: Vec<f64>,
        y: Vec<f64>,
        z: Vec<f64>,
        b1d: [f64; 3],
    },
    Attitude {
        #[serde(rename = "R0")]
        initial: RotationSpec,
        rate: [f64; 3],
    },
}

fn helix_speed() -> f64 {
    0.4
}
fn helix_lateral() -> f64 {
    0.4
}
fn helix_vertical() -> f64 {
    0.6
}
fn helix_frequency() -> Scalar {
    Scalar(PI)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DisturbanceConfig {
    /// Constant force plus periodic torque of the reference study.
    #[serde(rename = "paper", alias = "reference")]
    Reference,
    None,
    Custom { force: [f64; 3], torque_amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// s
    pub dt: f64,
    /// s
    pub duration: f64,
    /// N; `[min, max]` per rotor, no saturation when omitted
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotor_limits: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub mode: ModeConfig,
    pub robust: Toggle,
    pub params: ParamsConfig,
    pub gains: GainsConfig,
    pub initial: InitialConfig,
    pub trajectory: TrajectoryConfig,
    pub disturbance: DisturbanceConfig,
    pub sim: SimConfig,
}

fn v3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn a3(v: &Vec3) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn unit_heading(b1d: &[f64; 3], path: &str) -> Result<Vec3, ConfigError> {
    let v = v3(b1d);
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(field(path, "b1d must be a unit vector"));
    }
    Ok(v)
}

fn gain_path(e: &Error) -> Option<String> {
    match e {
        Error::NonPositiveGain { name, .. } | Error::PsiOutOfRange { name, .. } => {
            Some(format!("gains.{name}"))
        }
        Error::InvalidParams { name, .. } => Some(format!("params.{name}")),
        _ => None,
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config serializes")
    }

    pub fn to_scenario(&self) -> Result<Scenario, ConfigError> {
        let p = &self.params;
        let inertia = match p.inertia.len() {
            3 => Mat3::from_diagonal(&Vec3::new(p.inertia[0], p.inertia[1], p.inertia[2])),
            9 => Mat3::from_row_slice(&p.inertia),
            n => return Err(field("params.J", format!("expected 3 or 9 entries, got {n}"))),
        };
        let params = QuadrotorParams {
            mass: p.m,
            inertia,
            arm_length: p.d,
            torque_coefficient: p.c_tau_f,
            gravity: p.g,
            delta_x: p.delta_x,
            delta_r: p.delta_r,
        };
        params
            .validate()
            .map_err(|e| field(gain_path(&e).unwrap_or_else(|| "params".into()), e))?;

        let trajectory = match &self.trajectory {
            TrajectoryConfig::Helix {
                forward_speed,
                lateral_amplitude,
                vertical_amplitude,
                frequency,
                b1d,
            } => Trajectory::Helix(EllipticHelix {
                forward_speed: *forward_speed,
                lateral_amplitude: *lateral_amplitude,
                vertical_amplitude: *vertical_amplitude,
                frequency: frequency.0,
                heading: unit_heading(b1d, "trajectory.b1d")?,
            }),
            TrajectoryConfig::Hover { x_d, b1d } => Trajectory::Hover(Hover {
                position: v3(x_d),
                heading: unit_heading(b1d, "trajectory.b1d")?,
            }),
            TrajectoryConfig::CustomPolynomial { x, y, z, b1d } => {
                Trajectory::Polynomial(Polynomial {
                    coefficients: [x.clone(), y.clone(), z.clone()],
                    heading: unit_heading(b1d, "trajectory.b1d")?,
                })
            }
            TrajectoryConfig::Attitude { initial, rate } => {
                Trajectory::Attitude(AttitudeTrajectory {
                    initial: initial.to_rotation("trajectory.R0")?,
                    rate: v3(rate),
                })
            }
        };

        let s = &self.sim;
        let g = &self.gains;
        let accel_bound = match g.accel_bound {
            Some(b) => b,
            None => {
                let max_accel = trajectory
                    .position()
                    .map_or(0.0, |t| t.max_acceleration(s.duration));
                default_accel_bound(&params, max_accel)
            }
        };
        let gains = Gains {
            kx: g.kx,
            kv: g.kv,
            k_r: g.k_r,
            k_omega: g.k_omega,
            c1: g.c1,
            c2: g.c2,
            eps_x: g.eps_x,
            eps_r: g.eps_r,
            tau: g.tau,
            psi1: g.psi1,
            psi2: g.psi2,
            ex_max: g.ex_max,
            accel_bound,
        };
        gains
            .validate()
            .map_err(|e| field(gain_path(&e).unwrap_or_else(|| "gains".into()), e))?;

        let i = &self.initial;
        let initial = RigidBodyState {
            position: v3(&i.x),
            velocity: v3(&i.v),
            attitude: i.attitude.to_rotation("initial.R")?,
            angular_velocity: v3(&i.omega),
        };

        let disturbance = match &self.disturbance {
            DisturbanceConfig::Reference => DisturbanceModel::reference(),
            DisturbanceConfig::None => DisturbanceModel::none(),
            DisturbanceConfig::Custom {
                force,
                torque_amplitude,
            } => DisturbanceModel {
                force: v3(force),
                torque_amplitude: *torque_amplitude,
            },
        };

        let mode = match self.mode {
            ModeConfig::Attitude => FlightMode::Attitude,
            ModeConfig::Position => FlightMode::Position,
            ModeConfig::PositionLargeAngle => FlightMode::PositionLargeAngle,
        };

        let scenario = Scenario {
            name: self.name.clone(),
            params,
            gains,
            initial,
            trajectory,
            disturbance,
            duration: s.duration,
            dt: s.dt,
            mode,
            robust: self.robust.0,
            rotor_limits: s.rotor_limits,
        };
        scenario.validate().map_err(|e| match e {
            Error::InvalidScenario(msg) => field("sim", msg),
            other => field("scenario", other),
        })?;
        Ok(scenario)
    }

    pub fn from_scenario(sc: &Scenario) -> Self {
        let p = &sc.params;
        let j = &p.inertia;
        let diagonal = j[(0, 1)] == 0.0
            && j[(0, 2)] == 0.0
            && j[(1, 0)] == 0.0
            && j[(1, 2)] == 0.0
            && j[(2, 0)] == 0.0
            && j[(2, 1)] == 0.0;
        let inertia = if diagonal {
            vec![j[(0, 0)], j[(1, 1)], j[(2, 2)]]
        } else {
            (0..3).flat_map(|r| (0..3).map(move |c| j[(r, c)])).collect()
        };
        let g = &sc.gains;
        let trajectory = match &sc.trajectory {
            Trajectory::Helix(h) => TrajectoryConfig::Helix {
                forward_speed: h.forward_speed,
                lateral_amplitude: h.lateral_amplitude,
                vertical_amplitude: h.vertical_amplitude,
                frequency: Scalar(h.frequency),
                b1d: a3(&h.heading),
            },
            Trajectory::Hover(h) => TrajectoryConfig::Hover {
                x_d: a3(&h.position),
                b1d: a3(&h.heading),
            },
            Trajectory::Polynomial(poly) => TrajectoryConfig::CustomPolynomial {
                x: poly.coefficients[0].clone(),
                y: poly.coefficients[1].clone(),
                z: poly.coefficients[2].clone(),
                b1d: a3(&poly.heading),
            },
            Trajectory::Attitude(a) => TrajectoryConfig::Attitude {
                initial: RotationSpec::from_rotation(&a.initial),
                rate: a3(&a.rate),
            },
        };
        let disturbance = if sc.disturbance == DisturbanceModel::reference() {
            DisturbanceConfig::Reference
        } else if sc.disturbance == DisturbanceModel::none() {
            DisturbanceConfig::None
        } else {
            DisturbanceConfig::Custom {
                force: a3(&sc.disturbance.force),
                torque_amplitude: sc.disturbance.torque_amplitude,
            }
        };
        ScenarioConfig {
            name: sc.name.clone(),
            mode: match sc.mode {
                FlightMode::Attitude => ModeConfig::Attitude,
                FlightMode::Position => ModeConfig::Position,
                FlightMode::PositionLargeAngle => ModeConfig::PositionLargeAngle,
            },
            robust: Toggle(sc.robust),
            params: ParamsConfig {
                m: p.mass,
                inertia,
                d: p.arm_length,
                c_tau_f: p.torque_coefficient,
                g: p.gravity,
                delta_x: p.delta_x,
                delta_r: p.delta_r,
            },
            gains: GainsConfig {
                kx: g.kx,
                kv: g.kv,
                k_r: g.k_r,
                k_omega: g.k_omega,
                c1: g.c1,
                c2: g.c2,
                eps_x: g.eps_x,
                eps_r: g.eps_r,
                tau: g.tau,
                psi1: g.psi1,
                psi2: g.psi2,
                ex_max: g.ex_max,
                accel_bound: Some(g.accel_bound),
            },
            initial: InitialConfig {
                x: a3(&sc.initial.position),
                v: a3(&sc.initial.velocity),
                attitude: RotationSpec::from_rotation(&sc.initial.attitude),
                omega: a3(&sc.initial.angular_velocity),
            },
            trajectory,
            disturbance,
            sim: SimConfig {
                dt: sc.dt,
                duration: sc.duration,
                rotor_limits: sc.rotor_limits,
            },
        }
    }
}

/// Reads a scenario document from a path, or from the built-in set when
/// `source` names one (`case1`, `case2`, `attitude`) and no such file exists.
pub fn load_document(source: &str) -> Result<toml::Table, ConfigError> {
    let path = Path::new(source);
    let text = if path.exists() {
        std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: source.to_string(),
            source: e,
        })?
    } else if let Some((_, text)) = BUILTIN.iter().find(|(name, _)| *name == source) {
        text.to_string()
    } else {
        return Err(ConfigError::Io {
            path: source.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or built-in scenario"),
        });
    };
    text.parse::<toml::Table>()
        .map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Sets `key` (a dotted path such as `gains.kx`) to `value`, parsed as a TOML
/// value when possible and as a string otherwise.
pub fn apply_override(doc: &mut toml::Table, key: &str, value: &str) -> Result<(), ConfigError> {
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| field(key, "empty override key"))?;
    let mut table = doc;
    for part in parts {
        table = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| field(key, format!("`{part}` is not a table")))?;
    }
    table.insert(last.to_string(), parsed);
    Ok(())
}

/// Parses `key=value`.
pub fn split_override(spec: &str) -> Result<(&str, &str), ConfigError> {
    spec.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| field(spec, "override must look like key=value"))
}

pub fn document_to_config(doc: toml::Table) -> Result<ScenarioConfig, ConfigError> {
    ScenarioConfig::deserialize(toml::Value::Table(doc)).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Loads a scenario with `key=value` overrides applied.
pub fn load_scenario(source: &str, overrides: &[(String, String)]) -> Result<Scenario, ConfigError> {
    let mut doc = load_document(source)?;
    for (k, v) in overrides {
        apply_override(&mut doc, k, v)?;
    }
    let mut cfg = document_to_config(doc)?;
    if cfg.name.is_empty() {
        cfg.name = Path::new(source)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    cfg.to_scenario()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scalar_expressions() {
        assert_relative_eq!(parse_scalar("0.99pi").unwrap(), 0.99 * PI);
        assert_relative_eq!(parse_scalar("0.99*pi").unwrap(), 0.99 * PI);
        assert_relative_eq!(parse_scalar("pi/2").unwrap(), PI / 2.0);
        assert_relative_eq!(parse_scalar("-pi").unwrap(), -PI);
        assert_eq!(parse_scalar("1e-3").unwrap(), 1e-3);
        assert!(parse_scalar("tau").is_err());
    }

    #[test]
    fn builtin_cases_match_library_constructors() {
        let c1 = load_scenario("case1", &[]).unwrap();
        assert_eq!(c1, Scenario::case1());
        let c2 = load_scenario("case2", &[]).unwrap();
        assert_eq!(c2, Scenario::case2());
        let att = load_scenario("attitude", &[]).unwrap();
        assert_eq!(att, Scenario::attitude_demo());
    }

    #[test]
    fn overrides() {
        let sc = load_scenario(
            "case1",
            &[
                ("gains.kx".into(), "30".into()),
                ("robust".into(), "off".into()),
                ("sim.dt".into(), "5e-4".into()),
            ],
        )
        .unwrap();
        assert_eq!(sc.gains.kx, 30.0);
        assert!(!sc.robust);
        assert_eq!(sc.dt, 5e-4);
    }

    #[test]
    fn field_errors_name_the_path() {
        let err = load_scenario("case1", &[("gains.eps_R".into(), "0".into())]).unwrap_err();
        assert!(err.to_string().starts_with("gains.eps_R"), "{err}");
        let err = load_scenario("case1", &[("params.J".into(), "[1.0, 2.0]".into())]).unwrap_err();
        assert!(err.to_string().starts_with("params.J"), "{err}");
        let err = load_scenario("case1", &[("gains.bogus".into(), "1".into())]).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn raw_rotation_is_validated() {
        let err = load_scenario(
            "case1",
            &[("initial.R".into(), "[1.0, 0, 0, 0, 1.0, 0, 0, 0, 1.1]".into())],
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("initial.R"), "{err}");
    }
}
