//! Robust geometric tracking control of a quadrotor on SE(3).
//!
//! - [`geometry`]: hat/vee maps, SO(3) exponential, attitude error function and error vectors.
//! - [`model`]: rigid-body equations of motion, rotor allocation, disturbance signals.
//! - [`control`]: robust attitude and position controllers with the computed attitude `R_c`.
//! - [`certify`]: sufficient gain conditions and ultimate bounds.
//! - [`sim`]: fixed-step closed-loop simulation, reference scenarios, Lyapunov monitors.
//! - [`cli`]: scenario files, CSV logs and the `run`/`certify`/`sweep` commands.

pub mod certify;
pub mod cli;
pub mod control;
pub mod error;
pub mod geometry;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
