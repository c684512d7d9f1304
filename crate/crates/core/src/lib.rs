//! Rigid-body simulation and control workbench for assisted trajectory
//! advancement.
//!
//! A robot link tracks a parametric Cartesian reference `x_d(psi)` under a
//! feedback-linearizing controller. External interaction wrenches that push
//! along the desired velocity advance the free parameter `psi` faster than
//! real time, so the reference moves ahead when a partner helps.
//!
//! The crate is organized bottom-up:
//!
//! * [`dynamics`] - mass matrix, bias forces, Jacobians and integration for
//!   two desk-scale models.
//! * [`trajectory`] - natural cubic spline curves `psi -> R^6`.
//! * [`advancement`] - wrench decomposition and the clamped `psi_dot` law.
//! * [`controller`] - task-space objective and feedback-linearization torques.
//! * [`scenario`] - four-phase sit-to-stand script and scripted wrenches.
//! * [`harness`] - configuration, closed-loop runs, CSV and SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advancement;
pub mod controller;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod scenario;
pub mod trajectory;

pub use error::{Error, Result};

/// 6D task-space vector: linear part followed by angular part.
pub type Vec6 = nalgebra::Vector6<f64>;
/// 6x6 task-space matrix.
pub type Mat6 = nalgebra::Matrix6<f64>;
