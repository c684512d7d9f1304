//! Task-space tracking objective and feedback-linearization torques.
//!
//! The commanded task acceleration is
//!
//! ```text
//! xddot* = xddot_d - Kd (xdot - xdot_d) - Kp int(xdot - xdot_d)
//! ```
//!
//! and the torques realizing it are
//!
//! ```text
//! tau = Delta^+ [xddot* - Omega f + Lambda]
//! Delta = J M^-1 B,  Omega = J M^-1 Jc^T,  Lambda = J M^-1 h - J_dot nu
//! ```
//!
//! which cancels every external wrench. In retain-helpful mode the helpful
//! parallel part `max(alpha, 0) xdot_d_par` is added back, so assistance along
//! the desired direction speeds the task up.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::advancement::WrenchDecomposition;
use crate::dynamics::DynamicsTerms;
use crate::linalg;
use crate::trajectory::DesiredKinematics;
use crate::{Error, Mat6, Result, Vec6};

pub const DEFAULT_KP: f64 = 25.0;
pub const DEFAULT_KD: f64 = 10.0;
pub const DEFAULT_PINV_RTOL: f64 = 1e-8;
pub const DEFAULT_INTEGRAL_LIMIT: f64 = 10.0;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    kp: Mat6,
    kd: Mat6,
}

impl Gains {
    pub fn new(kp: Mat6, kd: Mat6) -> Result<Self> {
        check_spd("Kp", &kp)?;
        check_spd("Kd", &kd)?;
        Ok(Self { kp, kd })
    }

    pub fn scalar(kp: f64, kd: f64) -> Result<Self> {
        Self::new(Mat6::identity() * kp, Mat6::identity() * kd)
    }

    pub fn kp(&self) -> &Mat6 {
        &self.kp
    }

    pub fn kd(&self) -> &Mat6 {
        &self.kd
    }
}

impl Default for Gains {
    fn default() -> Self {
        Self::scalar(DEFAULT_KP, DEFAULT_KD).expect("default gains are positive definite")
    }
}

fn check_spd(name: &str, k: &Mat6) -> Result<()> {
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{name} has non-finite entries")));
    }
    if (k - k.transpose()).amax() > SYMMETRY_TOL {
        return Err(Error::Config(format!("{name} is not symmetric")));
    }
    let min_eig = SymmetricEigen::new(*k).eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(Error::Config(format!(
            "{name} is not positive definite (min eigenvalue {min_eig:e})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlMode {
    CancelAll,
    #[default]
    RetainHelpful,
}

impl ControlMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlMode::CancelAll => "cancel-all",
            ControlMode::RetainHelpful => "retain-helpful",
        }
    }
}

impl std::str::FromStr for ControlMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cancel-all" => Ok(ControlMode::CancelAll),
            "retain-helpful" => Ok(ControlMode::RetainHelpful),
            other => Err(Error::Config(format!("unknown control mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub gains: Gains,
    pub mode: ControlMode,
    /// Singular values of `Delta` below `pinv_rtol * sigma_max` are rank
    /// deficiency.
    pub pinv_rtol: f64,
    /// Elementwise bound on the integrated velocity error.
    pub integral_limit: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            gains: Gains::default(),
            mode: ControlMode::default(),
            pinv_rtol: DEFAULT_PINV_RTOL,
            integral_limit: DEFAULT_INTEGRAL_LIMIT,
        }
    }
}

/// Running integral of the task velocity error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackingState {
    pub int_err: Vec6,
}

impl TrackingState {
    pub fn reset(&mut self) {
        self.int_err = Vec6::zeros();
    }

    /// `int_err + (xdot - xdot_d) dt`, clamped elementwise to `+-limit`.
    pub fn integrate_error(&self, xdot: &Vec6, xdot_d: &Vec6, dt: f64, limit: f64) -> Self {
        let raw = self.int_err + (xdot - xdot_d) * dt;
        Self {
            int_err: raw.map(|v| v.clamp(-limit, limit)),
        }
    }
}

pub fn control_objective(
    kin: &DesiredKinematics,
    xdot: &Vec6,
    tracking: &TrackingState,
    gains: &Gains,
) -> Vec6 {
    let vel_err = xdot - kin.xdot_d;
    kin.xddot_d - gains.kd * vel_err - gains.kp * tracking.int_err
}

/// Task-space maps derived from the dynamics terms.
#[derive(Debug, Clone)]
pub struct TaskMaps {
    /// `J M^-1 B`, torque to task acceleration.
    pub delta: DMatrix<f64>,
    /// `J M^-1 Jc^T`, stacked wrench to task acceleration.
    pub omega: DMatrix<f64>,
    /// `J M^-1 h - J_dot nu`.
    pub lambda: Vec6,
}

impl TaskMaps {
    pub fn new(terms: &DynamicsTerms) -> Result<Self> {
        let chol = Cholesky::new(terms.m.clone()).ok_or(Error::SingularMass)?;
        let j_minv = chol.solve(&terms.j.transpose()).transpose();
        let delta = &j_minv * &terms.b;
        let omega = &j_minv * terms.jc.transpose();
        let lambda_dyn = &j_minv * &terms.h;
        let lambda = Vec6::from_iterator(lambda_dyn.iter().cloned()) - terms.jdot_nu;
        Ok(Self { delta, omega, lambda })
    }

    /// Task acceleration `Omega f` produced by a stacked wrench.
    pub fn induced_acceleration(&self, fext: &DVector<f64>) -> Result<Vec6> {
        if fext.len() != self.omega.ncols() {
            return Err(Error::Dimension {
                context: "stacked wrenches",
                expected: self.omega.ncols(),
                actual: fext.len(),
            });
        }
        let a = &self.omega * fext;
        Ok(Vec6::from_iterator(a.iter().cloned()))
    }

    /// Torques for a commanded task acceleration given the induced
    /// acceleration `omega_f` of the current external wrench.
    pub fn torques(
        &self,
        xddot_star: &Vec6,
        omega_f: &Vec6,
        mode: ControlMode,
        decomp: &WrenchDecomposition,
        pinv_rtol: f64,
    ) -> Result<DVector<f64>> {
        let mut target = xddot_star - omega_f + self.lambda;
        if mode == ControlMode::RetainHelpful && decomp.alpha > 0.0 {
            target += decomp.helpful();
        }
        let p = linalg::pinv(&self.delta, pinv_rtol);
        if !p.is_full_rank() {
            return Err(Error::Singularity {
                sigma_min: p.sigma_min,
                sigma_max: p.sigma_max,
            });
        }
        let tau = &p.pinv * DVector::from_iterator(6, target.iter().cloned());
        if tau.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("control torques"));
        }
        Ok(tau)
    }
}

/// Feedback-linearization torques for one control step.
pub fn control_torques(
    terms: &DynamicsTerms,
    xddot_star: &Vec6,
    fext: &DVector<f64>,
    mode: ControlMode,
    decomp: &WrenchDecomposition,
    pinv_rtol: f64,
) -> Result<DVector<f64>> {
    let maps = TaskMaps::new(terms)?;
    let omega_f = maps.induced_acceleration(fext)?;
    maps.torques(xddot_star, &omega_f, mode, decomp, pinv_rtol)
}
