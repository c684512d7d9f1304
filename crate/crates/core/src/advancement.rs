//! Free-parameter advancement.
//!
//! The task acceleration induced by an external wrench, `omega_f = Omega f*`,
//! is split into a component along the desired velocity (magnitude `alpha`)
//! and an orthogonal residual (magnitude `beta`). The free parameter moves at
//!
//! ```text
//! psi_dot = min(psi_dot_upper, max(1, xdot^T dx_d/dpsi / |dx_d/dpsi|^2))
//! ```
//!
//! so the reference never runs slower than real time and speeds up when the
//! measured task velocity outpaces the nominal curve velocity.

use crate::{Error, Result, Vec6};

/// Threshold below which a desired velocity or curve tangent counts as zero.
pub const DEFAULT_EPS_V: f64 = 1e-9;
pub const DEFAULT_PSI_DOT_UPPER: f64 = 2.0;

/// Residual norms at or below this are treated as an exact zero residual.
const RESIDUAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrenchDecomposition {
    pub alpha: f64,
    pub beta: f64,
    /// Unit vector along the desired velocity, zero when it is undefined.
    pub par_dir: Vec6,
    /// Unit vector along the orthogonal residual, zero when the residual is.
    pub perp_dir: Vec6,
}

impl WrenchDecomposition {
    pub fn reconstruct(&self) -> Vec6 {
        self.par_dir * self.alpha + self.perp_dir * self.beta
    }

    /// The part of the decomposition that helps the task: `max(alpha, 0)`
    /// along the desired direction.
    pub fn helpful(&self) -> Vec6 {
        self.par_dir * self.alpha.max(0.0)
    }
}

pub fn decompose(omega_f: &Vec6, xdot_d: &Vec6, eps_v: f64) -> WrenchDecomposition {
    let speed = xdot_d.norm();
    if !(speed > eps_v) {
        let beta = omega_f.norm();
        return WrenchDecomposition {
            alpha: 0.0,
            beta,
            par_dir: Vec6::zeros(),
            perp_dir: if beta > RESIDUAL_EPS {
                omega_f / beta
            } else {
                Vec6::zeros()
            },
        };
    }
    let par_dir = xdot_d / speed;
    let alpha = xdot_d.dot(omega_f) / speed;
    let mut residual = omega_f - par_dir * alpha;
    // second Gram-Schmidt pass keeps the residual orthogonal when it is tiny
    residual -= par_dir * par_dir.dot(&residual);
    let beta = residual.norm();
    let perp_dir = if beta > RESIDUAL_EPS {
        residual / beta
    } else {
        Vec6::zeros()
    };
    WrenchDecomposition {
        alpha,
        beta,
        par_dir,
        perp_dir,
    }
}

/// Clamped projection rule for the free-parameter rate.
pub fn psi_dot_update(xdot: &Vec6, curve_deriv: &Vec6, psi_dot_upper: f64, eps_v: f64) -> Result<f64> {
    if !(psi_dot_upper >= 1.0) {
        return Err(Error::Config(format!(
            "psi_dot_upper must be >= 1, got {psi_dot_upper}"
        )));
    }
    let tangent_sq = curve_deriv.norm_squared();
    if !(tangent_sq.sqrt() > eps_v) {
        return Ok(1.0);
    }
    let ratio = xdot.dot(curve_deriv) / tangent_sq;
    // max/min with NaN would silently pick the other argument
    if ratio.is_nan() {
        return Err(Error::NonFinite("psi_dot ratio"));
    }
    Ok(ratio.max(1.0).min(psi_dot_upper))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvancementState {
    pub psi: f64,
    pub psi_dot: f64,
    pub psi_dot_upper: f64,
}

impl AdvancementState {
    pub fn new(psi_dot_upper: f64) -> Result<Self> {
        if !(psi_dot_upper >= 1.0) || !psi_dot_upper.is_finite() {
            return Err(Error::Config(format!(
                "psi_dot_upper must be finite and >= 1, got {psi_dot_upper}"
            )));
        }
        Ok(Self {
            psi: 0.0,
            psi_dot: 1.0,
            psi_dot_upper,
        })
    }

    /// Explicit Euler step of `psi`.
    pub fn advance(self, psi_dot: f64, dt: f64) -> Self {
        Self {
            psi: self.psi + psi_dot * dt,
            psi_dot,
            psi_dot_upper: self.psi_dot_upper,
        }
    }
}
