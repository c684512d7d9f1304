//! Run configuration.
//!
//! The on-disk format is TOML. Every table rejects unknown keys, and every key
//! has a default, so an empty file is a valid nominal stand-up run. See the
//! README for the full schema.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::advancement::{DEFAULT_EPS_V, DEFAULT_PSI_DOT_UPPER};
use crate::controller::{
    ControlMode, ControllerConfig, Gains, DEFAULT_INTEGRAL_LIMIT, DEFAULT_KD, DEFAULT_KP, DEFAULT_PINV_RTOL,
};
use crate::dynamics::{
    CartesianMassParams, ModelKind, Planar3LinkParams, RobotModel, Wrench, STANDARD_GRAVITY,
};
use crate::scenario::{build_standup_reference, Channel, Pulse, StandUpWaypoints, Thresholds, WrenchProfile};
use crate::trajectory::{ParamCurve, Waypoint};
use crate::{Error, Mat6, Result, Vec6};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_DURATION: f64 = 10.0;
pub const DEFAULT_COM_MASS: f64 = 30.0;

// ---------------------------------------------------------------------------
// file schema

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub advancement: Option<bool>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub controller: ControllerSection,
    #[serde(default)]
    pub advancement_law: AdvancementSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSection {
    CartesianMass {
        #[serde(default = "default_com_mass")]
        mass: f64,
        #[serde(default = "default_com_inertia")]
        inertia: [f64; 3],
        #[serde(default = "default_gravity")]
        gravity: f64,
        #[serde(default)]
        task_link: Option<String>,
        #[serde(default)]
        hands_link: Option<String>,
    },
    #[serde(rename = "planar-3link")]
    Planar3Link {
        #[serde(default = "default_link_masses")]
        masses: [f64; 3],
        #[serde(default = "default_link_lengths")]
        lengths: [f64; 3],
        #[serde(default = "default_link_inertias")]
        inertias: [f64; 3],
        #[serde(default = "default_gravity")]
        gravity: f64,
        #[serde(default)]
        task_link: Option<String>,
        #[serde(default)]
        hands_link: Option<String>,
        /// Seed for the initial inverse-kinematics solve.
        #[serde(default)]
        initial_q: Option<[f64; 3]>,
    },
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection::CartesianMass {
            mass: DEFAULT_COM_MASS,
            inertia: default_com_inertia(),
            gravity: STANDARD_GRAVITY,
            task_link: None,
            hands_link: None,
        }
    }
}

fn default_com_mass() -> f64 {
    DEFAULT_COM_MASS
}
fn default_com_inertia() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}
fn default_gravity() -> f64 {
    STANDARD_GRAVITY
}
fn default_link_masses() -> [f64; 3] {
    Planar3LinkParams::default().masses
}
fn default_link_lengths() -> [f64; 3] {
    Planar3LinkParams::default().lengths
}
fn default_link_inertias() -> [f64; 3] {
    Planar3LinkParams::default().inertias
}

/// A gain given as a scalar (times identity), a 6-vector diagonal, or a full
/// 6x6 matrix in row-major nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Scalar(f64),
    Diagonal([f64; 6]),
    Full(Box<[[f64; 6]; 6]>),
}

impl GainSpec {
    fn to_matrix(&self) -> Mat6 {
        match self {
            GainSpec::Scalar(k) => Mat6::identity() * *k,
            GainSpec::Diagonal(d) => Mat6::from_diagonal(&Vec6::from_row_slice(d)),
            GainSpec::Full(rows) => Mat6::from_fn(|r, c| rows[r][c]),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub kp: Option<GainSpec>,
    pub kd: Option<GainSpec>,
    pub mode: Option<ControlMode>,
    pub pinv_rtol: Option<f64>,
    pub integral_limit: Option<f64>,
    pub reset_integral_on_phase_change: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvancementSection {
    pub psi_dot_upper: Option<f64>,
    pub eps_v: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub thresholds: Option<Thresholds>,
    /// Default ramp time (s) for pulses that do not set their own.
    pub ramp_time: Option<f64>,
    /// Stand-up waypoints; used when `waypoints` is absent.
    pub standup: Option<StandUpWaypoints>,
    /// Explicit reference rows `[psi, x, y, z, rx, ry, rz]`.
    pub waypoints: Option<Vec<[f64; 7]>>,
    #[serde(default)]
    pub pulses: Vec<PulseSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub channel: Channel,
    pub t_start: f64,
    pub t_end: f64,
    /// Full wrench `[fx, fy, fz, mx, my, mz]`.
    pub wrench: Option<[f64; 6]>,
    /// Force-only shorthand `[fx, fy, fz]`.
    pub force: Option<[f64; 3]>,
    pub ramp: Option<f64>,
}

pub const DEFAULT_RAMP_TIME: f64 = 0.1;

// ---------------------------------------------------------------------------
// validated configuration

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: RobotModel,
    /// Contact link receiving the hands channel.
    pub hands_link: String,
    /// Seed configuration for the initial inverse-kinematics solve.
    pub initial_q: Option<DVector<f64>>,
    pub curve: ParamCurve,
    pub controller: ControllerConfig,
    pub reset_integral_on_phase_change: bool,
    pub psi_dot_upper: f64,
    pub eps_v: f64,
    pub dt: f64,
    pub duration: f64,
    pub advancement: bool,
    pub thresholds: Thresholds,
    pub profile: WrenchProfile,
    pub output_dir: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::from_file_schema(ConfigFile::default()).expect("defaults are valid")
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        Self::from_file_schema(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| match source.kind() {
            std::io::ErrorKind::NotFound => {
                Error::Config(format!("config file {} not found", path.display()))
            }
            _ => Error::Io {
                path: path.to_path_buf(),
                source,
            },
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_file_schema(file: ConfigFile) -> Result<Self> {
        let dt = file.dt.unwrap_or(DEFAULT_DT);
        let duration = file.duration.unwrap_or(DEFAULT_DURATION);
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        if !(duration >= dt) || !duration.is_finite() {
            return Err(Error::Config(format!(
                "duration must be at least dt, got {duration}"
            )));
        }

        let (model, hands_link, initial_q) = build_model(&file.model)?;

        let c = &file.controller;
        let gains = Gains::new(
            c.kp.as_ref()
                .map_or(Mat6::identity() * DEFAULT_KP, GainSpec::to_matrix),
            c.kd.as_ref()
                .map_or(Mat6::identity() * DEFAULT_KD, GainSpec::to_matrix),
        )?;
        let pinv_rtol = c.pinv_rtol.unwrap_or(DEFAULT_PINV_RTOL);
        if !(pinv_rtol > 0.0 && pinv_rtol < 1.0) {
            return Err(Error::Config(format!(
                "pinv_rtol must be in (0, 1), got {pinv_rtol}"
            )));
        }
        let integral_limit = c.integral_limit.unwrap_or(DEFAULT_INTEGRAL_LIMIT);
        if !(integral_limit > 0.0) {
            return Err(Error::Config(format!(
                "integral_limit must be positive, got {integral_limit}"
            )));
        }
        let controller = ControllerConfig {
            gains,
            mode: c.mode.unwrap_or_default(),
            pinv_rtol,
            integral_limit,
        };

        let psi_dot_upper = file
            .advancement_law
            .psi_dot_upper
            .unwrap_or(DEFAULT_PSI_DOT_UPPER);
        if !(psi_dot_upper >= 1.0) || !psi_dot_upper.is_finite() {
            return Err(Error::Config(format!(
                "psi_dot_upper must be finite and >= 1, got {psi_dot_upper}"
            )));
        }
        let eps_v = file.advancement_law.eps_v.unwrap_or(DEFAULT_EPS_V);
        if !(eps_v > 0.0) {
            return Err(Error::Config(format!("eps_v must be positive, got {eps_v}")));
        }

        let s = &file.scenario;
        let thresholds = s.thresholds.unwrap_or_default();
        thresholds.validate()?;
        let curve = match (&s.waypoints, &s.standup) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "scenario sets both `waypoints` and `standup`".into(),
                ))
            }
            (Some(rows), None) => {
                let wps: Vec<Waypoint> = rows
                    .iter()
                    .map(|r| Waypoint::new(r[0], Vec6::from_row_slice(&r[1..])))
                    .collect();
                ParamCurve::new(&wps)?
            }
            (None, standup) => build_standup_reference(&standup.unwrap_or_default())?,
        };
        let ramp_time = s.ramp_time.unwrap_or(DEFAULT_RAMP_TIME);
        let pulses = s
            .pulses
            .iter()
            .map(|p| pulse_from_section(p, ramp_time))
            .collect::<Result<Vec<_>>>()?;
        let profile = WrenchProfile::new(pulses)?;

        Ok(SimConfig {
            model,
            hands_link,
            initial_q,
            curve,
            controller,
            reset_integral_on_phase_change: c.reset_integral_on_phase_change.unwrap_or(false),
            psi_dot_upper,
            eps_v,
            dt,
            duration,
            advancement: file.advancement.unwrap_or(true),
            thresholds,
            profile,
            output_dir: file.output_dir,
        })
    }

    /// Number of control steps (and log rows) in a run.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Copy of this configuration with every hands-channel pulse removed.
    pub fn unassisted(&self) -> Self {
        let mut c = self.clone();
        c.profile = self.profile.without_channel(Channel::Hands);
        c
    }
}

fn build_model(section: &ModelSection) -> Result<(RobotModel, String, Option<DVector<f64>>)> {
    let (kind, task_link, hands_link, initial_q) = match section {
        ModelSection::CartesianMass {
            mass,
            inertia,
            gravity,
            task_link,
            hands_link,
        } => (
            ModelKind::CartesianMass(CartesianMassParams {
                mass: *mass,
                inertia: *inertia,
                gravity: *gravity,
            }),
            task_link.clone(),
            hands_link.clone(),
            None,
        ),
        ModelSection::Planar3Link {
            masses,
            lengths,
            inertias,
            gravity,
            task_link,
            hands_link,
            initial_q,
        } => (
            ModelKind::Planar3Link(Planar3LinkParams {
                masses: *masses,
                lengths: *lengths,
                inertias: *inertias,
                gravity: *gravity,
            }),
            task_link.clone(),
            hands_link.clone(),
            initial_q.map(|q| DVector::from_row_slice(&q)),
        ),
    };
    let default_link = *kind.link_names().last().expect("models have links");
    let task_link = task_link.unwrap_or_else(|| default_link.to_string());
    let hands_link = hands_link.unwrap_or_else(|| task_link.clone());
    let model = RobotModel::new(kind, &task_link, &[hands_link.as_str()]).map_err(|e| match e {
        Error::UnknownLink(l) => Error::Config(format!("unknown link `{l}`")),
        Error::InvalidModel(m) => Error::Config(m),
        other => other,
    })?;
    Ok((model, hands_link, initial_q))
}

fn pulse_from_section(p: &PulseSection, default_ramp: f64) -> Result<Pulse> {
    let wrench = match (p.wrench, p.force) {
        (Some(w), None) => Wrench(Vec6::from_row_slice(&w)),
        (None, Some(f)) => Wrench::from_force(f[0], f[1], f[2]),
        _ => {
            return Err(Error::Config(
                "each pulse needs exactly one of `wrench` or `force`".into(),
            ))
        }
    };
    Ok(Pulse {
        t_start: p.t_start,
        t_end: p.t_end,
        wrench,
        channel: p.channel,
        ramp: p.ramp.unwrap_or(default_ramp),
    })
}
