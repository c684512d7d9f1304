//! Deterministic closed-loop run.

use nalgebra::DVector;

use super::config::SimConfig;
use crate::advancement::{decompose, psi_dot_update, AdvancementState};
use crate::controller::{control_objective, TaskMaps, TrackingState};
use crate::dynamics::{forward_dynamics_from_terms, step, GeneralizedState, RobotModel};
use crate::linalg;
use crate::scenario::{update_phase, Channel, StandUpPhase};
use crate::trajectory::ParamCurve;
use crate::{Error, Result, Vec6};

/// Distance (task-space norm) at which the goal pose counts as reached.
pub const GOAL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub phase: StandUpPhase,
    pub psi: f64,
    pub psi_dot: f64,
    pub x: Vec6,
    pub x_d: Vec6,
    pub xdot: Vec6,
    pub xdot_d: Vec6,
    pub f_hands: Vec6,
    pub f_feet: Vec6,
    pub alpha: f64,
    pub tau: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    /// Number of torque columns per row.
    pub n_tau: usize,
    pub rows: Vec<LogRow>,
}

impl SimLog {
    pub fn new(n_tau: usize) -> Self {
        Self {
            n_tau,
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub steps: usize,
    pub final_time: f64,
    pub final_psi: f64,
    /// First logged time with `|x - x_goal| <= GOAL_TOLERANCE`.
    pub time_to_goal: Option<f64>,
    pub max_psi_dot: f64,
    /// Time of entry into each phase after the first.
    pub transitions: Vec<(StandUpPhase, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: SimLog,
    pub summary: Summary,
}

/// Initial state at the start of the reference with zero tracking error.
pub fn initial_state(config: &SimConfig) -> Result<GeneralizedState> {
    let model = &config.model;
    let x0 = config.curve.eval(0.0)?;
    let v0 = config.curve.deriv(0.0)?;
    let seed = config.initial_q.clone().unwrap_or_else(|| default_seed(model));
    let q = solve_ik(model, &x0, seed)?;
    let j = model.link_jacobian(model.task_link(), &q)?;
    let p = linalg::pinv(&j, config.controller.pinv_rtol);
    let nu = &p.pinv * DVector::from_iterator(6, v0.iter().cloned());
    Ok(GeneralizedState::new(q, nu))
}

fn default_seed(model: &RobotModel) -> DVector<f64> {
    match model.dof() {
        3 => DVector::from_row_slice(&[0.5, 0.5, 0.5]),
        n => DVector::zeros(n),
    }
}

/// Newton iterations on the task pose with a pseudoinverse step.
fn solve_ik(model: &RobotModel, target: &Vec6, seed: DVector<f64>) -> Result<DVector<f64>> {
    let link = model.task_link();
    let mut q = seed;
    for _ in 0..200 {
        let err = target - model.link_pose(link, &q)?;
        if err.amax() <= 1e-12 {
            return Ok(q);
        }
        let j = model.link_jacobian(link, &q)?;
        let p = linalg::pinv(&j, 1e-8);
        q += &p.pinv * DVector::from_iterator(6, err.iter().cloned());
    }
    let residual = (target - model.link_pose(link, &q)?).amax();
    if residual <= 1e-9 {
        Ok(q)
    } else {
        Err(Error::Config(format!(
            "initial reference pose is not reachable by the {} model (residual {residual:e})",
            model.kind().name()
        )))
    }
}

pub fn run_simulation(config: &SimConfig) -> Result<RunOutput> {
    let model = &config.model;
    let curve: &ParamCurve = &config.curve;
    let ctrl = &config.controller;
    let dt = config.dt;
    let steps = config.steps();
    let goal = curve.goal();

    let mut state = initial_state(config)?;
    let mut adv = AdvancementState::new(config.psi_dot_upper)?;
    let mut tracking = TrackingState::default();
    let mut phase = StandUpPhase::default();

    let mut log = SimLog::new(model.actuated_dim());
    log.rows.reserve(steps);
    let mut time_to_goal = None;
    let mut max_psi_dot = f64::NEG_INFINITY;
    let mut transitions = Vec::new();

    for k in 0..steps {
        let t = k as f64 * dt;
        let f_hands = config.profile.wrench_at(t, Channel::Hands);
        let f_feet = config.profile.wrench_at(t, Channel::Feet);

        let next_phase = update_phase(phase, &f_hands, &f_feet, &config.thresholds);
        if next_phase != phase {
            transitions.push((next_phase, t));
            if config.reset_integral_on_phase_change {
                tracking.reset();
            }
            phase = next_phase;
        }

        let row = control_step(config, &state, &adv, &tracking, &f_hands).map_err(|e| e.at_step(k))?;

        let x = model.task_pose(&state.q);
        if time_to_goal.is_none() && (x - goal).norm() <= GOAL_TOLERANCE {
            time_to_goal = Some(t);
        }
        max_psi_dot = max_psi_dot.max(row.psi_dot);

        tracking = tracking.integrate_error(&row.xdot, &row.kin_xdot_d, dt, ctrl.integral_limit);
        state = step(&state, &row.nu_dot, dt).map_err(|e| e.at_step(k))?;
        if !state.is_finite() {
            return Err(Error::NonFinite("simulated state").at_step(k));
        }

        log.rows.push(LogRow {
            t,
            phase,
            psi: adv.psi,
            psi_dot: row.psi_dot,
            x,
            x_d: row.x_d,
            xdot: row.xdot,
            xdot_d: row.kin_xdot_d,
            f_hands: f_hands.0,
            f_feet: f_feet.0,
            alpha: row.alpha,
            tau: row.tau.iter().cloned().collect(),
        });
        adv = adv.advance(row.psi_dot, dt);
    }

    let summary = Summary {
        steps,
        final_time: steps as f64 * dt,
        final_psi: adv.psi,
        time_to_goal,
        max_psi_dot: if steps == 0 { 1.0 } else { max_psi_dot },
        transitions,
    };
    Ok(RunOutput { log, summary })
}

struct StepOutput {
    psi_dot: f64,
    x_d: Vec6,
    xdot: Vec6,
    kin_xdot_d: Vec6,
    alpha: f64,
    tau: DVector<f64>,
    nu_dot: DVector<f64>,
}

fn control_step(
    config: &SimConfig,
    state: &GeneralizedState,
    adv: &AdvancementState,
    tracking: &TrackingState,
    f_hands: &crate::dynamics::Wrench,
) -> Result<StepOutput> {
    let model = &config.model;
    let ctrl = &config.controller;
    let terms = model.compute_terms(state)?;
    let maps = TaskMaps::new(&terms)?;
    let fext = model.stack_wrenches(&[(config.hands_link.as_str(), *f_hands)])?;
    let omega_f = maps.induced_acceleration(&fext)?;

    let xdot_dyn = &terms.j * &state.nu;
    let xdot = Vec6::from_iterator(xdot_dyn.iter().cloned());

    let psi_dot = if config.advancement {
        let tangent = config.curve.deriv(adv.psi)?;
        psi_dot_update(&xdot, &tangent, adv.psi_dot_upper, config.eps_v)?
    } else {
        1.0
    };
    let mut kin = config.curve.desired_kinematics(adv.psi, psi_dot)?;
    // feedforward sampled at the step midpoint so that an exactly tracking
    // state stays on the reference under semi-implicit Euler
    let mid = adv.psi + 0.5 * psi_dot * config.dt;
    kin.xddot_d = config.curve.desired_kinematics(mid, psi_dot)?.xddot_d;
    let decomp = decompose(&omega_f, &kin.xdot_d, config.eps_v);
    let xddot_star = control_objective(&kin, &xdot, tracking, &ctrl.gains);
    let tau = maps.torques(&xddot_star, &omega_f, ctrl.mode, &decomp, ctrl.pinv_rtol)?;
    let nu_dot = forward_dynamics_from_terms(&terms, &tau, &fext)?;
    Ok(StepOutput {
        psi_dot,
        x_d: kin.x_d,
        xdot,
        kin_xdot_d: kin.xdot_d,
        alpha: decomp.alpha,
        tau,
        nu_dot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_has_zero_tracking_error() {
        let c = SimConfig::default();
        let s = initial_state(&c).unwrap();
        let x = c.model.task_pose(&s.q);
        assert!((x - c.curve.eval(0.0).unwrap()).amax() < 1e-12);
        let v = Vec6::from_iterator(s.nu.iter().cloned());
        assert!((v - c.curve.deriv(0.0).unwrap()).amax() < 1e-12);
    }

    #[test]
    fn planar_initial_state_solves_ik() {
        let c = SimConfig::from_toml_str(
            "[model]\nkind = \"planar-3link\"\n\
             [scenario]\nwaypoints = [[0, 1.2, 0, 1.0, 0, -1.0, 0], [2, 1.4, 0, 0.8, 0, -1.0, 0]]",
        )
        .unwrap();
        let s = initial_state(&c).unwrap();
        let x = c.model.task_pose(&s.q);
        assert!((x - c.curve.eval(0.0).unwrap()).amax() < 1e-9);
    }

    #[test]
    fn unreachable_start_is_config_error() {
        let c = SimConfig::from_toml_str(
            "[model]\nkind = \"planar-3link\"\n\
             [scenario]\nwaypoints = [[0, 5.0, 0, 0, 0, 0, 0], [2, 5.0, 0, 1, 0, 0, 0]]",
        )
        .unwrap();
        assert!(matches!(initial_state(&c), Err(Error::Config(_))));
    }

    #[test]
    fn short_run_logs_one_row_per_step() {
        let c = SimConfig::from_toml_str("duration = 0.05").unwrap();
        let out = run_simulation(&c).unwrap();
        assert_eq!(out.log.rows.len(), 50);
        assert_eq!(out.log.n_tau, 6);
        for (k, r) in out.log.rows.iter().enumerate() {
            assert_eq!(r.t, k as f64 * c.dt);
        }
    }
}
