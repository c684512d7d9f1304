mod common;

use common::{rng, uniform_vec};
use nalgebra::DVector;
use rand::Rng;
use trajadv::advancement::{decompose, DEFAULT_EPS_V};
use trajadv::controller::{
    control_objective, control_torques, ControlMode, Gains, TrackingState, DEFAULT_PINV_RTOL,
};
use trajadv::dynamics::{
    forward_dynamics_from_terms, CartesianMassParams, DynamicsTerms, GeneralizedState, Planar3LinkParams,
    RobotModel, Wrench,
};
use trajadv::harness::{run_simulation, SimConfig};
use trajadv::trajectory::DesiredKinematics;
use trajadv::{Error, Mat6, Vec6};

fn closed_loop_accel(terms: &DynamicsTerms, tau: &DVector<f64>, f: &DVector<f64>) -> Vec6 {
    let nu_dot = forward_dynamics_from_terms(terms, tau, f).unwrap();
    Vec6::from_iterator((&terms.j * nu_dot).iter().cloned()) + terms.jdot_nu
}

fn random_planar_state(r: &mut rand::rngs::StdRng) -> GeneralizedState {
    // keep the elbow joints away from the stretched singularity
    let q1 = r.random_range(-3.0..3.0);
    let mut bent = || {
        let a: f64 = r.random_range(0.4..2.7);
        if r.random_bool(0.5) {
            a
        } else {
            -a
        }
    };
    let q = DVector::from_row_slice(&[q1, bent(), bent()]);
    GeneralizedState::new(q, uniform_vec(r, 3, -2.0, 2.0))
}

fn planar_vec(r: &mut rand::rngs::StdRng, scale: f64) -> Vec6 {
    let mut v = Vec6::zeros();
    for i in [0, 2, 4] {
        v[i] = r.random_range(-scale..scale);
    }
    v
}

fn random_wrench(r: &mut rand::rngs::StdRng) -> Wrench {
    Wrench(Vec6::from_iterator(
        uniform_vec(r, 6, -20.0, 20.0).iter().cloned(),
    ))
}

fn check_cancellation(model: &RobotModel, state: &GeneralizedState, xdd: &Vec6, f1: Wrench, f2: Wrench) {
    let link = model.contact_links()[0];
    let terms = model.compute_terms(state).unwrap();
    let mut accels = Vec::new();
    for f in [f1, f2] {
        let stacked = model.stack_wrenches(&[(link, f)]).unwrap();
        let d = decompose(&Vec6::zeros(), &Vec6::zeros(), DEFAULT_EPS_V);
        let tau = control_torques(
            &terms,
            xdd,
            &stacked,
            ControlMode::CancelAll,
            &d,
            DEFAULT_PINV_RTOL,
        )
        .unwrap();
        let a = closed_loop_accel(&terms, &tau, &stacked);
        assert!((a - xdd).amax() <= 1e-10, "{a} vs {xdd}");
        accels.push(a);
    }
    assert!((accels[0] - accels[1]).amax() <= 1e-10);
}

#[test]
fn cartesian_mass_exact_linearization() {
    let model = RobotModel::cartesian_mass(CartesianMassParams::default()).unwrap();
    let mut r = rng(21);
    for _ in 0..100 {
        let s = GeneralizedState::new(
            uniform_vec(&mut r, 6, -1.0, 1.0),
            uniform_vec(&mut r, 6, -1.0, 1.0),
        );
        let xdd = Vec6::from_iterator(uniform_vec(&mut r, 6, -5.0, 5.0).iter().cloned());
        check_cancellation(&model, &s, &xdd, random_wrench(&mut r), random_wrench(&mut r));
    }
}

#[test]
fn planar_exact_linearization_in_the_plane() {
    let model = RobotModel::planar_3link(Planar3LinkParams::default()).unwrap();
    let mut r = rng(22);
    for _ in 0..100 {
        let s = random_planar_state(&mut r);
        let xdd = planar_vec(&mut r, 5.0);
        check_cancellation(&model, &s, &xdd, random_wrench(&mut r), random_wrench(&mut r));
    }
}

#[test]
fn point_mass_torque_is_m_xdd_plus_h() {
    let p = CartesianMassParams {
        mass: 3.0,
        inertia: [3.0; 3],
        gravity: 9.81,
    };
    let model = RobotModel::cartesian_mass(p).unwrap();
    let terms = model.compute_terms(&GeneralizedState::zeros(6)).unwrap();
    let xdd = Vec6::new(1.0, -2.0, 0.5, 0.1, 0.0, -0.3);
    let d = decompose(&Vec6::zeros(), &Vec6::zeros(), DEFAULT_EPS_V);
    let tau = control_torques(
        &terms,
        &xdd,
        &DVector::zeros(6),
        ControlMode::CancelAll,
        &d,
        DEFAULT_PINV_RTOL,
    )
    .unwrap();
    let want = DVector::from_iterator(6, (xdd * 3.0).iter().cloned()) + &terms.h;
    assert!((tau - want).amax() <= 1e-12);
}

#[test]
fn retain_helpful_keeps_parallel_push() {
    let model = RobotModel::cartesian_mass(CartesianMassParams::default()).unwrap();
    let mut r = rng(23);
    for _ in 0..100 {
        let s = GeneralizedState::new(
            uniform_vec(&mut r, 6, -1.0, 1.0),
            uniform_vec(&mut r, 6, -1.0, 1.0),
        );
        let terms = model.compute_terms(&s).unwrap();
        let xdot_d = Vec6::from_iterator(uniform_vec(&mut r, 6, -1.0, 1.0).iter().cloned());
        let push = r.random_range(0.1..10.0);
        // parallel wrench: for this body the induced acceleration is M^-1 f
        let accel_dir = xdot_d.normalize() * push;
        let f = Wrench(Vec6::from_iterator(
            (&terms.m * DVector::from_iterator(6, accel_dir.iter().cloned()))
                .iter()
                .cloned(),
        ));
        let stacked = model.stack_wrenches(&[("com", f)]).unwrap();
        let omega_f = Vec6::from_iterator(
            (&terms.j
                * terms
                    .m
                    .clone()
                    .cholesky()
                    .unwrap()
                    .solve(&(terms.jc.transpose() * &stacked)))
            .iter()
            .cloned(),
        );
        let d = decompose(&omega_f, &xdot_d, DEFAULT_EPS_V);
        assert!(d.alpha > 0.0);
        let xdd = Vec6::from_iterator(uniform_vec(&mut r, 6, -5.0, 5.0).iter().cloned());
        let tau = control_torques(
            &terms,
            &xdd,
            &stacked,
            ControlMode::RetainHelpful,
            &d,
            DEFAULT_PINV_RTOL,
        )
        .unwrap();
        let a = closed_loop_accel(&terms, &tau, &stacked);
        let want = xdd + xdot_d.normalize() * d.alpha;
        assert!((a - want).amax() <= 1e-10);
        assert!((d.alpha - push).abs() <= 1e-10);
    }
}

#[test]
fn opposing_wrench_is_cancelled_in_both_modes() {
    let model = RobotModel::planar_3link(Planar3LinkParams::default()).unwrap();
    let mut r = rng(24);
    let mut checked = 0;
    while checked < 100 {
        let s = random_planar_state(&mut r);
        let terms = model.compute_terms(&s).unwrap();
        let f = random_wrench(&mut r);
        let stacked = model.stack_wrenches(&[("link3", f)]).unwrap();
        let xdot_d = planar_vec(&mut r, 1.0);
        let nu_dot_f = terms
            .m
            .clone()
            .cholesky()
            .unwrap()
            .solve(&(terms.jc.transpose() * &stacked));
        let omega_f = Vec6::from_iterator((&terms.j * nu_dot_f).iter().cloned());
        let d = decompose(&omega_f, &xdot_d, DEFAULT_EPS_V);
        if d.alpha > 0.0 {
            continue;
        }
        let xdd = planar_vec(&mut r, 5.0);
        let a = control_torques(
            &terms,
            &xdd,
            &stacked,
            ControlMode::CancelAll,
            &d,
            DEFAULT_PINV_RTOL,
        )
        .unwrap();
        let b = control_torques(
            &terms,
            &xdd,
            &stacked,
            ControlMode::RetainHelpful,
            &d,
            DEFAULT_PINV_RTOL,
        )
        .unwrap();
        assert_eq!(a, b);
        checked += 1;
    }
}

#[test]
fn stretched_chain_is_singular() {
    let model = RobotModel::planar_3link(Planar3LinkParams::default()).unwrap();
    let terms = model.compute_terms(&GeneralizedState::zeros(3)).unwrap();
    let d = decompose(&Vec6::zeros(), &Vec6::zeros(), DEFAULT_EPS_V);
    let err = control_torques(
        &terms,
        &Vec6::zeros(),
        &DVector::zeros(6),
        ControlMode::CancelAll,
        &d,
        DEFAULT_PINV_RTOL,
    )
    .unwrap_err();
    match err {
        Error::Singularity { sigma_min, sigma_max } => assert!(sigma_min <= 1e-8 * sigma_max),
        other => panic!("unexpected {other}"),
    }
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn objective_matches_formula() {
    let mut r = rng(25);
    for _ in 0..200 {
        let mut v = || Vec6::from_iterator(uniform_vec(&mut r, 6, -3.0, 3.0).iter().cloned());
        let (xd, xdd, xdot, ie) = (v(), v(), v(), v());
        let a = Mat6::from_fn(|i, j| ((i * 7 + j * 3) % 5) as f64 * 0.1);
        let kp = a * a.transpose() + Mat6::identity() * 2.0;
        let kd = Mat6::from_diagonal(&Vec6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0));
        let gains = Gains::new(kp, kd).unwrap();
        let kin = DesiredKinematics {
            x_d: Vec6::zeros(),
            xdot_d: xd,
            xddot_d: xdd,
        };
        let got = control_objective(&kin, &xdot, &TrackingState { int_err: ie }, &gains);
        for i in 0..6 {
            let mut want = xdd[i];
            for j in 0..6 {
                want -= kd[(i, j)] * (xdot[j] - xd[j]) + kp[(i, j)] * ie[j];
            }
            assert!((got[i] - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn objective_zero_error_and_unit_damping() {
    let gains = Gains::scalar(25.0, 1.0).unwrap();
    let kin = DesiredKinematics {
        x_d: Vec6::zeros(),
        xdot_d: Vec6::new(0.3, 0.0, 0.1, 0.0, 0.0, 0.0),
        xddot_d: Vec6::new(1.0, 2.0, 3.0, 0.0, 0.0, 0.0),
    };
    assert_eq!(
        control_objective(&kin, &kin.xdot_d, &TrackingState::default(), &gains),
        kin.xddot_d
    );
    let still = DesiredKinematics {
        x_d: Vec6::zeros(),
        xdot_d: Vec6::zeros(),
        xddot_d: Vec6::zeros(),
    };
    let out = control_objective(
        &still,
        &Vec6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        &TrackingState::default(),
        &gains,
    );
    assert_eq!(out, Vec6::new(-1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
}

#[test]
fn error_integral_is_prefix_sum() {
    let mut r = rng(26);
    let dt = 1e-3;
    let mut s = TrackingState::default();
    let mut sum = Vec6::zeros();
    for _ in 0..1000 {
        let xdot = Vec6::from_iterator(uniform_vec(&mut r, 6, -1.0, 1.0).iter().cloned());
        let xdot_d = Vec6::from_iterator(uniform_vec(&mut r, 6, -1.0, 1.0).iter().cloned());
        s = s.integrate_error(&xdot, &xdot_d, dt, f64::INFINITY);
        sum += (xdot - xdot_d) * dt;
        assert_eq!(s.int_err, sum);
    }
    let unchanged = s.integrate_error(&sum, &sum, dt, f64::INFINITY);
    assert_eq!(unchanged, s);
}

#[test]
fn error_integral_is_clamped() {
    let mut s = TrackingState::default();
    let e = Vec6::from_element(1.0);
    for _ in 0..100 {
        s = s.integrate_error(&e, &Vec6::zeros(), 1.0, 10.0);
    }
    assert_eq!(s.int_err, Vec6::from_element(10.0));
}

#[test]
fn cartesian_mass_tracks_the_reference() {
    let mut c = SimConfig::from_toml_str("duration = 6.0\nadvancement = false").unwrap();
    c.dt = 1e-3;
    let out = run_simulation(&c).unwrap();
    let after: Vec<_> = out.log.rows.iter().filter(|r| r.t >= 1.0).collect();
    assert!(!after.is_empty());
    for row in after {
        assert!((row.xdot - row.xdot_d).norm() <= 1e-3, "t = {}", row.t);
    }
}
