//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the dynamics of the crate under test: the planar
//! chain is rebuilt from its kinematics alone and the equations of motion are
//! recovered numerically from the Lagrangian.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn uniform_vec(r: &mut StdRng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| r.random_range(lo..hi)))
}

/// Relative error with a unit floor on the reference magnitude.
pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn rel_err_mat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Planar RRR chain described only by its geometry and mass distribution.
#[derive(Debug, Clone)]
pub struct PlanarChain {
    pub masses: [f64; 3],
    pub lengths: [f64; 3],
    pub inertias: [f64; 3],
    pub gravity: f64,
}

impl PlanarChain {
    pub fn unit() -> Self {
        Self {
            masses: [1.0; 3],
            lengths: [1.0; 3],
            inertias: [1.0 / 12.0; 3],
            gravity: 9.81,
        }
    }

    /// Absolute link angles and center-of-mass positions, in any field that
    /// supports the trigonometry we need.
    fn com_positions<T: Scalar>(&self, q: &[T]) -> ([T; 3], [(T, T); 3]) {
        let mut angles = [T::zero(); 3];
        let mut coms = [(T::zero(), T::zero()); 3];
        let mut theta = T::zero();
        let (mut jx, mut jz) = (T::zero(), T::zero());
        for i in 0..3 {
            theta = theta + q[i];
            angles[i] = theta;
            let (c, s) = (theta.cos(), theta.sin());
            let half = T::from(0.5 * self.lengths[i]);
            coms[i] = (jx + half * c, jz + half * s);
            let l = T::from(self.lengths[i]);
            jx = jx + l * c;
            jz = jz + l * s;
        }
        (angles, coms)
    }

    /// Tip position (x, z) and absolute tip angle.
    pub fn tip(&self, q: &[f64]) -> (f64, f64, f64) {
        let (mut x, mut z, mut th) = (0.0, 0.0, 0.0);
        for (qi, l) in q.iter().zip(self.lengths) {
            th += qi;
            x += l * th.cos();
            z += l * th.sin();
        }
        (x, z, th)
    }

    /// Kinetic energy from link velocities. Velocities come from a
    /// complex-step derivative of the forward kinematics along `nu`, which
    /// is exact to rounding.
    pub fn kinetic(&self, q: &[f64], nu: &[f64]) -> f64 {
        let h = 1e-30;
        let qc: Vec<Complex64> = q
            .iter()
            .zip(nu)
            .map(|(&a, &v)| Complex64::new(a, h * v))
            .collect();
        let (angles, coms) = self.com_positions(&qc);
        let mut t = 0.0;
        for i in 0..3 {
            let vx = coms[i].0.im / h;
            let vz = coms[i].1.im / h;
            let w = angles[i].im / h;
            t += 0.5 * self.masses[i] * (vx * vx + vz * vz) + 0.5 * self.inertias[i] * w * w;
        }
        t
    }

    pub fn potential(&self, q: &[f64]) -> f64 {
        let (_, coms) = self.com_positions(q);
        (0..3).map(|i| self.masses[i] * self.gravity * coms[i].1).sum()
    }

    /// Mass matrix from the kinetic energy by polarization, column by column.
    pub fn mass_matrix(&self, q: &[f64]) -> DMatrix<f64> {
        let e = |i: usize| {
            let mut v = [0.0; 3];
            v[i] = 1.0;
            v
        };
        let mut m = DMatrix::zeros(3, 3);
        for i in 0..3 {
            m[(i, i)] = 2.0 * self.kinetic(q, &e(i));
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let mut s = e(i);
                s[j] = 1.0;
                let v = self.kinetic(q, &s) - 0.5 * (m[(i, i)] + m[(j, j)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn gravity_vector(&self, q: &[f64]) -> DVector<f64> {
        let eps = 1e-6;
        DVector::from_iterator(
            3,
            (0..3).map(|i| {
                let (mut a, mut b) = (q.to_vec(), q.to_vec());
                a[i] += eps;
                b[i] -= eps;
                (self.potential(&a) - self.potential(&b)) / (2.0 * eps)
            }),
        )
    }

    /// Bias forces `d/dt(dT/dnu) - dT/dq + G` at zero acceleration, using
    /// central differences in the configuration.
    pub fn bias(&self, q: &[f64], nu: &[f64]) -> DVector<f64> {
        let eps = 1e-5;
        let nu_v = DVector::from_row_slice(nu);
        let shifted = |s: f64| -> Vec<f64> { q.iter().zip(nu).map(|(a, v)| a + s * v).collect() };
        let m_dot = (self.mass_matrix(&shifted(eps)) - self.mass_matrix(&shifted(-eps))) / (2.0 * eps);
        let dt_dq = DVector::from_iterator(
            3,
            (0..3).map(|i| {
                let (mut a, mut b) = (q.to_vec(), q.to_vec());
                a[i] += eps;
                b[i] -= eps;
                (self.kinetic(&a, nu) - self.kinetic(&b, nu)) / (2.0 * eps)
            }),
        );
        m_dot * nu_v - dt_dq + self.gravity_vector(q)
    }

    /// Generalized acceleration from a dense solve of the oracle terms.
    pub fn forward_dynamics(&self, q: &[f64], nu: &[f64], generalized_force: &DVector<f64>) -> DVector<f64> {
        let m = self.mass_matrix(q);
        let rhs = generalized_force - self.bias(q, nu);
        m.lu().solve(&rhs).expect("mass matrix invertible")
    }

    /// Tip Jacobian rows (x, z, angle) by central differences.
    pub fn tip_jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        let eps = 1e-6;
        let mut j = DMatrix::zeros(3, 3);
        for c in 0..3 {
            let (mut a, mut b) = (q.to_vec(), q.to_vec());
            a[c] += eps;
            b[c] -= eps;
            let (pa, pb) = (self.tip(&a), self.tip(&b));
            j[(0, c)] = (pa.0 - pb.0) / (2.0 * eps);
            j[(1, c)] = (pa.1 - pb.1) / (2.0 * eps);
            j[(2, c)] = (pa.2 - pb.2) / (2.0 * eps);
        }
        j
    }
}

pub trait Scalar: Copy + std::ops::Add<Output = Self> + std::ops::Mul<Output = Self> + From<f64> {
    fn zero() -> Self;
    fn cos(self) -> Self;
    fn sin(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
}

/// `min(upper, max(1, xdot . d / |d|^2))`, or 1 for a vanishing tangent.
pub fn psi_dot_formula(xdot: &[f64; 6], d: &[f64; 6], upper: f64, eps_v: f64) -> f64 {
    let dot: f64 = xdot.iter().zip(d).map(|(a, b)| a * b).sum();
    let nn: f64 = d.iter().map(|v| v * v).sum();
    if nn.sqrt() <= eps_v {
        return 1.0;
    }
    let ratio = dot / nn;
    let lower = if ratio > 1.0 { ratio } else { 1.0 };
    if lower < upper {
        lower
    } else {
        upper
    }
}

/// Feet or hands force magnitude of a trapezoidal pulse evaluated from its
/// corner points.
pub fn trapezoid(t: f64, t0: f64, t1: f64, ramp: f64, amplitude: f64) -> f64 {
    if t <= t0 || t >= t1 {
        0.0
    } else if t < t0 + ramp {
        amplitude * (t - t0) / ramp
    } else if t > t1 - ramp {
        amplitude * (t1 - t) / ramp
    } else {
        amplitude
    }
}
