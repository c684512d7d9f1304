//! Rigid-body models and forward dynamics.
//!
//! Equations of motion take the usual form
//!
//! ```text
//! M(q) nu_dot + h(q, nu) = B tau + Jc^T f
//! ```
//!
//! with `h = C(q, nu) nu + G(q)`. `Jc` stacks one 6-row Jacobian per contact
//! link, so `Jc^T` maps stacked world-frame wrenches to generalized forces.
//!
//! Two fixed-base models are provided:
//!
//! * cartesian-mass: one fully actuated 6-DoF body (`B = I`), the CoM
//!   surrogate used by the stand-up scenario. Rotational coordinates are a
//!   rotation vector about a fixed nominal orientation; gyroscopic terms are
//!   neglected so `M` is constant and `C = 0`.
//! * planar-3link: an RRR chain in the vertical x-z plane with gravity along
//!   `-z`. Joint axes point along `-y`, so positive angles lift the chain from
//!   `+x` toward `+z`. Each link is a rod with its mass at the midpoint.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::{Error, Result, Vec6};

/// Standard gravity, m/s^2.
pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedState {
    pub q: DVector<f64>,
    pub nu: DVector<f64>,
}

impl GeneralizedState {
    pub fn new(q: DVector<f64>, nu: DVector<f64>) -> Self {
        Self { q, nu }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            q: DVector::zeros(dim),
            nu: DVector::zeros(dim),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.nu.iter()).all(|v| v.is_finite())
    }
}

/// World-frame wrench at a link frame origin: force (N) then moment (N m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench(pub Vec6);

impl Wrench {
    pub fn zero() -> Self {
        Wrench(Vec6::zeros())
    }

    pub fn from_force(fx: f64, fy: f64, fz: f64) -> Self {
        Wrench(Vec6::new(fx, fy, fz, 0.0, 0.0, 0.0))
    }

    pub fn force(&self) -> nalgebra::Vector3<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    pub fn moment(&self) -> nalgebra::Vector3<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    pub fn force_norm(&self) -> f64 {
        self.force().norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Default for Wrench {
    fn default() -> Self {
        Self::zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartesianMassParams {
    pub mass: f64,
    /// Principal rotational inertia (kg m^2).
    pub inertia: [f64; 3],
    pub gravity: f64,
}

impl Default for CartesianMassParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            inertia: [0.1, 0.1, 0.1],
            gravity: STANDARD_GRAVITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Planar3LinkParams {
    pub masses: [f64; 3],
    pub lengths: [f64; 3],
    /// Rotational inertia of each link about its center of mass.
    pub inertias: [f64; 3],
    pub gravity: f64,
}

impl Default for Planar3LinkParams {
    fn default() -> Self {
        Self {
            masses: [1.0, 1.0, 1.0],
            lengths: [1.0, 1.0, 1.0],
            inertias: [1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0],
            gravity: STANDARD_GRAVITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    CartesianMass(CartesianMassParams),
    Planar3Link(Planar3LinkParams),
}

impl ModelKind {
    pub fn link_names(&self) -> &'static [&'static str] {
        match self {
            ModelKind::CartesianMass(_) => &["com"],
            ModelKind::Planar3Link(_) => &["link1", "link2", "link3"],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::CartesianMass(_) => "cartesian-mass",
            ModelKind::Planar3Link(_) => "planar-3link",
        }
    }
}

/// All terms of the equations of motion at one state.
#[derive(Debug, Clone)]
pub struct DynamicsTerms {
    pub m: DMatrix<f64>,
    /// Bias forces `C(q, nu) nu + G(q)`.
    pub h: DVector<f64>,
    pub g: DVector<f64>,
    /// Actuation selector, velocity dim x actuated dim.
    pub b: DMatrix<f64>,
    /// Stacked contact Jacobians, `6 n_c` x velocity dim.
    pub jc: DMatrix<f64>,
    /// Task-link Jacobian, 6 x velocity dim.
    pub j: DMatrix<f64>,
    pub jdot_nu: Vec6,
}

#[derive(Debug, Clone)]
pub struct RobotModel {
    kind: ModelKind,
    task_link: usize,
    contact_links: Vec<usize>,
}

impl RobotModel {
    pub fn new(kind: ModelKind, task_link: &str, contact_links: &[&str]) -> Result<Self> {
        validate_params(&kind)?;
        let names = kind.link_names();
        let lookup = |name: &str| {
            names
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::UnknownLink(name.to_string()))
        };
        let task_link = lookup(task_link)?;
        let mut contacts = Vec::with_capacity(contact_links.len());
        for name in contact_links {
            let idx = lookup(name)?;
            if contacts.contains(&idx) {
                return Err(Error::InvalidModel(format!("contact link `{name}` listed twice")));
            }
            contacts.push(idx);
        }
        Ok(Self {
            kind,
            task_link,
            contact_links: contacts,
        })
    }

    /// Cartesian body whose only link (`com`) is both task and contact link.
    pub fn cartesian_mass(params: CartesianMassParams) -> Result<Self> {
        Self::new(ModelKind::CartesianMass(params), "com", &["com"])
    }

    /// Planar chain tracking its end link, with the end link as the only
    /// contact.
    pub fn planar_3link(params: Planar3LinkParams) -> Result<Self> {
        Self::new(ModelKind::Planar3Link(params), "link3", &["link3"])
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn dof(&self) -> usize {
        match self.kind {
            ModelKind::CartesianMass(_) => 6,
            ModelKind::Planar3Link(_) => 3,
        }
    }

    pub fn actuated_dim(&self) -> usize {
        // both built-in models are fixed-base and fully actuated
        self.dof()
    }

    pub fn task_link(&self) -> &'static str {
        self.kind.link_names()[self.task_link]
    }

    pub fn contact_links(&self) -> Vec<&'static str> {
        self.contact_links
            .iter()
            .map(|&i| self.kind.link_names()[i])
            .collect()
    }

    fn link_index(&self, name: &str) -> Result<usize> {
        self.kind
            .link_names()
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| Error::UnknownLink(name.to_string()))
    }

    fn contact_slot(&self, name: &str) -> Result<usize> {
        let idx = self.link_index(name)?;
        self.contact_links
            .iter()
            .position(|&c| c == idx)
            .ok_or_else(|| Error::UnknownLink(format!("{name} (not a contact link)")))
    }

    pub fn check_state(&self, state: &GeneralizedState) -> Result<()> {
        let n = self.dof();
        if state.q.len() != n {
            return Err(Error::Dimension {
                context: "configuration q",
                expected: n,
                actual: state.q.len(),
            });
        }
        if state.nu.len() != n {
            return Err(Error::Dimension {
                context: "velocity nu",
                expected: n,
                actual: state.nu.len(),
            });
        }
        if !state.is_finite() {
            return Err(Error::NonFinite("generalized state"));
        }
        Ok(())
    }

    /// 6D pose of a link frame: position then rotation vector.
    pub fn link_pose(&self, link: &str, q: &DVector<f64>) -> Result<Vec6> {
        let idx = self.link_index(link)?;
        Ok(match &self.kind {
            ModelKind::CartesianMass(_) => Vec6::from_iterator(q.iter().cloned()),
            ModelKind::Planar3Link(p) => {
                let (x, z) = planar_point(&p.lengths, q, idx, 1.0);
                let phi = cumulative_angles(q)[idx];
                Vec6::new(x, 0.0, z, 0.0, -phi, 0.0)
            }
        })
    }

    pub fn task_pose(&self, q: &DVector<f64>) -> Vec6 {
        self.link_pose(self.task_link(), q)
            .expect("task link validated at construction")
    }

    /// Geometric Jacobian (6 x dof) of a link frame origin.
    pub fn link_jacobian(&self, link: &str, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        let idx = self.link_index(link)?;
        Ok(match &self.kind {
            ModelKind::CartesianMass(_) => DMatrix::identity(6, 6),
            ModelKind::Planar3Link(p) => {
                let lin = planar_point_jacobian(&p.lengths, q, idx, 1.0);
                let mut j = DMatrix::zeros(6, 3);
                for col in 0..3 {
                    j[(0, col)] = lin[(0, col)];
                    j[(2, col)] = lin[(1, col)];
                    if col <= idx {
                        j[(4, col)] = -1.0;
                    }
                }
                j
            }
        })
    }

    /// `J_dot nu` for a link frame origin.
    pub fn link_bias_acceleration(&self, link: &str, state: &GeneralizedState) -> Result<Vec6> {
        let idx = self.link_index(link)?;
        Ok(match &self.kind {
            ModelKind::CartesianMass(_) => Vec6::zeros(),
            ModelKind::Planar3Link(p) => {
                let (ax, az) = planar_point_bias(&p.lengths, &state.q, &state.nu, idx, 1.0);
                Vec6::new(ax, 0.0, az, 0.0, 0.0, 0.0)
            }
        })
    }

    /// Task Jacobian `J` and `J_dot nu` at the current state.
    pub fn task_jacobian(&self, state: &GeneralizedState) -> Result<(DMatrix<f64>, Vec6)> {
        self.check_state(state)?;
        let link = self.task_link();
        Ok((
            self.link_jacobian(link, &state.q)?,
            self.link_bias_acceleration(link, state)?,
        ))
    }

    pub fn mass_matrix(&self, q: &DVector<f64>) -> DMatrix<f64> {
        match &self.kind {
            ModelKind::CartesianMass(p) => {
                let d = [p.mass, p.mass, p.mass, p.inertia[0], p.inertia[1], p.inertia[2]];
                DMatrix::from_diagonal(&DVector::from_row_slice(&d))
            }
            ModelKind::Planar3Link(p) => {
                let mut m = DMatrix::zeros(3, 3);
                for i in 0..3 {
                    let jc = planar_point_jacobian(&p.lengths, q, i, 0.5);
                    m += jc.transpose() * &jc * p.masses[i];
                    // angular velocity of link i is the sum of the first i+1 rates
                    for r in 0..=i {
                        for c in 0..=i {
                            m[(r, c)] += p.inertias[i];
                        }
                    }
                }
                // the sum of symmetric products is symmetric up to rounding; make it exact
                let mt = m.transpose();
                (m + mt) * 0.5
            }
        }
    }

    pub fn gravity_vector(&self, q: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            ModelKind::CartesianMass(p) => {
                let mut g = DVector::zeros(6);
                g[2] = p.mass * p.gravity;
                g
            }
            ModelKind::Planar3Link(p) => {
                let mut g = DVector::zeros(3);
                for i in 0..3 {
                    let jc = planar_point_jacobian(&p.lengths, q, i, 0.5);
                    for col in 0..3 {
                        g[col] += p.masses[i] * p.gravity * jc[(1, col)];
                    }
                }
                g
            }
        }
    }

    /// `C(q, nu) nu`.
    pub fn coriolis_vector(&self, state: &GeneralizedState) -> DVector<f64> {
        match &self.kind {
            ModelKind::CartesianMass(_) => DVector::zeros(6),
            ModelKind::Planar3Link(p) => {
                let mut c = DVector::zeros(3);
                for i in 0..3 {
                    let jc = planar_point_jacobian(&p.lengths, &state.q, i, 0.5);
                    let (bx, bz) = planar_point_bias(&p.lengths, &state.q, &state.nu, i, 0.5);
                    for col in 0..3 {
                        c[col] += p.masses[i] * (jc[(0, col)] * bx + jc[(1, col)] * bz);
                    }
                }
                c
            }
        }
    }

    fn selector(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dof(), self.actuated_dim())
    }

    fn contact_jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let names = self.kind.link_names();
        let mut jc = DMatrix::zeros(6 * self.contact_links.len(), self.dof());
        for (slot, &link) in self.contact_links.iter().enumerate() {
            let j = self
                .link_jacobian(names[link], q)
                .expect("contact links validated at construction");
            jc.view_mut((6 * slot, 0), (6, self.dof())).copy_from(&j);
        }
        jc
    }

    pub fn compute_terms(&self, state: &GeneralizedState) -> Result<DynamicsTerms> {
        self.check_state(state)?;
        let m = self.mass_matrix(&state.q);
        let g = self.gravity_vector(&state.q);
        let h = self.coriolis_vector(state) + &g;
        let (j, jdot_nu) = self.task_jacobian(state)?;
        Ok(DynamicsTerms {
            m,
            h,
            g,
            b: self.selector(),
            jc: self.contact_jacobian(&state.q),
            j,
            jdot_nu,
        })
    }

    /// Stack per-link wrenches into the `6 n_c` vector matching `Jc`.
    /// Wrenches on the same link add up.
    pub fn stack_wrenches(&self, fext: &[(&str, Wrench)]) -> Result<DVector<f64>> {
        let mut stacked = DVector::zeros(6 * self.contact_links.len());
        for (link, w) in fext {
            if !w.is_finite() {
                return Err(Error::NonFinite("external wrench"));
            }
            let slot = self.contact_slot(link)?;
            let mut seg = stacked.rows_mut(6 * slot, 6);
            seg += w.0;
        }
        Ok(stacked)
    }

    /// `nu_dot = M^-1 (B tau + Jc^T f - h)`.
    pub fn forward_dynamics(
        &self,
        state: &GeneralizedState,
        tau: &DVector<f64>,
        fext: &[(&str, Wrench)],
    ) -> Result<DVector<f64>> {
        let terms = self.compute_terms(state)?;
        let f = self.stack_wrenches(fext)?;
        forward_dynamics_from_terms(&terms, tau, &f)
    }

    pub fn kinetic_energy(&self, state: &GeneralizedState) -> f64 {
        let m = self.mass_matrix(&state.q);
        0.5 * state.nu.dot(&(&m * &state.nu))
    }

    /// Gravitational potential energy. For the planar chain the datum is the
    /// straight-down configuration so the value is never negative.
    pub fn potential_energy(&self, q: &DVector<f64>) -> f64 {
        match &self.kind {
            ModelKind::CartesianMass(p) => p.mass * p.gravity * q[2],
            ModelKind::Planar3Link(p) => {
                let mut v = 0.0;
                let mut reach = 0.0;
                for i in 0..3 {
                    let (_, z) = planar_point(&p.lengths, q, i, 0.5);
                    let lowest = -(reach + 0.5 * p.lengths[i]);
                    v += p.masses[i] * p.gravity * (z - lowest);
                    reach += p.lengths[i];
                }
                v
            }
        }
    }

    pub fn total_energy(&self, state: &GeneralizedState) -> f64 {
        self.kinetic_energy(state) + self.potential_energy(&state.q)
    }
}

/// Forward dynamics from precomputed terms and a stacked wrench vector.
pub fn forward_dynamics_from_terms(
    terms: &DynamicsTerms,
    tau: &DVector<f64>,
    fext: &DVector<f64>,
) -> Result<DVector<f64>> {
    if tau.len() != terms.b.ncols() {
        return Err(Error::Dimension {
            context: "joint torques",
            expected: terms.b.ncols(),
            actual: tau.len(),
        });
    }
    if fext.len() != terms.jc.nrows() {
        return Err(Error::Dimension {
            context: "stacked wrenches",
            expected: terms.jc.nrows(),
            actual: fext.len(),
        });
    }
    if tau.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("joint torques"));
    }
    let rhs = &terms.b * tau + terms.jc.transpose() * fext - &terms.h;
    let chol = Cholesky::new(terms.m.clone()).ok_or(Error::SingularMass)?;
    Ok(chol.solve(&rhs))
}

/// Semi-implicit Euler: velocity first, then configuration with the new
/// velocity. Both built-in models are fixed-base, so `q` integrates as a
/// plain vector.
pub fn step(state: &GeneralizedState, nu_dot: &DVector<f64>, dt: f64) -> Result<GeneralizedState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    if nu_dot.len() != state.nu.len() {
        return Err(Error::Dimension {
            context: "nu_dot",
            expected: state.nu.len(),
            actual: nu_dot.len(),
        });
    }
    if !state.is_finite() || nu_dot.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrator input"));
    }
    let nu = &state.nu + nu_dot * dt;
    let q = &state.q + &nu * dt;
    Ok(GeneralizedState { q, nu })
}

fn validate_params(kind: &ModelKind) -> Result<()> {
    let positive = |what: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("{what} must be positive, got {v}")))
        }
    };
    let gravity = |v: f64| {
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!(
                "gravity must be finite and >= 0, got {v}"
            )))
        }
    };
    match kind {
        ModelKind::CartesianMass(p) => {
            positive("mass", p.mass)?;
            for &i in &p.inertia {
                positive("inertia", i)?;
            }
            gravity(p.gravity)
        }
        ModelKind::Planar3Link(p) => {
            for i in 0..3 {
                positive("link mass", p.masses[i])?;
                positive("link length", p.lengths[i])?;
                positive("link inertia", p.inertias[i])?;
            }
            gravity(p.gravity)
        }
    }
}

fn cumulative_angles(q: &DVector<f64>) -> [f64; 3] {
    let mut phi = [0.0; 3];
    let mut acc = 0.0;
    for i in 0..3 {
        acc += q[i];
        phi[i] = acc;
    }
    phi
}

fn cumulative_rates(nu: &DVector<f64>) -> [f64; 3] {
    cumulative_angles(nu)
}

/// Segment lengths reaching a point on link `link` located at `frac` of its
/// length.
fn segments(lengths: &[f64; 3], link: usize, frac: f64) -> [f64; 3] {
    let mut s = [0.0; 3];
    s[..link].copy_from_slice(&lengths[..link]);
    s[link] = frac * lengths[link];
    s
}

fn planar_point(lengths: &[f64; 3], q: &DVector<f64>, link: usize, frac: f64) -> (f64, f64) {
    let phi = cumulative_angles(q);
    let seg = segments(lengths, link, frac);
    (0..=link).fold((0.0, 0.0), |(x, z), k| {
        (x + seg[k] * phi[k].cos(), z + seg[k] * phi[k].sin())
    })
}

/// 2 x 3 Jacobian of a planar point, rows (x, z).
fn planar_point_jacobian(lengths: &[f64; 3], q: &DVector<f64>, link: usize, frac: f64) -> DMatrix<f64> {
    let phi = cumulative_angles(q);
    let seg = segments(lengths, link, frac);
    let mut j = DMatrix::zeros(2, 3);
    for col in 0..=link {
        for k in col..=link {
            j[(0, col)] -= seg[k] * phi[k].sin();
            j[(1, col)] += seg[k] * phi[k].cos();
        }
    }
    j
}

/// Velocity-product acceleration `J_dot q_dot` of a planar point.
fn planar_point_bias(
    lengths: &[f64; 3],
    q: &DVector<f64>,
    nu: &DVector<f64>,
    link: usize,
    frac: f64,
) -> (f64, f64) {
    let phi = cumulative_angles(q);
    let rate = cumulative_rates(nu);
    let seg = segments(lengths, link, frac);
    (0..=link).fold((0.0, 0.0), |(x, z), k| {
        let w2 = rate[k] * rate[k];
        (x - seg[k] * w2 * phi[k].cos(), z - seg[k] * w2 * phi[k].sin())
    })
}
