//! Parametric reference curves `psi -> x_d(psi)` in R^6.
//!
//! Each coordinate is an independent natural cubic spline through the
//! waypoints. Knots are the nominal timestamps of the reference, so playing
//! the curve back at `psi_dot = 1` reproduces the nominal motion. Past the
//! last knot the curve holds the final pose with zero derivatives.

use crate::{Error, Result, Vec6};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub psi: f64,
    pub pose: Vec6,
}

impl Waypoint {
    pub fn new(psi: f64, pose: Vec6) -> Self {
        Self { psi, pose }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredKinematics {
    pub x_d: Vec6,
    pub xdot_d: Vec6,
    pub xddot_d: Vec6,
}

#[derive(Debug, Clone)]
pub struct ParamCurve {
    knots: Vec<f64>,
    values: Vec<Vec6>,
    /// Second derivatives at the knots; zero at both ends.
    moments: Vec<Vec6>,
}

impl ParamCurve {
    pub fn new(waypoints: &[Waypoint]) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "need at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        if waypoints[0].psi != 0.0 {
            return Err(Error::InvalidCurve(format!(
                "first knot must be 0, got {}",
                waypoints[0].psi
            )));
        }
        for w in waypoints {
            if !w.psi.is_finite() || w.pose.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidCurve("non-finite waypoint".into()));
            }
        }
        for pair in waypoints.windows(2) {
            if pair[1].psi <= pair[0].psi {
                return Err(Error::InvalidCurve(format!(
                    "knots must be strictly increasing ({} then {})",
                    pair[0].psi, pair[1].psi
                )));
            }
        }

        let knots: Vec<f64> = waypoints.iter().map(|w| w.psi).collect();
        let values: Vec<Vec6> = waypoints.iter().map(|w| w.pose).collect();
        let moments = natural_moments(&knots, &values);
        Ok(Self {
            knots,
            values,
            moments,
        })
    }

    pub fn psi_end(&self) -> f64 {
        *self.knots.last().expect("at least two knots")
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn start(&self) -> Vec6 {
        self.values[0]
    }

    pub fn goal(&self) -> Vec6 {
        *self.values.last().expect("at least two knots")
    }

    pub fn waypoints(&self) -> Vec<Waypoint> {
        self.knots
            .iter()
            .zip(&self.values)
            .map(|(&psi, &pose)| Waypoint { psi, pose })
            .collect()
    }

    pub fn eval(&self, psi: f64) -> Result<Vec6> {
        Ok(match self.locate(psi)? {
            Some(seg) => seg.value(),
            None => self.goal(),
        })
    }

    pub fn deriv(&self, psi: f64) -> Result<Vec6> {
        Ok(match self.locate(psi)? {
            Some(seg) => seg.first(),
            None => Vec6::zeros(),
        })
    }

    pub fn deriv2(&self, psi: f64) -> Result<Vec6> {
        Ok(match self.locate(psi)? {
            Some(seg) => seg.second(),
            None => Vec6::zeros(),
        })
    }

    /// Reference pose, velocity and acceleration at `psi` moving at rate
    /// `psi_dot`. `psi_ddot` is taken as zero.
    pub fn desired_kinematics(&self, psi: f64, psi_dot: f64) -> Result<DesiredKinematics> {
        if !(psi_dot >= 0.0) {
            return Err(Error::NegativeParameter(psi_dot));
        }
        Ok(match self.locate(psi)? {
            Some(seg) => DesiredKinematics {
                x_d: seg.value(),
                xdot_d: seg.first() * psi_dot,
                xddot_d: seg.second() * (psi_dot * psi_dot),
            },
            None => DesiredKinematics {
                x_d: self.goal(),
                xdot_d: Vec6::zeros(),
                xddot_d: Vec6::zeros(),
            },
        })
    }

    /// Segment containing `psi`, or `None` once the curve is clamped.
    fn locate(&self, psi: f64) -> Result<Option<Segment<'_>>> {
        if psi.is_nan() || psi < 0.0 {
            return Err(Error::NegativeParameter(psi));
        }
        if psi >= self.psi_end() {
            return Ok(None);
        }
        // index of the last knot <= psi
        let i = self.knots.partition_point(|&k| k <= psi) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        Ok(Some(Segment {
            h,
            a: (self.knots[i + 1] - psi) / h,
            b: (psi - self.knots[i]) / h,
            y0: &self.values[i],
            y1: &self.values[i + 1],
            m0: &self.moments[i],
            m1: &self.moments[i + 1],
        }))
    }
}

struct Segment<'a> {
    h: f64,
    a: f64,
    b: f64,
    y0: &'a Vec6,
    y1: &'a Vec6,
    m0: &'a Vec6,
    m1: &'a Vec6,
}

impl Segment<'_> {
    fn value(&self) -> Vec6 {
        let (a, b, h) = (self.a, self.b, self.h);
        self.y0 * a + self.y1 * b + (self.m0 * (a * a * a - a) + self.m1 * (b * b * b - b)) * (h * h / 6.0)
    }

    fn first(&self) -> Vec6 {
        let (a, b, h) = (self.a, self.b, self.h);
        (self.y1 - self.y0) / h - self.m0 * ((3.0 * a * a - 1.0) * h / 6.0)
            + self.m1 * ((3.0 * b * b - 1.0) * h / 6.0)
    }

    fn second(&self) -> Vec6 {
        self.m0 * self.a + self.m1 * self.b
    }
}

/// Knot second derivatives of the natural cubic spline (Thomas algorithm,
/// all six coordinates at once).
fn natural_moments(knots: &[f64], values: &[Vec6]) -> Vec<Vec6> {
    let n = knots.len();
    let mut moments = vec![Vec6::zeros(); n];
    if n < 3 {
        return moments;
    }
    let interior = n - 2;
    let mut diag = vec![0.0; interior];
    let mut upper = vec![0.0; interior];
    let mut rhs = vec![Vec6::zeros(); interior];
    for r in 0..interior {
        let i = r + 1;
        let h0 = knots[i] - knots[i - 1];
        let h1 = knots[i + 1] - knots[i];
        diag[r] = 2.0 * (h0 + h1);
        upper[r] = h1;
        rhs[r] = ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0) * 6.0;
    }
    // forward sweep; the sub-diagonal entry of row r is h0 of knot r+1
    for r in 1..interior {
        let lower = knots[r + 1] - knots[r];
        let w = lower / diag[r - 1];
        diag[r] -= w * upper[r - 1];
        let prev = rhs[r - 1];
        rhs[r] -= prev * w;
    }
    let mut solution = vec![Vec6::zeros(); interior];
    solution[interior - 1] = rhs[interior - 1] / diag[interior - 1];
    for r in (0..interior - 1).rev() {
        solution[r] = (rhs[r] - solution[r + 1] * upper[r]) / diag[r];
    }
    moments[1..n - 1].copy_from_slice(&solution);
    moments
}
