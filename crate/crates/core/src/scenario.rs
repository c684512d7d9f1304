//! Four-phase sit-to-stand script.
//!
//! The robot starts seated (S1), shifts its CoM forward (S2), then forward and
//! up (S3), and finally straight up to an erect stance (S4). Phase changes are
//! triggered by force magnitudes on two scripted channels: a pull at the hands
//! starts the motion, and rising load on the feet marks the later phases.

use serde::{Deserialize, Serialize};

use crate::dynamics::Wrench;
use crate::trajectory::{ParamCurve, Waypoint};
use crate::{Error, Result, Vec6};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum StandUpPhase {
    #[default]
    ChairBalance,
    ComForward,
    ComForwardUp,
    FullErect,
}

impl StandUpPhase {
    /// 1-based phase number.
    pub fn index(self) -> u8 {
        match self {
            StandUpPhase::ChairBalance => 1,
            StandUpPhase::ComForward => 2,
            StandUpPhase::ComForwardUp => 3,
            StandUpPhase::FullErect => 4,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Some(match i {
            1 => StandUpPhase::ChairBalance,
            2 => StandUpPhase::ComForward,
            3 => StandUpPhase::ComForwardUp,
            4 => StandUpPhase::FullErect,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            StandUpPhase::ChairBalance => "S1-ChairBalance",
            StandUpPhase::ComForward => "S2-ComForward",
            StandUpPhase::ComForwardUp => "S3-ComForwardUp",
            StandUpPhase::FullErect => "S4-FullErect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Hand force (N) that starts the stand-up.
    pub hands_start: f64,
    /// Feet force (N) for S2 -> S3.
    pub feet_s3: f64,
    /// Feet force (N) for S3 -> S4.
    pub feet_s4: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            hands_start: 5.0,
            feet_s3: 20.0,
            feet_s4: 40.0,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hands_start", self.hands_start),
            ("feet_s3", self.feet_s3),
            ("feet_s4", self.feet_s4),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "threshold {name} must be positive, got {v}"
                )));
            }
        }
        if self.feet_s4 < self.feet_s3 {
            return Err(Error::Config(format!(
                "feet_s4 ({}) must not be below feet_s3 ({})",
                self.feet_s4, self.feet_s3
            )));
        }
        Ok(())
    }
}

/// One step of the phase machine. Thresholds are inclusive and compare the
/// norm of the force part of the wrench. At most one transition per call.
pub fn update_phase(phase: StandUpPhase, hands: &Wrench, feet: &Wrench, th: &Thresholds) -> StandUpPhase {
    match phase {
        StandUpPhase::ChairBalance if hands.force_norm() >= th.hands_start => StandUpPhase::ComForward,
        StandUpPhase::ComForward if feet.force_norm() >= th.feet_s3 => StandUpPhase::ComForwardUp,
        StandUpPhase::ComForwardUp if feet.force_norm() >= th.feet_s4 => StandUpPhase::FullErect,
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Hands,
    Feet,
}

/// Trapezoidal wrench pulse. The wrench ramps linearly from zero over
/// `ramp` seconds after `t_start`, holds, and ramps back to zero by `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub t_start: f64,
    pub t_end: f64,
    pub wrench: Wrench,
    pub channel: Channel,
    pub ramp: f64,
}

impl Pulse {
    pub fn scale_at(&self, t: f64) -> f64 {
        if t < self.t_start || t >= self.t_end {
            return 0.0;
        }
        if self.ramp <= 0.0 {
            return 1.0;
        }
        let up = (t - self.t_start) / self.ramp;
        let down = (self.t_end - t) / self.ramp;
        up.min(down).min(1.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WrenchProfile {
    pulses: Vec<Pulse>,
}

impl WrenchProfile {
    pub fn new(pulses: Vec<Pulse>) -> Result<Self> {
        for p in &pulses {
            if !(p.t_start >= 0.0) || !(p.t_end > p.t_start) || !p.t_end.is_finite() {
                return Err(Error::Config(format!(
                    "pulse needs 0 <= t_start < t_end, got [{}, {}]",
                    p.t_start, p.t_end
                )));
            }
            if !(p.ramp >= 0.0) || 2.0 * p.ramp > p.t_end - p.t_start {
                return Err(Error::Config(format!(
                    "pulse ramp {} does not fit in [{}, {}]",
                    p.ramp, p.t_start, p.t_end
                )));
            }
            if !p.wrench.is_finite() {
                return Err(Error::Config("pulse wrench is not finite".into()));
            }
        }
        for channel in [Channel::Hands, Channel::Feet] {
            let mut spans: Vec<(f64, f64)> = pulses
                .iter()
                .filter(|p| p.channel == channel)
                .map(|p| (p.t_start, p.t_end))
                .collect();
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in spans.windows(2) {
                if w[1].0 < w[0].1 {
                    return Err(Error::Config(format!(
                        "overlapping {channel:?} pulses at t = {}",
                        w[1].0
                    )));
                }
            }
        }
        Ok(Self { pulses })
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    /// Same profile without any pulse on `channel`.
    pub fn without_channel(&self, channel: Channel) -> Self {
        Self {
            pulses: self
                .pulses
                .iter()
                .filter(|p| p.channel != channel)
                .cloned()
                .collect(),
        }
    }

    pub fn wrench_at(&self, t: f64, channel: Channel) -> Wrench {
        let sum = self
            .pulses
            .iter()
            .filter(|p| p.channel == channel)
            .fold(Vec6::zeros(), |acc, p| acc + p.wrench.0 * p.scale_at(t));
        Wrench(sum)
    }
}

/// CoM waypoints of the stand-up, one per phase boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StandUpWaypoints {
    pub seated: [f64; 3],
    pub forward: [f64; 3],
    pub forward_up: [f64; 3],
    pub erect: [f64; 3],
    /// Nominal durations (s) of the forward, forward+up and upward segments.
    pub durations: [f64; 3],
}

impl Default for StandUpWaypoints {
    fn default() -> Self {
        Self {
            seated: [0.0, 0.0, 0.4],
            forward: [0.1, 0.0, 0.4],
            forward_up: [0.15, 0.0, 0.55],
            erect: [0.15, 0.0, 0.65],
            durations: [2.0, 2.0, 2.0],
        }
    }
}

impl StandUpWaypoints {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidCurve(format!("stand-up waypoints: {what}")));
        if self.durations.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return bad("durations must be positive");
        }
        let (s, f, fu, e) = (self.seated, self.forward, self.forward_up, self.erect);
        if !(f[0] > s[0]) {
            return bad("forward pose must be ahead of the seated pose");
        }
        if !(fu[0] >= f[0] && fu[2] > f[2]) {
            return bad("forward+up pose must not be behind and must be above the forward pose");
        }
        if !(e[2] > fu[2]) {
            return bad("erect pose must be above the forward+up pose");
        }
        Ok(())
    }

    /// Waypoints with knots at the cumulative nominal phase times. Rotation
    /// coordinates stay at zero.
    pub fn waypoints(&self) -> Vec<Waypoint> {
        let pose = |p: [f64; 3]| Vec6::new(p[0], p[1], p[2], 0.0, 0.0, 0.0);
        let mut knot = 0.0;
        let mut out = vec![Waypoint::new(knot, pose(self.seated))];
        for (p, d) in [self.forward, self.forward_up, self.erect]
            .into_iter()
            .zip(self.durations)
        {
            knot += d;
            out.push(Waypoint::new(knot, pose(p)));
        }
        out
    }
}

/// Single reference curve spanning the forward, forward+up and upward
/// segments of the stand-up.
pub fn build_standup_reference(wp: &StandUpWaypoints) -> Result<ParamCurve> {
    wp.validate()?;
    ParamCurve::new(&wp.waypoints())
}

/// Thresholds, scripted wrenches and reference waypoints of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioScript {
    pub thresholds: Thresholds,
    pub profile: WrenchProfile,
    pub waypoints: Vec<Waypoint>,
}
