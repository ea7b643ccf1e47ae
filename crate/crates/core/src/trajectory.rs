//! Wall (or trap-size) schedules and their kinematics.
//!
//! The built-in schedule moves the size with a raised-cosine velocity
//! profile, `v(t) = v̄ (1 − cos 2πt/T)`, so that it starts and stops at rest:
//!
//! ```text
//! L(t) = L0 + v̄ (t − T/2π · sin 2πt/T)    0 ≤ t ≤ T
//! L(t) = L0 + v̄ T                          t > T
//! ```

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Sweep endpoints within this distance below zero are treated as `t = 0`.
pub const NEGATIVE_TIME_SLACK: f64 = 1e-12;

/// Size, velocity and acceleration of the confinement at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicSample {
    pub t: f64,
    pub length: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

impl KinematicSample {
    /// A wall at rest with size `length`.
    pub fn at_rest(length: f64) -> Self {
        Self {
            t: 0.0,
            length,
            velocity: 0.0,
            acceleration: 0.0,
        }
    }

    pub fn new(t: f64, length: f64, velocity: f64, acceleration: f64) -> Self {
        Self {
            t,
            length,
            velocity,
            acceleration,
        }
    }
}

/// Anything that can report the confinement kinematics at a time `t ≥ 0`.
pub trait Schedule: Send + Sync {
    fn sample(&self, t: f64) -> Result<KinematicSample>;

    /// Size at `t = 0`.
    fn initial_length(&self) -> f64;

    /// Time after which the wall is at rest.
    fn duration(&self) -> f64;
}

fn clamp_time(t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(domain("time is NaN"));
    }
    if t < 0.0 {
        if t >= -NEGATIVE_TIME_SLACK {
            return Ok(0.0);
        }
        return Err(domain(format!("negative time t = {t}")));
    }
    Ok(t)
}

/// The fast-forward schedule `(L0, v̄, T_FF)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    l0: f64,
    v_bar: f64,
    t_ff: f64,
}

impl Trajectory {
    /// Builds the schedule, rejecting contractions that would drive the size
    /// through zero.
    pub fn new(l0: f64, v_bar: f64, t_ff: f64) -> Result<Self> {
        if !(l0.is_finite() && l0 > 0.0) {
            return Err(domain(format!("initial size must be positive, got {l0}")));
        }
        if !v_bar.is_finite() {
            return Err(domain(format!("mean velocity must be finite, got {v_bar}")));
        }
        if !(t_ff.is_finite() && t_ff > 0.0) {
            return Err(domain(format!("fast-forward time must be positive, got {t_ff}")));
        }
        // L is monotone in t (v has a fixed sign), so the minimum sits at an endpoint.
        let min_len = l0.min(l0 + v_bar * t_ff);
        if min_len <= 0.0 {
            return Err(domain(format!(
                "schedule reaches non-positive size {min_len} (L0 = {l0}, v̄ = {v_bar}, T_FF = {t_ff})"
            )));
        }
        Ok(Self { l0, v_bar, t_ff })
    }

    /// Expansion from `l0` to `l1` in time `t_ff`.
    pub fn between(l0: f64, l1: f64, t_ff: f64) -> Result<Self> {
        Self::new(l0, (l1 - l0) / t_ff, t_ff)
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn v_bar(&self) -> f64 {
        self.v_bar
    }

    pub fn t_ff(&self) -> f64 {
        self.t_ff
    }

    pub fn final_length(&self) -> f64 {
        self.l0 + self.v_bar * self.t_ff
    }

    /// `v(t) = v̄(1 − cos 2πt/T_FF)` during the protocol, zero afterwards.
    pub fn velocity(&self, t: f64) -> Result<f64> {
        let t = clamp_time(t)?;
        if t >= self.t_ff {
            return Ok(0.0);
        }
        Ok(self.v_bar * (1.0 - (TAU * t / self.t_ff).cos()))
    }

    pub fn kinematics(&self, t: f64) -> Result<KinematicSample> {
        let t = clamp_time(t)?;
        if t >= self.t_ff {
            return Ok(KinematicSample::new(t, self.final_length(), 0.0, 0.0));
        }
        let phase = TAU * t / self.t_ff;
        let (sin, cos) = phase.sin_cos();
        Ok(KinematicSample {
            t,
            length: self.l0 + self.v_bar * (t - self.t_ff / TAU * sin),
            velocity: self.v_bar * (1.0 - cos),
            acceleration: self.v_bar * TAU / self.t_ff * sin,
        })
    }

    /// `n` equally spaced sample times covering `[0, T_FF]` inclusive.
    pub fn sample_times(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..n).map(|i| self.t_ff * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

impl Schedule for Trajectory {
    fn sample(&self, t: f64) -> Result<KinematicSample> {
        self.kinematics(t)
    }

    fn initial_length(&self) -> f64 {
        self.l0
    }

    fn duration(&self) -> f64 {
        self.t_ff
    }
}

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied schedule given as the triple `(L, L̇, L̈)`.
///
/// The three callables are cross-checked against each other by central
/// differences when the schedule is built.
pub struct CustomSchedule {
    length: ScalarFn,
    velocity: ScalarFn,
    acceleration: ScalarFn,
    duration: f64,
    l0: f64,
}

impl fmt::Debug for CustomSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSchedule")
            .field("l0", &self.l0)
            .field("duration", &self.duration)
            .finish_non_exhaustive()
    }
}

impl CustomSchedule {
    pub const CHECK_POINTS: usize = 32;
    pub const CHECK_TOLERANCE: f64 = 1e-6;

    pub fn new<L, V, A>(duration: f64, length: L, velocity: V, acceleration: A) -> Result<Self>
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        A: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(domain(format!("schedule duration must be positive, got {duration}")));
        }
        let l0 = length(0.0);
        if !(l0.is_finite() && l0 > 0.0) {
            return Err(domain(format!("schedule starts at non-positive size {l0}")));
        }
        let sched = Self {
            length: Box::new(length),
            velocity: Box::new(velocity),
            acceleration: Box::new(acceleration),
            duration,
            l0,
        };
        sched.cross_validate()?;
        Ok(sched)
    }

    fn cross_validate(&self) -> Result<()> {
        let n = Self::CHECK_POINTS;
        let h = 1e-5 * self.duration;
        let times: Vec<f64> = (0..n).map(|i| self.duration * (i as f64 + 0.5) / n as f64).collect();
        let v_scale = times
            .iter()
            .map(|&t| (self.velocity)(t).abs())
            .fold(self.l0 / self.duration, f64::max);
        let a_scale = times
            .iter()
            .map(|&t| (self.acceleration)(t).abs())
            .fold(self.l0 / (self.duration * self.duration), f64::max);
        for &t in &times {
            let len = (self.length)(t);
            if !(len.is_finite() && len > 0.0) {
                return Err(domain(format!("schedule size {len} at t = {t} is not positive")));
            }
            let v = (self.velocity)(t);
            let a = (self.acceleration)(t);
            let v_fd = ((self.length)(t + h) - (self.length)(t - h)) / (2.0 * h);
            let a_fd = ((self.velocity)(t + h) - (self.velocity)(t - h)) / (2.0 * h);
            if (v - v_fd).abs() > Self::CHECK_TOLERANCE * v_scale {
                return Err(domain(format!(
                    "velocity callable disagrees with dL/dt at t = {t}: {v} vs {v_fd}"
                )));
            }
            if (a - a_fd).abs() > Self::CHECK_TOLERANCE * a_scale {
                return Err(domain(format!(
                    "acceleration callable disagrees with dv/dt at t = {t}: {a} vs {a_fd}"
                )));
            }
        }
        Ok(())
    }
}

impl Schedule for CustomSchedule {
    fn sample(&self, t: f64) -> Result<KinematicSample> {
        let t = clamp_time(t)?;
        let length = (self.length)(t);
        if !(length.is_finite() && length > 0.0) {
            return Err(domain(format!("schedule size {length} at t = {t} is not positive")));
        }
        Ok(KinematicSample {
            t,
            length,
            velocity: (self.velocity)(t),
            acceleration: (self.acceleration)(t),
        })
    }

    fn initial_length(&self) -> f64 {
        self.l0
    }

    fn duration(&self) -> f64 {
        self.duration
    }
}
