use alloc::vec::Vec;

use nalgebra::{UnitQuaternion, Vector3};

use crate::control::FootplateSample;
use crate::error::{Error, Result};

/// Minimum-jerk blend `10s³ − 15s⁴ + 6s⁵` and its first derivative, for `s ∈ [0, 1]`.
pub fn min_jerk(s: f64) -> (f64, f64) {
    let s = s.clamp(0.0, 1.0);
    let s2 = s * s;
    let s3 = s2 * s;
    (
        s3 * (10.0 - 15.0 * s + 6.0 * s2),
        30.0 * s2 * (1.0 - 2.0 * s + s2),
    )
}

/// Operator hand target at time `t` (master frame, relative to the master home).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub position: Vector3<f64>,
    /// Roll, pitch, yaw of the operator's wrist (rad).
    pub rpy: Vector3<f64>,
    /// Glove closure in `[0, 1]`.
    pub grip: f64,
}

impl Waypoint {
    pub fn at(t: f64, position: Vector3<f64>) -> Self {
        Self {
            t,
            position,
            rpy: Vector3::zeros(),
            grip: 0.0,
        }
    }
}

/// Scripted operator input sampled at [`OperatorScript::sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandTarget {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    pub grip: f64,
    pub grip_rate: f64,
}

/// Piecewise minimum-jerk trajectory through time-ordered waypoints. Before the first waypoint
/// and after the last the hand rests.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorScript {
    waypoints: Vec<Waypoint>,
}

impl OperatorScript {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self> {
        let ordered = waypoints.windows(2).all(|w| w[1].t > w[0].t);
        let finite = waypoints.iter().all(|w| {
            w.t.is_finite()
                && w.grip.is_finite()
                && w.position.iter().chain(w.rpy.iter()).all(|v| v.is_finite())
        });
        if !ordered || !finite {
            return Err(Error::InvalidConfig(
                "operator waypoints must be finite with strictly increasing times".into(),
            ));
        }
        Ok(Self { waypoints })
    }

    /// Hand at rest at the master home for the whole run.
    pub fn idle() -> Self {
        Self::default()
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn sample(&self, t: f64) -> HandTarget {
        let rest = |w: &Waypoint| HandTarget {
            position: w.position,
            velocity: Vector3::zeros(),
            orientation: rpy_quat(&w.rpy),
            grip: w.grip,
            grip_rate: 0.0,
        };
        let wps = &self.waypoints;
        let Some(first) = wps.first() else {
            return rest(&Waypoint::at(0.0, Vector3::zeros()));
        };
        if t <= first.t {
            return rest(first);
        }
        let i = wps.partition_point(|w| w.t <= t);
        if i >= wps.len() {
            return rest(&wps[wps.len() - 1]);
        }
        let (a, b) = (&wps[i - 1], &wps[i]);
        let span = b.t - a.t;
        let (s, ds) = min_jerk((t - a.t) / span);
        let rate = ds / span;
        HandTarget {
            position: a.position + (b.position - a.position) * s,
            velocity: (b.position - a.position) * rate,
            orientation: rpy_quat(&(a.rpy + (b.rpy - a.rpy) * s)),
            grip: a.grip + (b.grip - a.grip) * s,
            grip_rate: (b.grip - a.grip) * rate,
        }
    }
}

fn rpy_quat(rpy: &Vector3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_euler_angles(rpy.x, rpy.y, rpy.z)
}

/// Footplate readings held constant from each key time until the next.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FootplateScript {
    keys: Vec<(f64, FootplateSample)>,
}

impl FootplateScript {
    pub fn new(keys: Vec<(f64, FootplateSample)>) -> Result<Self> {
        if !keys.windows(2).all(|w| w[1].0 > w[0].0) || keys.iter().any(|k| !k.0.is_finite()) {
            return Err(Error::InvalidConfig(
                "footplate keys must have strictly increasing times".into(),
            ));
        }
        Ok(Self { keys })
    }

    pub fn sample(&self, t: f64) -> Option<&FootplateSample> {
        let i = self.keys.partition_point(|k| k.0 <= t);
        i.checked_sub(1).map(|i| &self.keys[i].1)
    }
}
