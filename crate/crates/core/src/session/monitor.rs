use core::fmt;

use crate::rigid_body::{ArmModel, JointState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultKind {
    PositionLimit,
    VelocityLimit,
    TorqueSaturationPersistent,
}

impl FaultKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FaultKind::PositionLimit => "position_limit",
            FaultKind::VelocityLimit => "velocity_limit",
            FaultKind::TorqueSaturationPersistent => "torque_saturation",
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            FaultKind::PositionLimit => 1,
            FaultKind::VelocityLimit => 2,
            FaultKind::TorqueSaturationPersistent => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(FaultKind::PositionLimit),
            2 => Some(FaultKind::VelocityLimit),
            3 => Some(FaultKind::TorqueSaturationPersistent),
            _ => None,
        }
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A detected fault: when, what, and which joint (if one is to blame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultEvent {
    pub t: f64,
    pub kind: FaultKind,
    pub joint: Option<usize>,
}

/// Tracks how long torque saturation has persisted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMonitor {
    /// Saturation must last strictly longer than this to raise a fault (s).
    pub saturation_window: f64,
    saturated_for: f64,
}

impl ErrorMonitor {
    pub fn new(saturation_window: f64) -> Self {
        Self {
            saturation_window,
            saturated_for: 0.0,
        }
    }

    pub fn reset(&mut self) {
        self.saturated_for = 0.0;
    }

    /// Checks one control tick. Position violations take precedence over velocity, velocity
    /// over saturation.
    pub fn check(
        &mut self,
        model: &ArmModel,
        state: &JointState,
        saturated: bool,
        dt: f64,
    ) -> Option<(FaultKind, Option<usize>)> {
        self.saturated_for = if saturated {
            self.saturated_for + dt
        } else {
            0.0
        };
        let outside = (0..model.dof()).find(|&i| {
            let q = state.q[i];
            !(q >= model.lower_limits[i] && q <= model.upper_limits[i])
        });
        if let Some(i) = outside {
            return Some((FaultKind::PositionLimit, Some(i)));
        }
        let fast = (0..model.dof()).find(|&i| !(state.qd[i].abs() <= model.velocity_limits[i]));
        if let Some(i) = fast {
            return Some((FaultKind::VelocityLimit, Some(i)));
        }
        // Small slack so an exact multiple of dt equal to the window does not trip it.
        if self.saturated_for > self.saturation_window + 1e-9 {
            return Some((FaultKind::TorqueSaturationPersistent, None));
        }
        None
    }
}

/// Single-shot form of [`ErrorMonitor::check`].
pub fn error_monitor(
    monitor: &mut ErrorMonitor,
    model: &ArmModel,
    state: &JointState,
    saturated: bool,
    dt: f64,
) -> Option<(FaultKind, Option<usize>)> {
    monitor.check(model, state, saturated, dt)
}
