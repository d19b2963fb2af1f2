use nalgebra::DVector;

use super::script::min_jerk;
use crate::rigid_body::JointState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    /// Length of the return trajectory (s).
    pub duration: f64,
    /// Give up after this long in recovery (s).
    pub timeout: f64,
    /// Arrival tolerance on `‖q − q0‖` (rad).
    pub position_tol: f64,
    /// Arrival tolerance on `‖q̇‖` (rad/s).
    pub velocity_tol: f64,
    pub kp: f64,
    pub kd: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            duration: 3.0,
            timeout: 10.0,
            position_tol: 0.02,
            velocity_tol: 0.05,
            kp: 100.0,
            kd: 20.0,
        }
    }
}

/// Joint-space quintic from the fault pose back to `q0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryPlan {
    pub start: DVector<f64>,
    pub goal: DVector<f64>,
    /// Zero when the arm is already home and at rest.
    pub duration: f64,
}

/// Reference position, velocity and acceleration at one instant of a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReference {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub qdd: DVector<f64>,
    pub progress: f64,
}

/// Plans the return to `q0` from `state`.
pub fn recover(state: &JointState, q0: &DVector<f64>, cfg: &RecoveryConfig) -> RecoveryPlan {
    let duration = if at_home(state, q0, cfg) {
        0.0
    } else {
        cfg.duration
    };
    RecoveryPlan {
        start: state.q.clone(),
        goal: q0.clone(),
        duration,
    }
}

pub fn at_home(state: &JointState, q0: &DVector<f64>, cfg: &RecoveryConfig) -> bool {
    (&state.q - q0).norm() < cfg.position_tol && state.qd.norm() < cfg.velocity_tol
}

impl RecoveryPlan {
    /// Reference at `elapsed` seconds into the plan.
    pub fn sample(&self, elapsed: f64) -> RecoveryReference {
        let delta = &self.goal - &self.start;
        if self.duration <= 0.0 || elapsed >= self.duration {
            return RecoveryReference {
                q: self.goal.clone(),
                qd: DVector::zeros(delta.len()),
                qdd: DVector::zeros(delta.len()),
                progress: 1.0,
            };
        }
        let tau = (elapsed / self.duration).max(0.0);
        let (s, ds) = min_jerk(tau);
        let dds = 60.0 * tau - 180.0 * tau * tau + 120.0 * tau * tau * tau;
        let t = self.duration;
        RecoveryReference {
            q: &self.start + &delta * s,
            qd: &delta * (ds / t),
            qdd: &delta * (dds / (t * t)),
            progress: tau,
        }
    }
}
