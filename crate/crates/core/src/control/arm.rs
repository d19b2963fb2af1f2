use nalgebra::{DMatrix, DVector, Vector6};

use super::gains::{GainSet, PseudoInverse};
use crate::error::{check_finite, Error, Result};
use crate::rigid_body::{
    bias_forces, ArmModel, ChainFrames, JointState, TaskPose, TaskTwist, TaskAxes, Wrench,
};

/// Side information produced alongside the commanded torques.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ControlDiagnostics {
    /// The task Jacobian was near-singular and the projector used the damped pseudo-inverse.
    pub near_singular: bool,
    /// At least one joint torque was clipped at its limit.
    pub saturated: bool,
}

fn check_inputs(
    model: &ArmModel,
    state: &JointState,
    x_d: &TaskPose,
    xd_d: &TaskTwist,
    f_e: &Wrench,
) -> Result<()> {
    state.check(model)?;
    check_finite("desired position", x_d.position.iter())?;
    check_finite("desired orientation", x_d.orientation.coords.iter())?;
    if !xd_d.is_finite() {
        return Err(Error::NonFinite("desired twist"));
    }
    if !f_e.is_finite() {
        return Err(Error::NonFinite("environment wrench"));
    }
    Ok(())
}

/// Cartesian spring-damper force `S·(K(x_d − x) + B(ẋ_d − ẋ) − F_e)` restricted to the
/// model's task axes.
#[allow(clippy::too_many_arguments)]
fn task_force(
    axes: TaskAxes,
    frames: &ChainFrames,
    jac: &DMatrix<f64>,
    qd: &DVector<f64>,
    x_d: &TaskPose,
    xd_d: &TaskTwist,
    f_e: &Wrench,
    gains: &GainSet,
) -> Vector6<f64> {
    let x = TaskPose::from_isometry(&frames.end_effector);
    let e_x = x_d.error_from(&x);
    let xd = jac * qd;
    let e_xd = xd_d.to_vector() - Vector6::from_iterator(xd.iter().copied());
    let force = gains.stiffness * e_x + gains.damping * e_xd - f_e.to_vector();
    force.component_mul(&axes.mask())
}

/// Task torque `Jᵀ(K(x_d − x) + B(ẋ_d − ẋ) − F_e)` plus full Coriolis and gravity
/// compensation.
pub fn cartesian_impedance_torque(
    model: &ArmModel,
    state: &JointState,
    x_d: &TaskPose,
    xd_d: &TaskTwist,
    f_e: &Wrench,
    gains: &GainSet,
) -> Result<DVector<f64>> {
    check_inputs(model, state, x_d, xd_d, f_e)?;
    let frames = ChainFrames::compute(model, &state.q)?;
    let jac = frames.jacobian();
    let force = task_force(model.task_axes, &frames, &jac, &state.qd, x_d, xd_d, f_e, gains);
    Ok(jac.transpose() * force + bias_forces(model, state)?)
}

/// Projector `I − Jᵀ(Jᵀ)⁺` onto the nullspace of the task Jacobian `jt` (m×n).
///
/// Returns the projector and whether the damped fallback was needed.
pub fn nullspace_projector(jt: &DMatrix<f64>, settings: &PseudoInverse) -> (DMatrix<f64>, bool) {
    let n = jt.ncols();
    let jt_t = jt.transpose();
    let svd = jt_t.clone().svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        // SVD with both factors requested always produces them.
        _ => unreachable!("svd factors requested"),
    };
    let sv = &svd.singular_values;
    let s_max = sv.max();
    let s_min = sv.min();
    let near_singular = s_max <= 0.0 || s_min / s_max < settings.cutoff;
    let lambda2 = settings.damping * settings.damping;
    let inv = sv.map(|s| {
        if near_singular {
            s / (s * s + lambda2)
        } else {
            1.0 / s
        }
    });
    // (Jᵀ)⁺ = V Σ⁺ Uᵀ
    let pinv = v_t.transpose() * DMatrix::from_diagonal(&inv) * u.transpose();
    (DMatrix::identity(n, n) - jt_t * pinv, near_singular)
}

/// Posture torque `(I − JᵀJ^{T+})(K_null(q0 − q) − B_null q̇)`, which leaves the task-space
/// behaviour untouched.
pub fn nullspace_torque(
    model: &ArmModel,
    state: &JointState,
    gains: &GainSet,
) -> Result<(DVector<f64>, ControlDiagnostics)> {
    state.check(model)?;
    let frames = ChainFrames::compute(model, &state.q)?;
    let jt = crate::rigid_body::task_jacobian(model, &frames.jacobian());
    Ok(nullspace_from_jacobian(&jt, state, gains))
}

fn nullspace_from_jacobian(
    jt: &DMatrix<f64>,
    state: &JointState,
    gains: &GainSet,
) -> (DVector<f64>, ControlDiagnostics) {
    let (projector, near_singular) = nullspace_projector(jt, &gains.pinv);
    let posture =
        &gains.null_stiffness * (&gains.posture - &state.q) - &gains.null_damping * &state.qd;
    (
        projector * posture,
        ControlDiagnostics {
            near_singular,
            saturated: false,
        },
    )
}

/// Per-joint unilateral spring-damper, active only while a joint is beyond its virtual wall.
pub fn virtual_wall_torque(state: &JointState, gains: &GainSet) -> DVector<f64> {
    DVector::from_fn(state.q.len(), |i, _| {
        let q = state.q[i];
        let wall = if q > gains.wall_upper[i] {
            gains.wall_upper[i]
        } else if q < gains.wall_lower[i] {
            gains.wall_lower[i]
        } else {
            return 0.0;
        };
        gains.wall_stiffness[i] * (wall - q) - gains.wall_damping[i] * state.qd[i]
    })
}

/// Clips each torque to `±limit`, returning whether anything was clipped.
pub fn saturate(tau: &mut DVector<f64>, limits: &[f64]) -> bool {
    let mut clipped = false;
    for (t, &lim) in tau.iter_mut().zip(limits) {
        if *t > lim {
            *t = lim;
            clipped = true;
        } else if *t < -lim {
            *t = -lim;
            clipped = true;
        }
    }
    clipped
}

/// Main impedance law plus the nullspace and virtual-wall secondaries, saturated at the model's
/// torque limits.
pub fn compose_arm_torque(
    model: &ArmModel,
    state: &JointState,
    x_d: &TaskPose,
    xd_d: &TaskTwist,
    f_e: &Wrench,
    gains: &GainSet,
) -> Result<(DVector<f64>, ControlDiagnostics)> {
    check_inputs(model, state, x_d, xd_d, f_e)?;
    let frames = ChainFrames::compute(model, &state.q)?;
    let jac = frames.jacobian();
    let force = task_force(model.task_axes, &frames, &jac, &state.qd, x_d, xd_d, f_e, gains);
    let jt = crate::rigid_body::task_jacobian(model, &jac);
    let (null, mut diag) = nullspace_from_jacobian(&jt, state, gains);
    let mut tau = jac.transpose() * force
        + bias_forces(model, state)?
        + null
        + virtual_wall_torque(state, gains);
    diag.saturated = saturate(&mut tau, &model.torque_limits);
    Ok((tau, diag))
}
