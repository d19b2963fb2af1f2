use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::kinematics::ChainFrames;
use super::model::{ArmModel, JointState, Wrench};
use crate::error::{check_finite, check_len, Error, Result};

/// Joint-space inertia matrix by the composite-rigid-body algorithm.
pub fn mass_matrix(model: &ArmModel, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    let frames = ChainFrames::compute(model, q)?;
    Ok(crba(model, &frames))
}

pub(crate) fn crba(model: &ArmModel, frames: &ChainFrames) -> DMatrix<f64> {
    let n = model.dof();
    let mut m = DMatrix::zeros(n, n);

    // Composite body of links j..n: mass, COM and inertia about that COM (base frame).
    let mut c_mass = 0.0;
    let mut c_moment = Vector3::zeros(); // Σ m·c
    let mut c_inertia_origin = Matrix3::zeros(); // about the base origin
    for j in (0..n).rev() {
        let mj = model.links[j].mass;
        let cj = frames.com[j];
        c_mass += mj;
        c_moment += cj * mj;
        c_inertia_origin += frames.inertia[j] + parallel_axis(mj, &cj);

        let com = c_moment / c_mass;
        let inertia_com = c_inertia_origin - parallel_axis(c_mass, &com);

        // Unit acceleration of joint j applied to the composite body.
        let zj = frames.axis[j];
        let force = zj.cross(&(com - frames.joint_origin[j])) * c_mass;
        let moment_com = inertia_com * zj;
        for i in 0..=j {
            let moment_i = moment_com + (com - frames.joint_origin[i]).cross(&force);
            let value = frames.axis[i].dot(&moment_i);
            m[(i, j)] = value;
            m[(j, i)] = value;
        }
    }
    m
}

/// `m·([r]ₓᵀ[r]ₓ)`: inertia of a point mass at `r` about the origin.
fn parallel_axis(mass: f64, r: &Vector3<f64>) -> Matrix3<f64> {
    (Matrix3::identity() * r.dot(r) - r * r.transpose()) * mass
}

/// Recursive Newton-Euler inverse dynamics. `gravity_on = false` drops the gravity field.
pub(crate) fn rnea(
    model: &ArmModel,
    frames: &ChainFrames,
    qd: &DVector<f64>,
    qdd: &DVector<f64>,
    gravity_on: bool,
) -> DVector<f64> {
    let n = model.dof();
    let mut omega = Vector3::zeros();
    let mut omega_dot = Vector3::zeros();
    // Gravity enters as an upward acceleration of the base.
    let mut acc = if gravity_on {
        -model.gravity
    } else {
        Vector3::zeros()
    };
    let mut prev_origin = Vector3::zeros();

    let mut forces = vec![Vector3::zeros(); n];
    let mut moments = vec![Vector3::zeros(); n];
    for i in 0..n {
        let z = frames.axis[i];
        let p = frames.joint_origin[i];
        let d = p - prev_origin;
        // Joint origin is fixed on the parent link.
        acc += omega_dot.cross(&d) + omega.cross(&omega.cross(&d));
        let omega_parent = omega;
        omega = omega_parent + z * qd[i];
        omega_dot += z * qdd[i] + omega_parent.cross(&(z * qd[i]));

        let r = frames.com[i] - p;
        let a_com = acc + omega_dot.cross(&r) + omega.cross(&omega.cross(&r));
        let inertia = frames.inertia[i];
        forces[i] = a_com * model.links[i].mass;
        moments[i] = inertia * omega_dot + omega.cross(&(inertia * omega));
        prev_origin = p;
    }

    let mut tau = DVector::zeros(n);
    let mut f_child = Vector3::zeros();
    let mut n_child = Vector3::zeros();
    for i in (0..n).rev() {
        let p = frames.joint_origin[i];
        let f = forces[i] + f_child;
        // Moment about this joint origin.
        let mut moment = moments[i] + (frames.com[i] - p).cross(&forces[i]) + n_child;
        if i + 1 < n {
            moment += (frames.joint_origin[i + 1] - p).cross(&f_child);
        }
        tau[i] = frames.axis[i].dot(&moment);
        f_child = f;
        // The parent shifts this moment with its own lever arm.
        n_child = moment;
    }
    tau
}

/// Full inverse dynamics `M(q)q̈ + C(q,q̇)q̇ + G(q)`.
pub fn inverse_dynamics(
    model: &ArmModel,
    state: &JointState,
    qdd: &DVector<f64>,
) -> Result<DVector<f64>> {
    state.check(model)?;
    check_len("joint accelerations", model.dof(), qdd.len())?;
    let frames = ChainFrames::compute(model, &state.q)?;
    Ok(rnea(model, &frames, &state.qd, qdd, true))
}

/// Coriolis, centrifugal and gravity torques `C(q,q̇)q̇ + G(q)`.
pub fn bias_forces(model: &ArmModel, state: &JointState) -> Result<DVector<f64>> {
    state.check(model)?;
    let frames = ChainFrames::compute(model, &state.q)?;
    Ok(rnea(
        model,
        &frames,
        &state.qd,
        &DVector::zeros(model.dof()),
        true,
    ))
}

/// Velocity-dependent part `C(q,q̇)q̇` only.
pub fn coriolis_forces(model: &ArmModel, state: &JointState) -> Result<DVector<f64>> {
    state.check(model)?;
    let frames = ChainFrames::compute(model, &state.q)?;
    Ok(rnea(
        model,
        &frames,
        &state.qd,
        &DVector::zeros(model.dof()),
        false,
    ))
}

/// Gravity torques `G(q)`; identical to [`bias_forces`] at zero velocity.
pub fn gravity(model: &ArmModel, q: &DVector<f64>) -> Result<DVector<f64>> {
    bias_forces(model, &JointState::at_rest(q.clone()))
}

/// Joint accelerations `M⁻¹(τ + Jᵀf − C q̇ − G)`.
pub fn forward_dynamics(
    model: &ArmModel,
    state: &JointState,
    tau: &DVector<f64>,
    f_ext: &Wrench,
) -> Result<DVector<f64>> {
    state.check(model)?;
    check_len("joint torques", model.dof(), tau.len())?;
    check_finite("joint torques", tau.iter())?;
    if !f_ext.is_finite() {
        return Err(Error::NonFinite("external wrench"));
    }
    let frames = ChainFrames::compute(model, &state.q)?;
    accel(model, &frames, &state.qd, tau, f_ext)
}

fn accel(
    model: &ArmModel,
    frames: &ChainFrames,
    qd: &DVector<f64>,
    tau: &DVector<f64>,
    f_ext: &Wrench,
) -> Result<DVector<f64>> {
    let m = crba(model, frames);
    let bias = rnea(model, frames, qd, &DVector::zeros(model.dof()), true);
    let mut rhs = tau - bias;
    if *f_ext != Wrench::zero() {
        rhs += frames.jacobian().transpose() * f_ext.to_vector();
    }
    let chol = m.cholesky().ok_or(Error::SingularMassMatrix)?;
    Ok(chol.solve(&rhs))
}

/// Advances the state by `dt` with classical fourth-order Runge-Kutta. Torque and external
/// wrench are held constant across the step; the wrench acts at the moving end-effector.
pub fn step(
    model: &ArmModel,
    state: &JointState,
    tau: &DVector<f64>,
    f_ext: &Wrench,
    dt: f64,
) -> Result<JointState> {
    state.check(model)?;
    check_len("joint torques", model.dof(), tau.len())?;
    check_finite("joint torques", tau.iter())?;
    if !f_ext.is_finite() {
        return Err(Error::NonFinite("external wrench"));
    }
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }

    let deriv = |q: &DVector<f64>, qd: &DVector<f64>| -> Result<DVector<f64>> {
        let frames = ChainFrames::compute(model, q)?;
        accel(model, &frames, qd, tau, f_ext)
    };

    let (q0, v0) = (&state.q, &state.qd);
    let a1 = deriv(q0, v0)?;
    let q2 = q0 + v0 * (0.5 * dt);
    let v2 = v0 + &a1 * (0.5 * dt);
    let a2 = deriv(&q2, &v2)?;
    let q3 = q0 + &v2 * (0.5 * dt);
    let v3 = v0 + &a2 * (0.5 * dt);
    let a3 = deriv(&q3, &v3)?;
    let q4 = q0 + &v3 * dt;
    let v4 = v0 + &a3 * dt;
    let a4 = deriv(&q4, &v4)?;

    let q = q0 + (v0 + &v2 * 2.0 + &v3 * 2.0 + &v4) * (dt / 6.0);
    let qd = v0 + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (dt / 6.0);
    Ok(JointState::new(q, qd))
}

/// Kinetic energy `½ q̇ᵀ M q̇`.
pub fn kinetic_energy(model: &ArmModel, state: &JointState) -> Result<f64> {
    let m = mass_matrix(model, &state.q)?;
    Ok(0.5 * state.qd.dot(&(m * &state.qd)))
}

/// Gravitational potential `−Σ mᵢ g·cᵢ`.
pub fn potential_energy(model: &ArmModel, q: &DVector<f64>) -> Result<f64> {
    let frames = ChainFrames::compute(model, q)?;
    Ok(model
        .links
        .iter()
        .zip(frames.com.iter())
        .map(|(link, c)| -link.mass * model.gravity.dot(c))
        .sum())
}

/// Task-space inertia `(J M⁻¹ Jᵀ)⁻¹` for the rows selected by the model's task axes.
pub fn task_inertia(model: &ArmModel, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    let frames = ChainFrames::compute(model, q)?;
    let m = crba(model, &frames);
    let rows: Vec<usize> = model.task_axes.rows().collect();
    let j = frames.jacobian().select_rows(rows.iter());
    let chol = m.cholesky().ok_or(Error::SingularMassMatrix)?;
    let minv_jt = chol.solve(&j.transpose());
    (&j * minv_jt)
        .try_inverse()
        .ok_or_else(|| Error::InvalidModel("task Jacobian is singular at this posture".into()))
}
