use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, Unit, UnitQuaternion, Vector3};

use super::model::{ArmModel, TaskPose, TaskTwist};
use crate::error::Result;

/// World-frame quantities of every link at one configuration.
#[derive(Debug, Clone)]
pub struct ChainFrames {
    /// Link frames after the joint rotation.
    pub link: Vec<Isometry3<f64>>,
    /// Joint axis in the base frame.
    pub axis: Vec<Vector3<f64>>,
    /// Point on the joint axis (the joint frame origin) in the base frame.
    pub joint_origin: Vec<Vector3<f64>>,
    /// Link centre of mass in the base frame.
    pub com: Vec<Vector3<f64>>,
    /// Link inertia about its COM, rotated into the base frame.
    pub inertia: Vec<Matrix3<f64>>,
    pub end_effector: Isometry3<f64>,
}

impl ChainFrames {
    pub fn compute(model: &ArmModel, q: &DVector<f64>) -> Result<Self> {
        model.check_q(q)?;
        let n = model.dof();
        let mut frames = ChainFrames {
            link: Vec::with_capacity(n),
            axis: Vec::with_capacity(n),
            joint_origin: Vec::with_capacity(n),
            com: Vec::with_capacity(n),
            inertia: Vec::with_capacity(n),
            end_effector: Isometry3::identity(),
        };
        let mut parent = Isometry3::identity();
        for (link, &angle) in model.links.iter().zip(q.iter()) {
            let joint = parent * link.origin;
            let rotation = UnitQuaternion::from_axis_angle(&Unit::new_unchecked(link.axis), angle);
            let frame = joint * rotation;
            let r = frame.rotation.to_rotation_matrix();
            frames.axis.push(joint.rotation * link.axis);
            frames.joint_origin.push(joint.translation.vector);
            frames.com.push(frame.transform_point(&link.com.into()).coords);
            frames
                .inertia
                .push(r.matrix() * link.inertia * r.matrix().transpose());
            frames.link.push(frame);
            parent = frame;
        }
        frames.end_effector = parent * model.tool;
        Ok(frames)
    }

    pub fn ee_position(&self) -> Vector3<f64> {
        self.end_effector.translation.vector
    }

    /// Geometric Jacobian of the end-effector, rows `[linear; angular]`.
    pub fn jacobian(&self) -> DMatrix<f64> {
        let n = self.axis.len();
        let p = self.ee_position();
        let mut jac = DMatrix::zeros(6, n);
        for i in 0..n {
            let z = self.axis[i];
            let lin = z.cross(&(p - self.joint_origin[i]));
            for r in 0..3 {
                jac[(r, i)] = lin[r];
                jac[(r + 3, i)] = z[r];
            }
        }
        jac
    }
}

pub fn forward_kinematics(model: &ArmModel, q: &DVector<f64>) -> Result<TaskPose> {
    let frames = ChainFrames::compute(model, q)?;
    Ok(TaskPose::from_isometry(&frames.end_effector))
}

pub fn jacobian(model: &ArmModel, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    Ok(ChainFrames::compute(model, q)?.jacobian())
}

/// Rows of the Jacobian selected by the model's task axes.
pub fn task_jacobian(model: &ArmModel, full: &DMatrix<f64>) -> DMatrix<f64> {
    let rows: Vec<usize> = model.task_axes.rows().collect();
    full.select_rows(rows.iter())
}

/// End-effector twist `J(q)·q̇`.
pub fn ee_twist(jac: &DMatrix<f64>, qd: &DVector<f64>) -> TaskTwist {
    let v = jac * qd;
    TaskTwist::new(Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5]))
}

/// Centres of mass of every link in the base frame.
pub fn link_com_positions(model: &ArmModel, q: &DVector<f64>) -> Result<Vec<Vector3<f64>>> {
    Ok(ChainFrames::compute(model, q)?.com)
}
