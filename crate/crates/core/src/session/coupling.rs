use nalgebra::{UnitQuaternion, Vector3};

use crate::rigid_body::{TaskPose, TaskTwist, Wrench};

/// Mapping from master hand pose to slave end-effector setpoint, fixed at each clutch.
///
/// Translation is scaled by `scale` about the clutch anchors in the base frame. Orientation
/// follows the master's rotation since the clutch, applied in the base frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMap {
    pub scale: f64,
    pub master_origin: Vector3<f64>,
    pub slave_origin: Vector3<f64>,
    pub master_rot0: UnitQuaternion<f64>,
    pub slave_rot0: UnitQuaternion<f64>,
}

impl CouplingMap {
    /// Anchors the map so that the given master pose maps onto the given slave pose.
    pub fn clutch(scale: f64, master: &TaskPose, slave: &TaskPose) -> Self {
        Self {
            scale,
            master_origin: master.position,
            slave_origin: slave.position,
            master_rot0: master.orientation,
            slave_rot0: slave.orientation,
        }
    }

    pub fn map_position(&self, master: &Vector3<f64>) -> Vector3<f64> {
        self.slave_origin + (master - self.master_origin) * self.scale
    }

    pub fn map_orientation(&self, master: &UnitQuaternion<f64>) -> UnitQuaternion<f64> {
        master * self.master_rot0.inverse() * self.slave_rot0
    }

    /// Slave setpoint `(x_d, ẋ_d)` for the current master pose and twist.
    pub fn couple_setpoints(&self, master_pose: &TaskPose, master_twist: &TaskTwist) -> (TaskPose, TaskTwist) {
        (
            TaskPose::new(
                self.map_position(&master_pose.position),
                self.map_orientation(&master_pose.orientation),
            ),
            TaskTwist::new(master_twist.linear * self.scale, master_twist.angular),
        )
    }
}

/// Translational part of a slave-side wrench, the only part reflected to the master. Rotation
/// has no feedback path.
pub fn feedback_wrench(slave: &Wrench) -> Vector3<f64> {
    slave.force
}
