use nalgebra::Vector3;

/// Three-DoF glove or gripper state, one entry per finger joint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GripperState {
    pub q: Vector3<f64>,
    pub qd: Vector3<f64>,
}

impl GripperState {
    pub fn new(q: Vector3<f64>, qd: Vector3<f64>) -> Self {
        Self { q, qd }
    }
}

/// Per-DoF spring-damper between glove and gripper.
///
/// Returns `(τ_master, τ_slave)`; the slave is pulled towards the master and the master feels
/// the equal and opposite torque.
pub fn gripper_coupling_torques(
    master: &GripperState,
    slave: &GripperState,
    k: &Vector3<f64>,
    b: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let tau_slave =
        k.component_mul(&(master.q - slave.q)) + b.component_mul(&(master.qd - slave.qd));
    (-tau_slave, tau_slave)
}
