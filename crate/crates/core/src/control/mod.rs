//! Arm and gripper control laws, plus the footplate-to-base mapping.
//!
//! The arm runs a Cartesian impedance law with full Coriolis/gravity compensation. Two
//! secondary laws run next to it: a posture spring projected into the task nullspace, and
//! per-joint virtual walls that only engage past a soft limit.

mod arm;
mod footplate;
mod gains;
mod gripper;

pub use arm::{
    cartesian_impedance_torque, compose_arm_torque, nullspace_projector, nullspace_torque,
    saturate, virtual_wall_torque, ControlDiagnostics,
};
pub use footplate::{footplate_to_twist, FootplateSample, FOOT_PRESENT_VOTES};
pub use gains::{GainSet, PseudoInverse, ReferenceGains};
pub use gripper::{gripper_coupling_torques, GripperState};
