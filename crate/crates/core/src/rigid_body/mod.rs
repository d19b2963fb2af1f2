//! Serial-chain rigid-body kinematics and dynamics for revolute arms of one to seven joints.
//!
//! All quantities are expressed in the base frame. The mass matrix comes from the
//! composite-rigid-body algorithm and the bias/gravity torques from recursive Newton-Euler,
//! so the two routes can be cross-checked against each other.

mod dynamics;
mod kinematics;
mod model;
pub mod models;

pub use dynamics::{
    bias_forces, coriolis_forces, forward_dynamics, gravity, inverse_dynamics, kinetic_energy,
    mass_matrix, potential_energy, step, task_inertia,
};
pub use kinematics::{
    ee_twist, forward_kinematics, jacobian, link_com_positions, task_jacobian, ChainFrames,
};
pub use model::{rod_inertia, ArmModel, JointState, Link, TaskAxes, TaskPose, TaskTwist, Wrench};
