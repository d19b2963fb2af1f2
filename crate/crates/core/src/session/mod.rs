//! The bilateral teleoperation loop.
//!
//! [`MasterSide`] models the operator's device and [`SlaveSide`] the remote arm; each is a
//! self-contained state machine that consumes datagrams and produces datagrams, so they can be
//! joined by simulated channels in one [`Session`] or by real sockets in separate loops.
//!
//! Per tick the master samples the operator script, combines its hand velocity with the
//! returning wave into the rendered force and the forward wave, and integrates the hand stage.
//! The slave decodes the forward wave into a velocity setpoint, runs the Cartesian impedance
//! controller with its nullspace and joint-wall terms, applies contact forces, steps the arm
//! dynamics, checks for faults, and sends the returning wave and its status.

mod config;
mod contact;
mod coupling;
mod master;
mod mode;
mod monitor;
mod observer;
mod recovery;
mod script;
#[allow(clippy::module_inception)]
mod session;
mod slave;
pub mod wire;

pub use config::{
    translational_inertia_min, CouplingMode, GripperConfig, MasterConfig, Payload,
    SessionConfig,
};
pub use contact::{contact_wrench, ContactEnvironment, Plane};
pub use coupling::{feedback_wrench, CouplingMap};
pub use master::{MasterReport, MasterSide};
pub use mode::{Mode, StatusMessage};
pub use monitor::{error_monitor, ErrorMonitor, FaultEvent, FaultKind};
pub use observer::EnergyObserver;
pub use recovery::{at_home, recover, RecoveryConfig, RecoveryPlan, RecoveryReference};
pub use script::{min_jerk, FootplateScript, HandTarget, OperatorScript, Waypoint};
pub use session::{
    BasePose, MetricsBuilder, MetricsRecord, SendFailures, Session, TrackingReference,
};
pub use slave::{SlaveReport, SlaveSide};
