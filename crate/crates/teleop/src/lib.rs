//! Scenario files, metrics output, UDP transport and the command-line front end around
//! [`teleop_core`].

pub mod arm_file;
pub mod fields;
pub mod ini;
pub mod metrics;
pub mod runner;
pub mod scenario;
pub mod selftest;
pub mod udp;

pub use fields::ConfigError;
pub use runner::{run_simulated, run_udp, RunOutcome, Summary};
pub use scenario::ScenarioConfig;
