//! Wave-variable transmission of the bilateral coupling signals.
//!
//! Velocity and force at each port are mixed into the wave pair
//! `u = (b·ẋ + F)/√(2b)` and `v = (b·ẋ − F)/√(2b)`, so that `F·ẋ = (u² − v²)/2`. Delaying,
//! dropping or reordering waves can then only remove energy from the link, never add it.

mod energy;
mod receiver;
mod transform;

pub use energy::{energy_update, EnergyLedger};
pub use receiver::{ReceiverStats, WaveReceiver};
pub use transform::{
    decode, decode_coupled, encode, master_port, on_missing_sample, Direction, WaveConfig,
    WaveSample,
};
