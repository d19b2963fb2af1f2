//! Bilateral teleoperation core: rigid-body dynamics, the arm/gripper controller stack,
//! wave-variable transmission, a seeded network impairment model with its datagram codec, and
//! the session loop that ties them together.
//!
//! The crate is `no_std` compatible (with `alloc`); disable the default `std` feature to build
//! it for targets without an operating system.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod control;
pub mod netsim;
pub mod rigid_body;
pub mod session;
pub mod wave;

pub use error::{Error, Result};
