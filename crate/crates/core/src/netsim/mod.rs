//! Network impairment model and datagram codec.
//!
//! [`SimChannel`] reproduces delay, gamma jitter and random loss deterministically from a seed.
//! The same [`Packet`] layout is used on real UDP sockets, so a session can run over either
//! through the [`Link`] trait.
//!
//! Wire layout (little-endian): `"WAVE"`, version `u8 = 1`, channel id `u8`, flags `u16`,
//! sequence `u32`, timestamp `u64` (ns), value count `u16` (at most 64), the values as `f64`,
//! then a CRC-32 (IEEE) of all preceding bytes.

mod channel;
mod codec;

use alloc::vec::Vec;

pub use channel::{ChannelConfig, ChannelStats, GammaJitter, SimChannel};
pub use codec::{
    decode_packet, encode_packet, CodecError, Packet, FLAG_CONTROL, HEADER_LEN, MAGIC,
    MAX_VALUES, VERSION,
};

/// Forward wave traffic, master to slave.
pub const CHANNEL_FORWARD: u8 = 0;
/// Returning wave traffic, slave to master.
pub const CHANNEL_BACKWARD: u8 = 1;
/// Session control plane (mode and fault events); always sent with [`FLAG_CONTROL`].
pub const CHANNEL_CONTROL: u8 = 2;

/// Default UDP port for master-to-slave traffic.
pub const DEFAULT_PORT_FORWARD: u16 = 47474;
/// Default UDP port for slave-to-master traffic.
pub const DEFAULT_PORT_BACKWARD: u16 = 47475;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinkError {
    #[error("channel overloaded: {0} packets already in flight")]
    Overflow(usize),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("transport error: {0}")]
    Transport(alloc::string::String),
}

/// One direction of a master-slave connection.
pub trait Link {
    fn send(&mut self, packet: Packet, now: f64) -> Result<(), LinkError>;
    /// Packets that have arrived by `now`, each returned once.
    fn poll(&mut self, now: f64) -> Vec<Packet>;
}

impl<L: Link + ?Sized> Link for alloc::boxed::Box<L> {
    fn send(&mut self, packet: Packet, now: f64) -> Result<(), LinkError> {
        (**self).send(packet, now)
    }

    fn poll(&mut self, now: f64) -> Vec<Packet> {
        (**self).poll(now)
    }
}
