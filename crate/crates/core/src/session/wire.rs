//! Payload layouts of the session's datagrams.

use alloc::vec::Vec;

use nalgebra::{Quaternion, UnitQuaternion};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::netsim::Packet;
use crate::wave::{Direction, WaveReceiver, WaveSample};

/// Wave-coupled DoF: translation x, y, z, then the three fingers.
pub const WAVE_DOF: usize = 6;

/// Wave packets carry the current sample and a copy of the previous one, so a single lost
/// datagram does not cost a sample.
pub fn wave_packet(
    channel_id: u8,
    seq: u32,
    stamp_ns: u64,
    current: &[f64],
    previous: &[f64],
    extra: &[f64],
) -> Packet {
    let mut payload = Vec::with_capacity(current.len() + previous.len() + extra.len());
    payload.extend_from_slice(current);
    payload.extend_from_slice(previous);
    payload.extend_from_slice(extra);
    Packet::new(channel_id, seq, stamp_ns, payload)
}

/// Splits a wave packet into its samples and queues them. Returns the trailing values.
pub fn push_wave_packet<'a>(
    rx: &mut WaveReceiver,
    packet: &'a Packet,
    direction: Direction,
) -> Option<&'a [f64]> {
    let p = &packet.payload;
    if p.len() < 2 * WAVE_DOF {
        return None;
    }
    let stamp = packet.stamp_ns as f64 * 1e-9;
    if packet.seq > 1 {
        rx.push_redundant(WaveSample {
            values: p[WAVE_DOF..2 * WAVE_DOF].to_vec(),
            direction,
            seq: packet.seq - 1,
            stamp,
        });
    }
    rx.push(WaveSample {
        values: p[..WAVE_DOF].to_vec(),
        direction,
        seq: packet.seq,
        stamp,
    });
    Some(&p[2 * WAVE_DOF..])
}

pub fn quat_to_slice(q: &UnitQuaternion<f64>) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

pub fn quat_from_slice(v: &[f64]) -> Option<UnitQuaternion<f64>> {
    if v.len() != 4 || !v.iter().all(|x| x.is_finite()) {
        return None;
    }
    let q = Quaternion::new(v[0], v[1], v[2], v[3]);
    (q.norm() > 1e-6).then(|| UnitQuaternion::from_quaternion(q))
}

pub fn stamp_ns(t: f64) -> u64 {
    if t <= 0.0 {
        0
    } else {
        (t * 1e9).round() as u64
    }
}

/// Keeps the newest value by sequence number.
#[derive(Debug, Clone, PartialEq)]
pub struct Latest<T> {
    seq: Option<u32>,
    value: Option<T>,
}

impl<T> Default for Latest<T> {
    fn default() -> Self {
        Self {
            seq: None,
            value: None,
        }
    }
}

impl<T> Latest<T> {
    pub fn offer(&mut self, seq: u32, value: T) {
        if self.seq.is_none_or(|s| seq > s) {
            self.seq = Some(seq);
            self.value = Some(value);
        }
    }

    pub fn get(&self) -> Option<&T> {
        self.value.as_ref()
    }

    /// Forgets the value but keeps rejecting anything older than what was seen.
    pub fn clear(&mut self) {
        self.value = None;
    }
}
