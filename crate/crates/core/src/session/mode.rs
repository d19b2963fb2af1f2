use alloc::vec::Vec;
use core::fmt;

use super::monitor::FaultKind;
use crate::netsim::{Packet, CHANNEL_CONTROL, FLAG_CONTROL};

/// Supervisor state of the slave arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Operational,
    Fault(FaultKind),
    /// Returning to the default posture; `progress` runs from 0 to 1 along the trajectory.
    Recovering { progress: f64 },
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Operational => "operational",
            Mode::Fault(_) => "fault",
            Mode::Recovering { .. } => "recovering",
        }
    }

    pub fn is_operational(&self) -> bool {
        matches!(self, Mode::Operational)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Slave status as carried on the control-plane channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatusMessage {
    pub mode: Mode,
    /// Fault being handled, if any.
    pub fault: Option<FaultKind>,
    pub joint: Option<usize>,
    pub unrecoverable: bool,
}

impl StatusMessage {
    pub fn to_packet(&self, seq: u32, stamp_ns: u64) -> Packet {
        let (mode, progress) = match self.mode {
            Mode::Operational => (0.0, 0.0),
            Mode::Fault(_) => (1.0, 0.0),
            Mode::Recovering { progress } => (2.0, progress),
        };
        let payload: Vec<f64> = alloc::vec![
            mode,
            f64::from(self.fault.map_or(0, |k| k.code())),
            self.joint.map_or(-1.0, |j| j as f64),
            f64::from(u8::from(self.unrecoverable)),
            progress,
        ];
        Packet {
            channel_id: CHANNEL_CONTROL,
            flags: FLAG_CONTROL,
            seq,
            stamp_ns,
            payload,
        }
    }

    pub fn from_packet(p: &Packet) -> Option<Self> {
        if p.channel_id != CHANNEL_CONTROL || !p.is_control() || p.payload.len() != 5 {
            return None;
        }
        let v = &p.payload;
        let fault = FaultKind::from_code(v[1] as u8);
        let mode = match v[0] as u8 {
            0 => Mode::Operational,
            1 => Mode::Fault(fault?),
            2 => Mode::Recovering {
                progress: v[4].clamp(0.0, 1.0),
            },
            _ => return None,
        };
        Some(Self {
            mode,
            fault,
            joint: (v[2] >= 0.0).then_some(v[2] as usize),
            unrecoverable: v[3] != 0.0,
        })
    }
}
