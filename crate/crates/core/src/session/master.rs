use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use nalgebra::{UnitQuaternion, Vector3};

use super::config::{CouplingMode, GripperConfig, MasterConfig, SessionConfig};
use super::mode::StatusMessage;
use super::script::OperatorScript;
use super::wire::{self, Latest, WAVE_DOF};
use crate::control::GripperState;
use crate::error::Result;
use crate::netsim::{Packet, CHANNEL_BACKWARD, CHANNEL_CONTROL, CHANNEL_FORWARD};
use crate::wave::{
    energy_update, master_port, Direction, EnergyLedger, WaveConfig, WaveReceiver, WaveSample,
};

/// What the master side did in one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterReport {
    /// Force rendered on the operator's hand stage (N).
    pub felt_force: Vector3<f64>,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    pub glove: GripperState,
    /// Power pushed into the channel at this port (W).
    pub port_power: f64,
    /// Whether the master believed the slave operational this tick.
    pub engaged: bool,
}

/// Operator side: hand stage, wrist sensor, glove, and the master wave port.
#[derive(Debug, Clone)]
pub struct MasterSide {
    cfg: MasterConfig,
    gripper: GripperConfig,
    coupling: CouplingMode,
    wave: WaveConfig,
    mask: Vector3<f64>,
    script: OperatorScript,
    position: Vector3<f64>,
    velocity: Vector3<f64>,
    orientation: UnitQuaternion<f64>,
    glove: GripperState,
    rx: WaveReceiver,
    prev_u: Vec<f64>,
    seq: u32,
    status: Latest<StatusMessage>,
    held_force: Latest<Vec<f64>>,
    engaged: bool,
    energy_in: f64,
    ledger: EnergyLedger,
}

impl MasterSide {
    pub fn new(cfg: &SessionConfig) -> Result<Self> {
        let wave = cfg.wave_config()?;
        Ok(Self {
            cfg: cfg.master,
            gripper: cfg.gripper,
            coupling: cfg.coupling,
            rx: WaveReceiver::new(wave.clone(), Direction::SlaveToMaster, cfg.playout_depth),
            wave,
            mask: cfg.translation_mask(),
            script: cfg.script.clone(),
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
            orientation: cfg.script.sample(0.0).orientation,
            glove: GripperState::default(),
            prev_u: alloc::vec![0.0; WAVE_DOF],
            seq: 0,
            status: Latest::default(),
            held_force: Latest::default(),
            engaged: true,
            energy_in: 0.0,
            ledger: EnergyLedger::new(),
        })
    }

    pub fn position(&self) -> Vector3<f64> {
        self.position
    }

    /// Energy delivered into the channel at this port so far (J).
    pub fn energy_in(&self) -> f64 {
        self.energy_in
    }

    /// Wave energy sent (`e_in`) and consumed (`e_out`) at this port.
    pub fn ledger(&self) -> EnergyLedger {
        self.ledger
    }

    pub fn receiver(&self) -> &WaveReceiver {
        &self.rx
    }

    /// Last slave status received over the control plane.
    pub fn slave_status(&self) -> Option<&StatusMessage> {
        self.status.get()
    }

    fn ingest(&mut self, incoming: &[Packet]) {
        for p in incoming {
            match p.channel_id {
                CHANNEL_CONTROL => {
                    if let Some(s) = StatusMessage::from_packet(p) {
                        self.status.offer(p.seq, s);
                    }
                }
                CHANNEL_BACKWARD => match self.coupling {
                    CouplingMode::Wave => {
                        wire::push_wave_packet(&mut self.rx, p, Direction::SlaveToMaster);
                    }
                    CouplingMode::Direct => {
                        if p.payload.len() == WAVE_DOF && p.payload.iter().all(|v| v.is_finite()) {
                            self.held_force.offer(p.seq, p.payload.clone());
                        }
                    }
                },
                _ => {}
            }
        }
    }

    /// Advances the master by one tick starting at `t`, consuming whatever arrived from the
    /// slave. Returns the datagrams to send.
    pub fn step(&mut self, t: f64, dt: f64, incoming: &[Packet]) -> Result<(Vec<Packet>, MasterReport)> {
        self.ingest(incoming);
        let engaged = self.status.get().is_none_or(|s| s.mode.is_operational());
        if !engaged || engaged != self.engaged {
            self.rx.flush();
            self.held_force.clear();
        }
        self.engaged = engaged;

        let s = self.cfg.scale;
        let target = self.script.sample(t);
        let zero = WaveSample::zero(Direction::SlaveToMaster, WAVE_DOF);
        let wave = self.coupling == CouplingMode::Wave && engaged;
        let v = if wave { self.rx.next_sample() } else { zero };
        let held: Vec<f64> = match (self.coupling, engaged) {
            (CouplingMode::Direct, true) => self
                .held_force
                .get()
                .cloned()
                .unwrap_or_else(|| alloc::vec![0.0; WAVE_DOF]),
            _ => alloc::vec![0.0; WAVE_DOF],
        };

        // Velocity-implicit update. In wave mode the port force `b·ẋ − √(2b)·v` is solved
        // together with the new velocity, so the port relations hold exactly for `ẋ⁺`.
        let sent_position = self.position * s;
        let sent_velocity = self.velocity * s;
        let sent_glove = self.glove;
        let (b, bg) = (self.wave.impedance[0], self.wave.impedance[3]);
        let c = &self.cfg;
        #[allow(clippy::needless_range_loop)]
        for i in 0..3 {
            if self.mask[i] == 0.0 {
                self.velocity[i] = 0.0;
                continue;
            }
            let (port_damping, port_push) = if wave {
                (s * s * b, s * (2.0 * b).sqrt() * v.values[i])
            } else {
                (0.0, -s * held[i])
            };
            let push = c.hand_stiffness * (target.position[i] - self.position[i])
                + c.hand_damping * target.velocity[i]
                + port_push;
            self.velocity[i] = (c.mass * self.velocity[i] + dt * push)
                / (c.mass + dt * (c.hand_damping + c.damping + port_damping));
        }
        let g = &self.gripper;
        let glove_target = target.grip * g.closed_angle;
        let glove_rate = target.grip_rate * g.closed_angle;
        for i in 0..3 {
            let (port_damping, port_push) = if wave {
                (bg, (2.0 * bg).sqrt() * v.values[3 + i])
            } else {
                (0.0, -held[3 + i])
            };
            let push = g.hand_stiffness * (glove_target - self.glove.q[i])
                + g.hand_damping * glove_rate
                + port_push;
            self.glove.qd[i] = (g.glove_inertia * self.glove.qd[i] + dt * push)
                / (g.glove_inertia + dt * (g.hand_damping + g.glove_friction + port_damping));
        }

        let port_velocity: Vec<f64> = (0..3)
            .map(|i| s * self.velocity[i])
            .chain(self.glove.qd.iter().copied())
            .collect();
        let (force, u) = if wave {
            let (force, u) = master_port(&v, &port_velocity, &self.wave)?;
            (force, u.values)
        } else {
            (held, alloc::vec![0.0; WAVE_DOF])
        };
        let port_power: f64 = force.iter().zip(&port_velocity).map(|(f, v)| f * v).sum();
        self.energy_in += port_power * dt;
        if self.coupling == CouplingMode::Wave {
            let sent = WaveSample {
                values: u.clone(),
                direction: Direction::MasterToSlave,
                seq: self.seq + 1,
                stamp: t,
            };
            self.ledger = energy_update(self.ledger, &sent, &v, dt);
        }
        let felt = Vector3::new(force[0], force[1], force[2]).component_mul(&self.mask) * -s;
        self.position += self.velocity * dt;
        for i in 0..3 {
            self.glove.q[i] += self.glove.qd[i] * dt;
        }
        self.orientation = target.orientation;

        self.seq += 1;
        let stamp = wire::stamp_ns(t);
        let quat = wire::quat_to_slice(&self.orientation);
        let packet = match self.coupling {
            CouplingMode::Wave => {
                let p = wire::wave_packet(CHANNEL_FORWARD, self.seq, stamp, &u, &self.prev_u, &quat);
                self.prev_u = u;
                p
            }
            CouplingMode::Direct => {
                let mut payload = Vec::with_capacity(16);
                payload.extend(sent_position.component_mul(&self.mask).iter());
                payload.extend(sent_velocity.component_mul(&self.mask).iter());
                payload.extend(sent_glove.q.iter());
                payload.extend(sent_glove.qd.iter());
                payload.extend_from_slice(&quat);
                Packet::new(CHANNEL_FORWARD, self.seq, stamp, payload)
            }
        };

        Ok((
            alloc::vec![packet],
            MasterReport {
                felt_force: felt,
                position: self.position,
                velocity: self.velocity,
                orientation: self.orientation,
                glove: self.glove,
                port_power,
                engaged,
            },
        ))
    }
}
