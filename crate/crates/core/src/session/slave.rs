use alloc::vec::Vec;

use nalgebra::{DVector, UnitQuaternion, Vector3};

use super::config::{CouplingMode, GripperConfig, Payload, SessionConfig};
use super::contact::{contact_wrench, ContactEnvironment};
use super::coupling::{feedback_wrench, CouplingMap};
use super::mode::{Mode, StatusMessage};
use super::monitor::{ErrorMonitor, FaultEvent, FaultKind};
use super::recovery::{at_home, recover, RecoveryConfig, RecoveryPlan};
use super::wire::{self, Latest, WAVE_DOF};
use crate::control::{
    compose_arm_torque, gripper_coupling_torques, saturate, virtual_wall_torque,
    ControlDiagnostics, GainSet, GripperState,
};
use crate::error::Result;
use crate::netsim::{Packet, CHANNEL_BACKWARD, CHANNEL_FORWARD};
use crate::rigid_body::{
    bias_forces, mass_matrix, step, ArmModel, ChainFrames, JointState, TaskPose, TaskTwist,
    Wrench,
};
use crate::wave::{
    decode_coupled, energy_update, Direction, EnergyLedger, WaveConfig, WaveReceiver, WaveSample,
};

/// What the slave side did in one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaveReport {
    /// End-effector pose and twist after the step.
    pub ee: TaskPose,
    pub ee_twist: TaskTwist,
    /// Environment wrench acting on the end-effector during the step (contact and payload).
    pub contact: Wrench,
    /// Mode after the step.
    pub mode: Mode,
    /// Fault being handled, if any.
    pub fault: Option<FaultKind>,
    /// Fault raised during this tick.
    pub event: Option<FaultEvent>,
    /// The slave (re)engaged the coupling this tick.
    pub clutched: bool,
    /// Power delivered by the channel at this port (W).
    pub port_power: f64,
    pub torque: DVector<f64>,
    pub diagnostics: ControlDiagnostics,
}

#[derive(Debug, Clone)]
struct Forward {
    position: Vector3<f64>,
    velocity: Vector3<f64>,
    glove: GripperState,
}

/// Remote side: the arm with its controller stack, the gripper, the environment, and the
/// error handler.
#[derive(Debug, Clone)]
pub struct SlaveSide {
    model: ArmModel,
    gains: GainSet,
    coupling: CouplingMode,
    wave_t: WaveConfig,
    wave_g: WaveConfig,
    mask: Vector3<f64>,
    gripper_cfg: GripperConfig,
    environment: ContactEnvironment,
    payload: Option<Payload>,
    recovery: RecoveryConfig,
    monitor: ErrorMonitor,
    state: JointState,
    gripper: GripperState,
    gripper_d: Vector3<f64>,
    x_d: TaskPose,
    map: CouplingMap,
    rot_anchor_pending: bool,
    pos_anchor: Option<Vector3<f64>>,
    rx: WaveReceiver,
    prev_v: Vec<f64>,
    quat: Latest<UnitQuaternion<f64>>,
    forward: Latest<Forward>,
    seq: u32,
    mode: Mode,
    active_fault: Option<(FaultKind, Option<usize>)>,
    unrecoverable: bool,
    plan: Option<(RecoveryPlan, f64)>,
    events: Vec<FaultEvent>,
    energy_out: f64,
    ledger: EnergyLedger,
}

fn ee_state(model: &ArmModel, state: &JointState) -> Result<(ChainFrames, TaskPose, TaskTwist)> {
    let frames = ChainFrames::compute(model, &state.q)?;
    let pose = TaskPose::from_isometry(&frames.end_effector);
    let xd = frames.jacobian() * &state.qd;
    let twist = TaskTwist::new(
        Vector3::new(xd[0], xd[1], xd[2]),
        Vector3::new(xd[3], xd[4], xd[5]),
    );
    Ok((frames, pose, twist))
}

impl SlaveSide {
    pub fn new(cfg: &SessionConfig) -> Result<Self> {
        cfg.validate()?;
        let wave = cfg.wave_config()?;
        let state = JointState::at_rest(cfg.initial_q.clone());
        let (_, pose, _) = ee_state(&cfg.model, &state)?;
        let b = cfg.wave_impedance;
        let bg = cfg.gripper.wave_impedance;
        Ok(Self {
            model: cfg.model.clone(),
            gains: cfg.gains.clone(),
            coupling: cfg.coupling,
            wave_t: WaveConfig::uniform(b, 3)?,
            wave_g: WaveConfig::uniform(bg, 3)?,
            mask: cfg.translation_mask(),
            gripper_cfg: cfg.gripper,
            environment: cfg.environment.clone(),
            payload: cfg.payload,
            recovery: cfg.recovery,
            monitor: ErrorMonitor::new(cfg.saturation_window),
            state,
            gripper: GripperState::default(),
            gripper_d: Vector3::zeros(),
            x_d: pose,
            map: CouplingMap::clutch(cfg.master.scale, &pose, &pose),
            rot_anchor_pending: true,
            pos_anchor: None,
            rx: WaveReceiver::new(wave, Direction::MasterToSlave, cfg.playout_depth),
            prev_v: alloc::vec![0.0; WAVE_DOF],
            quat: Latest::default(),
            forward: Latest::default(),
            seq: 0,
            mode: Mode::Operational,
            active_fault: None,
            unrecoverable: false,
            plan: None,
            events: Vec::new(),
            energy_out: 0.0,
            ledger: EnergyLedger::new(),
        })
    }

    pub fn state(&self) -> &JointState {
        &self.state
    }

    pub fn gripper(&self) -> &GripperState {
        &self.gripper
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Recovery timed out; the slave stays in `Fault` for good.
    pub fn unrecoverable(&self) -> bool {
        self.unrecoverable
    }

    pub fn fault_events(&self) -> &[FaultEvent] {
        &self.events
    }

    /// Current Cartesian setpoint.
    pub fn setpoint(&self) -> &TaskPose {
        &self.x_d
    }

    pub fn end_effector(&self) -> Result<TaskPose> {
        Ok(ee_state(&self.model, &self.state)?.1)
    }

    /// Energy delivered by the channel at this port so far (J).
    pub fn energy_out(&self) -> f64 {
        self.energy_out
    }

    pub fn ledger(&self) -> EnergyLedger {
        self.ledger
    }

    pub fn receiver(&self) -> &WaveReceiver {
        &self.rx
    }

    pub fn home(&self) -> &DVector<f64> {
        &self.gains.posture
    }

    /// Raises a fault from outside the monitor, e.g. an operator stop.
    pub fn inject_fault(&mut self, t: f64, kind: FaultKind, joint: Option<usize>) {
        if self.mode.is_operational() {
            self.enter_fault(t, kind, joint);
        }
    }

    fn enter_fault(&mut self, t: f64, kind: FaultKind, joint: Option<usize>) -> FaultEvent {
        let event = FaultEvent { t, kind, joint };
        self.events.push(event);
        self.mode = Mode::Fault(kind);
        self.active_fault = Some((kind, joint));
        self.rx.flush();
        self.forward.clear();
        self.monitor.reset();
        event
    }

    fn clutch(&mut self, pose: &TaskPose) {
        self.x_d = *pose;
        self.map = CouplingMap::clutch(self.map.scale, pose, pose);
        self.rot_anchor_pending = true;
        self.pos_anchor = None;
        self.gripper_d = self.gripper.q;
        self.rx.flush();
        self.forward.clear();
        self.quat.clear();
    }

    fn ingest(&mut self, incoming: &[Packet]) {
        let operational = self.mode.is_operational();
        for p in incoming.iter().filter(|p| p.channel_id == CHANNEL_FORWARD) {
            match self.coupling {
                CouplingMode::Wave => {
                    if !operational {
                        continue;
                    }
                    if let Some(extra) = wire::push_wave_packet(&mut self.rx, p, Direction::MasterToSlave) {
                        if let Some(q) = wire::quat_from_slice(extra) {
                            self.quat.offer(p.seq, q);
                        }
                    }
                }
                CouplingMode::Direct => {
                    let v = &p.payload;
                    if !operational || v.len() != 16 || !v.iter().all(|x| x.is_finite()) {
                        continue;
                    }
                    let f = Forward {
                        position: Vector3::new(v[0], v[1], v[2]),
                        velocity: Vector3::new(v[3], v[4], v[5]),
                        glove: GripperState::new(
                            Vector3::new(v[6], v[7], v[8]),
                            Vector3::new(v[9], v[10], v[11]),
                        ),
                    };
                    self.forward.offer(p.seq, f);
                    if let Some(q) = wire::quat_from_slice(&v[12..16]) {
                        self.quat.offer(p.seq, q);
                    }
                }
            }
        }
    }

    fn update_orientation(&mut self) {
        if let Some(q) = self.quat.get().copied() {
            if self.rot_anchor_pending {
                self.map.master_rot0 = q;
                self.rot_anchor_pending = false;
            }
            self.x_d.orientation = self.map.map_orientation(&q);
        }
    }

    /// Advances the slave by one tick starting at `t`. Returns the datagrams to send back.
    pub fn step(&mut self, t: f64, dt: f64, incoming: &[Packet]) -> Result<(Vec<Packet>, SlaveReport)> {
        self.ingest(incoming);
        if let (Mode::Fault(_), false) = (self.mode, self.unrecoverable) {
            self.plan = Some((recover(&self.state, self.home(), &self.recovery), t));
            self.mode = Mode::Recovering { progress: 0.0 };
        }

        let (frames, pose, twist) = ee_state(&self.model, &self.state)?;
        let zero = WaveSample::zero(Direction::SlaveToMaster, WAVE_DOF);
        let mut port_power = 0.0;
        let mut backward = zero.values.clone();
        let mut received = WaveSample::zero(Direction::MasterToSlave, WAVE_DOF);
        let (tau, tau_gripper, diagnostics) = match self.mode {
            Mode::Operational => {
                self.update_orientation();
                let out = match self.coupling {
                    CouplingMode::Wave => self.wave_control(&frames, &pose, &twist, dt)?,
                    CouplingMode::Direct => self.direct_control(&pose, &twist)?,
                };
                port_power = out.power;
                backward = out.backward;
                if let Some(u) = out.received {
                    received = u;
                }
                (out.tau, out.tau_gripper, out.diagnostics)
            }
            Mode::Recovering { .. } => {
                let (tau, diag) = self.recovery_torque(t)?;
                (tau, self.hold_gripper(), diag)
            }
            Mode::Fault(_) => {
                let (tau, diag) = self.hold_torque()?;
                (tau, self.hold_gripper(), diag)
            }
        };
        self.energy_out += port_power * dt;

        let mut env = contact_wrench(&self.environment, &pose, &twist);
        if let Some(p) = self.payload.filter(|p| t >= p.from) {
            env = env + Wrench::from_force(self.model.gravity * p.mass);
        }
        self.state = step(&self.model, &self.state, &tau, &env, dt)?;
        self.step_gripper(&tau_gripper, dt);

        let (_, pose_after, twist_after) = ee_state(&self.model, &self.state)?;
        let mut event = None;
        let mut clutched = false;
        match self.mode {
            Mode::Operational => {
                if let Some((kind, joint)) =
                    self.monitor.check(&self.model, &self.state, diagnostics.saturated, dt)
                {
                    event = Some(self.enter_fault(t + dt, kind, joint));
                }
            }
            Mode::Recovering { .. } => {
                if let Some((plan, t0)) = &self.plan {
                    let elapsed = t + dt - t0;
                    let progress = if plan.duration > 0.0 {
                        (elapsed / plan.duration).min(1.0)
                    } else {
                        1.0
                    };
                    if progress >= 1.0 && at_home(&self.state, self.home(), &self.recovery) {
                        self.mode = Mode::Operational;
                        self.active_fault = None;
                        self.plan = None;
                        self.clutch(&pose_after);
                        clutched = true;
                    } else if elapsed > self.recovery.timeout {
                        let (kind, joint) = self
                            .active_fault
                            .unwrap_or((FaultKind::PositionLimit, None));
                        self.mode = Mode::Fault(kind);
                        self.unrecoverable = true;
                        self.plan = None;
                        let e = FaultEvent { t: t + dt, kind, joint };
                        self.events.push(e);
                        event = Some(e);
                    } else {
                        self.mode = Mode::Recovering { progress };
                    }
                }
            }
            Mode::Fault(_) => {}
        }

        self.seq += 1;
        let stamp = wire::stamp_ns(t);
        let sent = WaveSample {
            values: backward.clone(),
            direction: Direction::SlaveToMaster,
            seq: self.seq,
            stamp: t,
        };
        let data = match self.coupling {
            CouplingMode::Wave => {
                self.ledger = energy_update(self.ledger, &sent, &received, dt);
                let p = wire::wave_packet(CHANNEL_BACKWARD, self.seq, stamp, &backward, &self.prev_v, &[]);
                self.prev_v = backward;
                p
            }
            CouplingMode::Direct => Packet::new(CHANNEL_BACKWARD, self.seq, stamp, backward),
        };
        let status = StatusMessage {
            mode: self.mode,
            fault: self.active_fault.map(|f| f.0),
            joint: self.active_fault.and_then(|f| f.1),
            unrecoverable: self.unrecoverable,
        };
        let packets = alloc::vec![data, status.to_packet(self.seq, stamp)];

        Ok((
            packets,
            SlaveReport {
                ee: pose_after,
                ee_twist: twist_after,
                contact: env,
                mode: self.mode,
                fault: self.active_fault.map(|f| f.0),
                event,
                clutched,
                port_power,
                torque: tau,
                diagnostics,
            },
        ))
    }

    /// Translational spring force `K·e + B_tr·(0 − ω)` on the controlled axes, i.e. the part of
    /// the task force that does not depend on the commanded translational velocity.
    fn spring_force(&self, pose: &TaskPose, twist: &TaskTwist) -> Vector3<f64> {
        let e = self.x_d.error_from(pose);
        let ke = self.gains.stiffness * e;
        let b = &self.gains.damping;
        Vector3::from_fn(|i, _| {
            let cross: f64 = (0..3).map(|j| -b[(i, 3 + j)] * twist.angular[j]).sum();
            (ke[i] + cross) * self.mask[i]
        })
    }

    fn wave_control(
        &mut self,
        _frames: &ChainFrames,
        pose: &TaskPose,
        twist: &TaskTwist,
        dt: f64,
    ) -> Result<ControlOutput> {
        let u = self.rx.next_sample();
        let split = |s: &WaveSample, r: core::ops::Range<usize>| WaveSample {
            values: s.values[r].to_vec(),
            ..s.clone()
        };
        let spring = self.spring_force(pose, twist);
        let damping: Vec<f64> = (0..3).map(|i| self.gains.damping[(i, i)] * self.mask[i]).collect();
        let vel: Vec<f64> = (0..3).map(|i| twist.linear[i] * self.mask[i]).collect();
        let (xd_cmd, force, v_t) =
            decode_coupled(&split(&u, 0..3), spring.as_slice(), &damping, &vel, &self.wave_t)?;
        let xd_cmd = Vector3::from_column_slice(&xd_cmd).component_mul(&self.mask);

        let g = &self.gripper_cfg;
        let spring_g = (self.gripper_d - self.gripper.q) * g.stiffness;
        let (qd_cmd, tau_g, v_g) = decode_coupled(
            &split(&u, 3..6),
            spring_g.as_slice(),
            &[g.damping; 3],
            self.gripper.qd.as_slice(),
            &self.wave_g,
        )?;

        let xd_d = TaskTwist::new(xd_cmd, Vector3::zeros());
        let (tau, diagnostics) =
            compose_arm_torque(&self.model, &self.state, &self.x_d, &xd_d, &Wrench::zero(), &self.gains)?;
        self.x_d.position += xd_cmd * dt;
        let qd_cmd = Vector3::from_column_slice(&qd_cmd);
        self.gripper_d += qd_cmd * dt;

        let power = force.iter().zip(xd_cmd.iter()).map(|(f, v)| f * v).sum::<f64>()
            + tau_g.iter().zip(qd_cmd.iter()).map(|(f, v)| f * v).sum::<f64>();
        let mut backward = v_t.values;
        backward.extend(v_g.values);
        Ok(ControlOutput {
            tau,
            tau_gripper: Vector3::from_column_slice(&tau_g),
            diagnostics,
            power,
            backward,
            received: Some(u),
        })
    }

    fn direct_control(&mut self, pose: &TaskPose, twist: &TaskTwist) -> Result<ControlOutput> {
        let (xd_lin, glove) = match self.forward.get() {
            Some(f) => {
                let anchor = *self.pos_anchor.get_or_insert(f.position);
                self.x_d.position =
                    self.map.slave_origin + (f.position - anchor).component_mul(&self.mask);
                (f.velocity.component_mul(&self.mask), f.glove)
            }
            None => (
                Vector3::zeros(),
                GripperState::new(self.gripper_d, Vector3::zeros()),
            ),
        };
        let xd_d = TaskTwist::new(xd_lin, Vector3::zeros());
        let (tau, diagnostics) =
            compose_arm_torque(&self.model, &self.state, &self.x_d, &xd_d, &Wrench::zero(), &self.gains)?;
        let e = self.x_d.error_from(pose);
        let task = self.gains.stiffness * e + self.gains.damping * (xd_d.to_vector() - twist.to_vector());
        let coupling = Wrench::from_vector(&task.component_mul(&self.model.task_axes.mask()));
        let force = feedback_wrench(&coupling).component_mul(&self.mask);

        let g = &self.gripper_cfg;
        let (_, tau_g) = gripper_coupling_torques(
            &glove,
            &self.gripper,
            &Vector3::repeat(g.stiffness),
            &Vector3::repeat(g.damping),
        );
        let power = force.dot(&xd_lin) + tau_g.dot(&glove.qd);
        let mut backward: Vec<f64> = force.iter().copied().collect();
        backward.extend(tau_g.iter());
        Ok(ControlOutput {
            tau,
            tau_gripper: tau_g,
            diagnostics,
            power,
            backward,
            received: None,
        })
    }

    /// Computed-torque PD along the recovery trajectory, with the virtual walls active.
    fn recovery_torque(&self, t: f64) -> Result<(DVector<f64>, ControlDiagnostics)> {
        let (plan, t0) = match &self.plan {
            Some(p) => p,
            None => return self.hold_torque(),
        };
        let r = plan.sample(t - t0);
        let cfg = &self.recovery;
        let accel = &r.qdd + (&r.q - &self.state.q) * cfg.kp + (&r.qd - &self.state.qd) * cfg.kd;
        let m = mass_matrix(&self.model, &self.state.q)?;
        let mut tau = m * accel
            + bias_forces(&self.model, &self.state)?
            + virtual_wall_torque(&self.state, &self.gains);
        let saturated = saturate(&mut tau, &self.model.torque_limits);
        Ok((
            tau,
            ControlDiagnostics {
                near_singular: false,
                saturated,
            },
        ))
    }

    /// Gravity compensation with joint damping; used once recovery has been abandoned.
    fn hold_torque(&self) -> Result<(DVector<f64>, ControlDiagnostics)> {
        let m = mass_matrix(&self.model, &self.state.q)?;
        let mut tau = m * (&self.state.qd * -self.recovery.kd)
            + bias_forces(&self.model, &self.state)?
            + virtual_wall_torque(&self.state, &self.gains);
        let saturated = saturate(&mut tau, &self.model.torque_limits);
        Ok((
            tau,
            ControlDiagnostics {
                near_singular: false,
                saturated,
            },
        ))
    }

    fn hold_gripper(&self) -> Vector3<f64> {
        let g = &self.gripper_cfg;
        (self.gripper_d - self.gripper.q) * g.stiffness - self.gripper.qd * g.damping
    }

    fn step_gripper(&mut self, tau: &Vector3<f64>, dt: f64) {
        let g = &self.gripper_cfg;
        for i in 0..3 {
            let mut torque = tau[i] - g.friction * self.gripper.qd[i];
            if let Some(obj) = g.object_angle {
                if self.gripper.q[i] > obj {
                    torque -= g.object_stiffness * (self.gripper.q[i] - obj);
                }
            }
            self.gripper.qd[i] += torque / g.inertia * dt;
            self.gripper.q[i] += self.gripper.qd[i] * dt;
        }
    }
}

struct ControlOutput {
    tau: DVector<f64>,
    tau_gripper: Vector3<f64>,
    diagnostics: ControlDiagnostics,
    power: f64,
    backward: Vec<f64>,
    received: Option<WaveSample>,
}
