use alloc::vec::Vec;

use nalgebra::Vector3;
use num_traits::Float;

use super::config::SessionConfig;
use super::master::{MasterReport, MasterSide};
use super::mode::Mode;
use super::monitor::{FaultEvent, FaultKind};
use super::observer::EnergyObserver;
use super::script::FootplateScript;
use super::slave::{SlaveReport, SlaveSide};
use crate::control::footplate_to_twist;
use crate::error::Result;
use crate::netsim::{ChannelConfig, Link, SimChannel};
use crate::rigid_body::TaskTwist;

/// One row of session output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    /// End of the tick (s).
    pub t: f64,
    /// Distance between the slave end-effector and the mapped master position (m).
    pub tracking_error: f64,
    /// Force rendered on the operator (N).
    pub felt_force: Vector3<f64>,
    /// Energy absorbed by the link so far (J).
    pub channel_energy: f64,
    pub mode: Mode,
    pub fault: Option<FaultKind>,
    pub base_twist: TaskTwist,
}

/// Reference for the tracking-error metric, re-anchored whenever the slave clutches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingReference {
    pub scale: f64,
    pub mask: Vector3<f64>,
    pub master_anchor: Vector3<f64>,
    pub slave_anchor: Vector3<f64>,
}

impl TrackingReference {
    pub fn anchor(&mut self, slave: Vector3<f64>, master: Vector3<f64>) {
        self.slave_anchor = slave;
        self.master_anchor = master;
    }

    pub fn error(&self, slave: &Vector3<f64>, master: &Vector3<f64>) -> f64 {
        let target = self.slave_anchor + (master - self.master_anchor) * self.scale;
        (slave - target).component_mul(&self.mask).norm()
    }
}

/// Planar pose of the mobile base, integrated open-loop from the commanded twist.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BasePose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl BasePose {
    /// Integrates a body-frame twist for `dt`.
    pub fn integrate(&mut self, twist: &TaskTwist, dt: f64) {
        let (s, c) = Float::sin_cos(self.yaw);
        self.x += (c * twist.linear.x - s * twist.linear.y) * dt;
        self.y += (s * twist.linear.x + c * twist.linear.y) * dt;
        self.yaw += twist.angular.z * dt;
    }
}

/// Combines the per-tick reports of both sides into a metrics row and keeps the session-wide
/// bookkeeping. Shared by the in-process session and by split runs that join logs afterwards.
#[derive(Debug, Clone)]
pub struct MetricsBuilder {
    tracking: TrackingReference,
    observer: EnergyObserver,
    footplate: FootplateScript,
    base: BasePose,
}

impl MetricsBuilder {
    pub fn new(cfg: &SessionConfig, slave_start: Vector3<f64>) -> Self {
        Self {
            tracking: TrackingReference {
                scale: cfg.master.scale,
                mask: cfg.translation_mask(),
                master_anchor: Vector3::zeros(),
                slave_anchor: slave_start,
            },
            observer: EnergyObserver::new(cfg.divergence_threshold),
            footplate: cfg.footplate.clone(),
            base: BasePose::default(),
        }
    }

    pub fn observer(&self) -> &EnergyObserver {
        &self.observer
    }

    pub fn base(&self) -> &BasePose {
        &self.base
    }

    /// Row for the tick `[t, t + dt)`.
    pub fn record(
        &mut self,
        t: f64,
        dt: f64,
        master: &MasterReport,
        slave: &SlaveReport,
    ) -> MetricsRecord {
        if slave.clutched {
            self.tracking.anchor(slave.ee.position, master.position);
        }
        self.observer
            .update(t + dt, master.port_power, slave.port_power, dt);
        let base_twist = self
            .footplate
            .sample(t)
            .map_or_else(TaskTwist::zero, footplate_to_twist);
        self.base.integrate(&base_twist, dt);
        MetricsRecord {
            t: t + dt,
            tracking_error: self.tracking.error(&slave.ee.position, &master.position),
            felt_force: master.felt_force,
            channel_energy: self.observer.dissipated(),
            mode: slave.mode,
            fault: slave.fault,
            base_twist,
        }
    }
}

/// Counters for datagrams the links refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SendFailures {
    pub forward: u64,
    pub backward: u64,
}

/// Master and slave joined by two one-way links, stepped together in lock-step.
#[derive(Debug)]
pub struct Session<L: Link> {
    master: MasterSide,
    slave: SlaveSide,
    forward: L,
    backward: L,
    tick: f64,
    ticks: u64,
    metrics: MetricsBuilder,
    failures: SendFailures,
}

impl Session<SimChannel> {
    /// Session over simulated channels.
    pub fn simulated(cfg: &SessionConfig, forward: ChannelConfig, backward: ChannelConfig) -> Result<Self> {
        Session::new(cfg, SimChannel::new(forward)?, SimChannel::new(backward)?)
    }
}

impl<L: Link> Session<L> {
    pub fn new(cfg: &SessionConfig, forward: L, backward: L) -> Result<Self> {
        let slave = SlaveSide::new(cfg)?;
        let master = MasterSide::new(cfg)?;
        let start = slave.end_effector()?.position;
        Ok(Self {
            master,
            slave,
            forward,
            backward,
            tick: cfg.tick,
            ticks: 0,
            metrics: MetricsBuilder::new(cfg, start),
            failures: SendFailures::default(),
        })
    }

    pub fn master(&self) -> &MasterSide {
        &self.master
    }

    pub fn slave(&self) -> &SlaveSide {
        &self.slave
    }

    pub fn slave_mut(&mut self) -> &mut SlaveSide {
        &mut self.slave
    }

    pub fn observer(&self) -> &EnergyObserver {
        self.metrics.observer()
    }

    pub fn base(&self) -> &BasePose {
        self.metrics.base()
    }

    pub fn links(&self) -> (&L, &L) {
        (&self.forward, &self.backward)
    }

    pub fn send_failures(&self) -> SendFailures {
        self.failures
    }

    pub fn fault_events(&self) -> &[FaultEvent] {
        self.slave.fault_events()
    }

    /// Time at the start of the next tick.
    pub fn time(&self) -> f64 {
        self.ticks as f64 * self.tick
    }

    pub fn tick(&self) -> f64 {
        self.tick
    }

    /// One control tick: master reads the returning link and renders force, then the slave
    /// reads the forward link, controls, and steps the arm.
    pub fn run_tick(&mut self) -> Result<MetricsRecord> {
        let t = self.time();
        let dt = self.tick;
        let inbox = self.backward.poll(t);
        let (out, master) = self.master.step(t, dt, &inbox)?;
        for p in out {
            if self.forward.send(p, t).is_err() {
                self.failures.forward += 1;
            }
        }
        let inbox = self.forward.poll(t);
        let (out, slave) = self.slave.step(t, dt, &inbox)?;
        for p in out {
            if self.backward.send(p, t).is_err() {
                self.failures.backward += 1;
            }
        }
        self.ticks += 1;
        Ok(self.metrics.record(t, dt, &master, &slave))
    }

    /// Runs `round(duration / tick)` ticks.
    pub fn run(&mut self, duration: f64) -> Result<Vec<MetricsRecord>> {
        let n = if duration > 0.0 {
            (duration / self.tick).round() as usize
        } else {
            0
        };
        (0..n).map(|_| self.run_tick()).collect()
    }
}
