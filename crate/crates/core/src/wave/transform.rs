use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{check_finite, check_len, Error, Result};

/// Wave impedance per coupled degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveConfig {
    pub impedance: Vec<f64>,
}

impl WaveConfig {
    pub fn new(impedance: Vec<f64>) -> Result<Self> {
        let cfg = Self { impedance };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same impedance `b` on `dof` channels.
    pub fn uniform(b: f64, dof: usize) -> Result<Self> {
        Self::new(alloc::vec![b; dof])
    }

    pub fn dof(&self) -> usize {
        self.impedance.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.impedance.is_empty() {
            return Err(Error::InvalidConfig("wave channel needs at least one DoF".into()));
        }
        if self.impedance.iter().all(|b| *b > 0.0 && b.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidConfig("wave impedance must be > 0".into()))
        }
    }
}

/// Which way a wave sample travels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Forward wave `u`, master to slave.
    MasterToSlave,
    /// Returning wave `v`, slave to master.
    SlaveToMaster,
}

/// One wave sample on the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSample {
    pub values: Vec<f64>,
    pub direction: Direction,
    pub seq: u32,
    /// Send time (s).
    pub stamp: f64,
}

impl WaveSample {
    pub fn zero(direction: Direction, dof: usize) -> Self {
        Self {
            values: alloc::vec![0.0; dof],
            direction,
            seq: 0,
            stamp: 0.0,
        }
    }

    pub fn stamped(mut self, seq: u32, stamp: f64) -> Self {
        self.seq = seq;
        self.stamp = stamp;
        self
    }

    /// Wave power `‖w‖²/2` (W).
    pub fn power(&self) -> f64 {
        0.5 * self.values.iter().map(|w| w * w).sum::<f64>()
    }
}

fn check_port(cfg: &WaveConfig, a: &[f64], b: &[f64]) -> Result<()> {
    cfg.validate()?;
    check_len("wave velocity", cfg.dof(), a.len())?;
    check_len("wave force", cfg.dof(), b.len())?;
    check_finite("wave input", a.iter().chain(b.iter()))
}

/// Forward wave `u = (b·ẋ + F)/√(2b)`.
pub fn encode(velocity: &[f64], force: &[f64], cfg: &WaveConfig) -> Result<WaveSample> {
    check_port(cfg, velocity, force)?;
    let values = cfg
        .impedance
        .iter()
        .zip(velocity.iter().zip(force))
        .map(|(&b, (&xd, &f))| (b * xd + f) / (2.0 * b).sqrt())
        .collect();
    Ok(WaveSample {
        values,
        direction: Direction::MasterToSlave,
        seq: 0,
        stamp: 0.0,
    })
}

/// Slave-side port: recovers the commanded velocity `ẋ = (√(2b)·u − F)/b` from the incoming
/// wave and the local force, and builds the returning wave `v = u − √(2/b)·F`.
pub fn decode(
    incoming: &WaveSample,
    local_force: &[f64],
    cfg: &WaveConfig,
) -> Result<(Vec<f64>, WaveSample)> {
    check_port(cfg, &incoming.values, local_force)?;
    let mut velocity = Vec::with_capacity(cfg.dof());
    let mut outgoing = Vec::with_capacity(cfg.dof());
    for ((&b, &u), &f) in cfg.impedance.iter().zip(&incoming.values).zip(local_force) {
        velocity.push(((2.0 * b).sqrt() * u - f) / b);
        outgoing.push(u - (2.0 / b).sqrt() * f);
    }
    Ok((
        velocity,
        WaveSample {
            values: outgoing,
            direction: Direction::SlaveToMaster,
            seq: incoming.seq,
            stamp: incoming.stamp,
        },
    ))
}

/// Master-side port: given the returning wave `v` and the local velocity, the channel force is
/// `F = b·ẋ − √(2b)·v` and the forward wave is `u = (b·ẋ + F)/√(2b)`.
pub fn master_port(
    incoming: &WaveSample,
    velocity: &[f64],
    cfg: &WaveConfig,
) -> Result<(Vec<f64>, WaveSample)> {
    check_port(cfg, velocity, &incoming.values)?;
    let force: Vec<f64> = cfg
        .impedance
        .iter()
        .zip(velocity.iter().zip(&incoming.values))
        .map(|(&b, (&xd, &v))| b * xd - (2.0 * b).sqrt() * v)
        .collect();
    let u = encode(velocity, &force, cfg)?;
    Ok((force, u))
}

/// Slave-side port for a spring-damper coupling `F = K·e + B·(ẋ_cmd − ẋ)`, where the force
/// itself depends on the commanded velocity. Solves the port equations exactly per DoF:
/// `ẋ_cmd = (√(2b)·u − K·e + B·ẋ)/(b + B)`.
///
/// Returns `(ẋ_cmd, F, v)`.
pub fn decode_coupled(
    incoming: &WaveSample,
    spring_force: &[f64],
    damping: &[f64],
    local_velocity: &[f64],
    cfg: &WaveConfig,
) -> Result<(Vec<f64>, Vec<f64>, WaveSample)> {
    check_port(cfg, &incoming.values, spring_force)?;
    check_len("coupling damping", cfg.dof(), damping.len())?;
    check_len("local velocity", cfg.dof(), local_velocity.len())?;
    check_finite("coupling", damping.iter().chain(local_velocity))?;
    let velocity: Vec<f64> = (0..cfg.dof())
        .map(|i| {
            let b = cfg.impedance[i];
            ((2.0 * b).sqrt() * incoming.values[i] - spring_force[i]
                + damping[i] * local_velocity[i])
                / (b + damping[i])
        })
        .collect();
    let force: Vec<f64> = (0..cfg.dof())
        .map(|i| spring_force[i] + damping[i] * (velocity[i] - local_velocity[i]))
        .collect();
    let (_, outgoing) = decode(incoming, &force, cfg)?;
    Ok((velocity, force, outgoing))
}

/// Substitute for a sample that never arrived: a zero wave, which carries no energy.
pub fn on_missing_sample(cfg: &WaveConfig, direction: Direction) -> WaveSample {
    WaveSample::zero(direction, cfg.dof())
}
