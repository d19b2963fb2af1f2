use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Vector3};

use super::contact::ContactEnvironment;
use super::recovery::RecoveryConfig;
use super::script::{FootplateScript, OperatorScript};
use crate::control::{GainSet, ReferenceGains};
use crate::error::{check_finite, Error, Result};
use crate::rigid_body::{mass_matrix, ArmModel, ChainFrames};
use crate::wave::WaveConfig;

/// How master and slave exchange motion and force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// Wave variables with zero-injection on loss.
    Wave,
    /// Raw position forward and raw force back, each held on loss.
    Direct,
}

/// Master device: a damped point mass for the hand stage, held by the operator through a
/// spring-damper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterConfig {
    pub mass: f64,
    pub damping: f64,
    pub hand_stiffness: f64,
    pub hand_damping: f64,
    /// Slave motion per unit master motion.
    pub scale: f64,
}

impl Default for MasterConfig {
    fn default() -> Self {
        Self {
            mass: 0.025,
            damping: 2.0,
            hand_stiffness: 400.0,
            hand_damping: 20.0,
            scale: 1.0,
        }
    }
}

/// Glove and three-finger gripper, each finger a single rotary inertia.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperConfig {
    pub wave_impedance: f64,
    /// Coupling spring and damper at the gripper.
    pub stiffness: f64,
    pub damping: f64,
    pub inertia: f64,
    pub friction: f64,
    pub glove_inertia: f64,
    pub glove_friction: f64,
    pub hand_stiffness: f64,
    pub hand_damping: f64,
    /// Finger angle at full grip command (rad).
    pub closed_angle: f64,
    /// Fingers meet a held object beyond this angle.
    pub object_angle: Option<f64>,
    pub object_stiffness: f64,
}

impl Default for GripperConfig {
    fn default() -> Self {
        Self {
            wave_impedance: 0.5,
            stiffness: 5.0,
            damping: 0.3,
            inertia: 0.002,
            friction: 0.01,
            glove_inertia: 0.001,
            glove_friction: 0.01,
            hand_stiffness: 2.0,
            hand_damping: 0.1,
            closed_angle: 1.2,
            object_angle: None,
            object_stiffness: 50.0,
        }
    }
}

/// Mass hung from the end-effector from time `from` onwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Payload {
    pub mass: f64,
    pub from: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub model: ArmModel,
    /// Controller gains; `gains.posture` is also the recovery target `q0`.
    pub gains: GainSet,
    pub initial_q: DVector<f64>,
    pub tick: f64,
    pub coupling: CouplingMode,
    /// Wave impedance of the translation channels (N·s/m).
    pub wave_impedance: f64,
    pub master: MasterConfig,
    pub gripper: GripperConfig,
    pub environment: ContactEnvironment,
    pub payload: Option<Payload>,
    pub script: OperatorScript,
    pub footplate: FootplateScript,
    pub recovery: RecoveryConfig,
    pub saturation_window: f64,
    /// Channel-generated energy (J) above which the observer flags divergence.
    pub divergence_threshold: f64,
    /// Playout buffer depth per direction (samples).
    pub playout_depth: usize,
}

impl SessionConfig {
    /// Defaults around `model` with reference gains at `home`, starting at `home`.
    pub fn new(model: ArmModel, home: DVector<f64>) -> Result<Self> {
        let gains = GainSet::reference(&model, &home, &ReferenceGains::default())?;
        Ok(Self {
            model,
            gains,
            initial_q: home,
            tick: 1e-3,
            coupling: CouplingMode::Wave,
            wave_impedance: 50.0,
            master: MasterConfig::default(),
            gripper: GripperConfig::default(),
            environment: ContactEnvironment::default(),
            payload: None,
            script: OperatorScript::idle(),
            footplate: FootplateScript::default(),
            recovery: RecoveryConfig::default(),
            saturation_window: 0.1,
            divergence_threshold: 1.0,
            playout_depth: 4,
        })
    }

    pub fn home(&self) -> &DVector<f64> {
        &self.gains.posture
    }

    /// Wave impedances for the six wave-coupled DoF: translation x, y, z, then the fingers.
    pub fn wave_config(&self) -> Result<WaveConfig> {
        let (b, bg) = (self.wave_impedance, self.gripper.wave_impedance);
        WaveConfig::new(vec![b, b, b, bg, bg, bg])
    }

    /// Which of the three translation axes the arm controls.
    pub fn translation_mask(&self) -> Vector3<f64> {
        Vector3::from_fn(|i, _| f64::from(u8::from(self.model.task_axes.is_active(i))))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        self.model.validate()?;
        self.gains.validate(&self.model)?;
        self.model.check_q(&self.initial_q)?;
        self.model.check_q(self.home())?;
        let m = &self.model;
        let inside = |q: &DVector<f64>| {
            q.iter()
                .enumerate()
                .all(|(i, v)| m.lower_limits[i] <= *v && *v <= m.upper_limits[i])
        };
        if !inside(&self.initial_q) || !inside(self.home()) {
            return bad("initial and home postures must lie within the joint limits");
        }
        self.environment.validate()?;
        self.wave_config()?;
        if !(self.tick > 0.0) || !self.tick.is_finite() {
            return bad("tick must be > 0");
        }
        let m = &self.master;
        check_finite(
            "master parameters",
            [m.mass, m.damping, m.hand_stiffness, m.hand_damping, m.scale].iter(),
        )?;
        if !(m.mass > 0.0 && m.scale > 0.0 && m.damping >= 0.0) {
            return bad("master mass and scale must be > 0, damping >= 0");
        }
        if !(m.hand_stiffness >= 0.0 && m.hand_damping >= 0.0) {
            return bad("hand impedance must be >= 0");
        }
        let g = &self.gripper;
        if !(g.inertia > 0.0 && g.glove_inertia > 0.0 && g.stiffness >= 0.0 && g.damping >= 0.0)
        {
            return bad("gripper inertias must be > 0 and gains >= 0");
        }
        if let Some(p) = self.payload {
            if !(p.mass >= 0.0) || !p.from.is_finite() {
                return bad("payload mass must be >= 0");
            }
        }
        if !(self.saturation_window >= 0.0) || !(self.divergence_threshold > 0.0) {
            return bad("saturation window must be >= 0 and divergence threshold > 0");
        }
        if self.playout_depth == 0 {
            return bad("playout depth must be at least 1");
        }
        let b = &self.gains.damping;
        for i in 0..3 {
            for j in 0..3 {
                if i != j && b[(i, j)] != 0.0 {
                    return bad("translational damping must be diagonal for the wave port");
                }
            }
        }
        let lambda_min = translational_inertia_min(&self.model, &self.initial_q)?;
        if self.master.mass > lambda_min / 10.0 {
            return Err(Error::InvalidConfig(alloc::format!(
                "master mass {} kg exceeds a tenth of the slave's smallest translational inertia ({:.3} kg)",
                self.master.mass,
                lambda_min
            )));
        }
        Ok(())
    }
}

/// Smallest eigenvalue of the end-effector translational inertia over the controlled axes.
pub fn translational_inertia_min(model: &ArmModel, q: &DVector<f64>) -> Result<f64> {
    let rows: Vec<usize> = (0..3).filter(|&i| model.task_axes.is_active(i)).collect();
    if rows.is_empty() {
        return Ok(f64::INFINITY);
    }
    let jac = ChainFrames::compute(model, q)?.jacobian().select_rows(rows.iter());
    let m = mass_matrix(model, q)?;
    let minv_jt = m
        .cholesky()
        .ok_or(Error::SingularMassMatrix)?
        .solve(&jac.transpose());
    let inv: DMatrix<f64> = &jac * minv_jt;
    // λmin(Λ) = 1/λmax(Λ⁻¹)
    let max = inv.symmetric_eigen().eigenvalues.max();
    if max > 0.0 {
        Ok(1.0 / max)
    } else {
        Err(Error::InvalidModel("degenerate task inertia".into()))
    }
}
