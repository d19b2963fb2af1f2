use alloc::format;

use nalgebra::{DMatrix, DVector, Matrix6};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{check_len, Error, Result};
use crate::rigid_body::{task_inertia, ArmModel};

/// SVD settings for the pseudo-inverse used by the nullspace projector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoInverse {
    /// Relative singular-value cutoff `σ_min/σ_max` below which damping kicks in.
    pub cutoff: f64,
    /// Damping `λ` of the fallback `σ/(σ² + λ²)`.
    pub damping: f64,
}

impl Default for PseudoInverse {
    fn default() -> Self {
        Self {
            cutoff: 1e-6,
            damping: 1e-3,
        }
    }
}

/// Every gain and reference posture of the arm controller stack.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    /// Cartesian coupling stiffness `K` (N/m, N·m/rad).
    pub stiffness: Matrix6<f64>,
    /// Cartesian coupling damping `B`.
    pub damping: Matrix6<f64>,
    pub null_stiffness: DMatrix<f64>,
    pub null_damping: DMatrix<f64>,
    pub wall_stiffness: DVector<f64>,
    pub wall_damping: DVector<f64>,
    pub wall_lower: DVector<f64>,
    pub wall_upper: DVector<f64>,
    /// Default joint posture `q0`.
    pub posture: DVector<f64>,
    pub pinv: PseudoInverse,
}

/// Scalar gains from which [`GainSet::reference`] builds a full set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceGains {
    pub k_pos: f64,
    pub k_rot: f64,
    pub k_null: f64,
    pub b_null: f64,
    pub k_wall: f64,
    pub b_wall: f64,
    /// Distance of each virtual wall inside its hard joint limit (rad).
    pub wall_margin: f64,
}

impl Default for ReferenceGains {
    fn default() -> Self {
        Self {
            k_pos: 500.0,
            k_rot: 20.0,
            k_null: 5.0,
            b_null: 1.0,
            k_wall: 200.0,
            b_wall: 5.0,
            wall_margin: 0.1,
        }
    }
}

impl GainSet {
    /// Diagonal gains with damping set per task axis to `2·√(K·Λ)`, where `Λ` is the task-space
    /// inertia at `posture`.
    pub fn reference(model: &ArmModel, posture: &DVector<f64>, g: &ReferenceGains) -> Result<Self> {
        model.check_q(posture)?;
        let n = model.dof();
        let lambda = task_inertia(model, posture)?;
        let mut stiffness = Matrix6::zeros();
        let mut damping = Matrix6::zeros();
        let mut active = 0;
        for axis in 0..6 {
            let k = if axis < 3 { g.k_pos } else { g.k_rot };
            stiffness[(axis, axis)] = k;
            if model.task_axes.is_active(axis) {
                let l = lambda[(active, active)].max(0.0);
                damping[(axis, axis)] = 2.0 * (k * l).sqrt();
                active += 1;
            }
        }
        let margin = DVector::from_fn(n, |i, _| {
            g.wall_margin
                .min(0.25 * (model.upper_limits[i] - model.lower_limits[i]))
        });
        Ok(Self {
            stiffness,
            damping,
            null_stiffness: DMatrix::identity(n, n) * g.k_null,
            null_damping: DMatrix::identity(n, n) * g.b_null,
            wall_stiffness: DVector::from_element(n, g.k_wall),
            wall_damping: DVector::from_element(n, g.b_wall),
            wall_lower: DVector::from_column_slice(&model.lower_limits) + &margin,
            wall_upper: DVector::from_column_slice(&model.upper_limits) - &margin,
            posture: posture.clone(),
            pinv: PseudoInverse::default(),
        })
    }

    pub fn dof(&self) -> usize {
        self.posture.len()
    }

    pub fn validate(&self, model: &ArmModel) -> Result<()> {
        let n = model.dof();
        check_len("posture", n, self.posture.len())?;
        check_len("wall stiffness", n, self.wall_stiffness.len())?;
        check_len("wall damping", n, self.wall_damping.len())?;
        check_len("wall lower", n, self.wall_lower.len())?;
        check_len("wall upper", n, self.wall_upper.len())?;
        check_len("nullspace stiffness", n * n, self.null_stiffness.len())?;
        check_len("nullspace damping", n * n, self.null_damping.len())?;
        if self.null_stiffness.nrows() != n || self.null_damping.nrows() != n {
            return Err(Error::InvalidGains("nullspace gains must be n×n".into()));
        }
        let symmetric = |m: &Matrix6<f64>| (m - m.transpose()).abs().max() <= 1e-12 * (1.0 + m.abs().max());
        if !symmetric(&self.stiffness) || !symmetric(&self.damping) {
            return Err(Error::InvalidGains("K and B must be symmetric".into()));
        }
        if self.stiffness.cholesky().is_none() {
            return Err(Error::InvalidGains("K must be positive definite".into()));
        }
        if self.damping.symmetric_eigenvalues().min() < -1e-12 {
            return Err(Error::InvalidGains("B must be positive semidefinite".into()));
        }
        let nonneg = |m: &[f64]| m.iter().all(|v| *v >= 0.0 && v.is_finite());
        if !nonneg(self.null_stiffness.as_slice())
            || !nonneg(self.null_damping.as_slice())
            || !nonneg(self.wall_stiffness.as_slice())
            || !nonneg(self.wall_damping.as_slice())
        {
            return Err(Error::InvalidGains(
                "nullspace and wall gains must be non-negative".into(),
            ));
        }
        for i in 0..n {
            let (lo, hi) = (self.wall_lower[i], self.wall_upper[i]);
            if !(model.lower_limits[i] < lo && lo < hi && hi < model.upper_limits[i]) {
                return Err(Error::InvalidGains(format!(
                    "joint {i}: virtual walls must lie strictly inside the joint limits"
                )));
            }
        }
        if !(self.pinv.cutoff > 0.0 && self.pinv.damping > 0.0) {
            return Err(Error::InvalidGains("pseudo-inverse settings must be > 0".into()));
        }
        Ok(())
    }
}
