use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DVector, Isometry3, Matrix3, Translation3, UnitQuaternion, Vector3, Vector6};

use crate::error::{check_len, Error, Result};

/// One revolute body of a serial chain.
///
/// `origin` places the joint frame relative to the previous link frame (or the base for the
/// first link). The joint rotates about `axis`, expressed in that joint frame, and the link's
/// centre of mass and inertia are given in the rotated link frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub mass: f64,
    pub com: Vector3<f64>,
    /// Inertia tensor about the centre of mass.
    pub inertia: Matrix3<f64>,
    pub axis: Vector3<f64>,
    pub origin: Isometry3<f64>,
}

impl Link {
    /// Link rotating about `axis` placed at `offset` from the previous frame, with no extra
    /// fixed rotation.
    pub fn revolute(
        mass: f64,
        com: Vector3<f64>,
        inertia: Matrix3<f64>,
        axis: Vector3<f64>,
        offset: Vector3<f64>,
    ) -> Self {
        Self {
            mass,
            com,
            inertia,
            axis,
            origin: Isometry3::from_parts(Translation3::from(offset), UnitQuaternion::identity()),
        }
    }
}

/// Subset of the six task-space directions (linear x, y, z then angular x, y, z) the Cartesian
/// controller acts on. Planar arms regulate only a subset; spatial arms use all six.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskAxes([bool; 6]);

impl TaskAxes {
    pub const ALL: TaskAxes = TaskAxes([true; 6]);
    pub const PLANAR_POSITION: TaskAxes = TaskAxes([true, true, false, false, false, false]);

    pub fn new(active: [bool; 6]) -> Self {
        Self(active)
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.0[axis]
    }

    /// Indices of the active rows, in order.
    pub fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..6).filter(move |&i| self.0[i])
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|a| **a).count()
    }

    /// Diagonal 0/1 selection vector.
    pub fn mask(&self) -> Vector6<f64> {
        Vector6::from_fn(|i, _| if self.0[i] { 1.0 } else { 0.0 })
    }

    /// Parses whitespace separated axis names (`x y z rx ry rz`).
    pub fn parse(text: &str) -> core::result::Result<Self, String> {
        let mut active = [false; 6];
        for token in text.split_whitespace() {
            let i = match token {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                "rx" => 3,
                "ry" => 4,
                "rz" => 5,
                other => return Err(format!("unknown task axis `{other}`")),
            };
            active[i] = true;
        }
        if active.iter().all(|a| !a) {
            return Err("no task axes given".into());
        }
        Ok(Self(active))
    }
}

impl Default for TaskAxes {
    fn default() -> Self {
        Self::ALL
    }
}

/// Kinematic and dynamic description of a serial revolute chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    pub name: String,
    pub links: Vec<Link>,
    /// End-effector frame relative to the last link frame.
    pub tool: Isometry3<f64>,
    pub gravity: Vector3<f64>,
    pub lower_limits: Vec<f64>,
    pub upper_limits: Vec<f64>,
    pub velocity_limits: Vec<f64>,
    pub torque_limits: Vec<f64>,
    pub task_axes: TaskAxes,
}

impl ArmModel {
    pub fn dof(&self) -> usize {
        self.links.len()
    }

    /// Checks every structural invariant; models built by hand or parsed from files should pass
    /// through here before use.
    pub fn validate(&self) -> Result<()> {
        let n = self.dof();
        if n == 0 || n > 7 {
            return Err(Error::InvalidModel(format!("{n} joints, expected 1 to 7")));
        }
        check_len("lower_limits", n, self.lower_limits.len())?;
        check_len("upper_limits", n, self.upper_limits.len())?;
        check_len("velocity_limits", n, self.velocity_limits.len())?;
        check_len("torque_limits", n, self.torque_limits.len())?;
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(Error::InvalidModel("gravity is not finite".into()));
        }
        for (i, link) in self.links.iter().enumerate() {
            if !(link.mass > 0.0 && link.mass.is_finite()) {
                return Err(Error::InvalidModel(format!("link {i}: mass must be > 0")));
            }
            if (link.axis.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidModel(format!("link {i}: axis is not unit norm")));
            }
            let asym = (link.inertia - link.inertia.transpose()).abs().max();
            if asym > 1e-12 * link.inertia.abs().max().max(1.0) {
                return Err(Error::InvalidModel(format!("link {i}: inertia is not symmetric")));
            }
            if link.inertia.cholesky().is_none() {
                return Err(Error::InvalidModel(format!(
                    "link {i}: inertia is not positive definite"
                )));
            }
            if !link.com.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidModel(format!("link {i}: com is not finite")));
            }
        }
        for i in 0..n {
            if !(self.lower_limits[i] < self.upper_limits[i]) {
                return Err(Error::InvalidModel(format!(
                    "joint {i}: lower limit must be below upper limit"
                )));
            }
            if !(self.velocity_limits[i] > 0.0) || !(self.torque_limits[i] > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "joint {i}: velocity and torque limits must be > 0"
                )));
            }
        }
        Ok(())
    }

    pub fn check_q(&self, q: &DVector<f64>) -> Result<()> {
        check_len("joint positions", self.dof(), q.len())
    }

    /// Zero-gravity copy of the model.
    pub fn without_gravity(&self) -> Self {
        Self {
            gravity: Vector3::zeros(),
            ..self.clone()
        }
    }
}

/// Solid-cylinder style inertia about the COM for a slender link of length `len` along `dir`.
pub fn rod_inertia(mass: f64, len: f64, radius: f64, dir: Vector3<f64>) -> Matrix3<f64> {
    let axial = 0.5 * mass * radius * radius;
    let transverse = mass * (3.0 * radius * radius + len * len) / 12.0;
    let d = dir.normalize();
    // transverse·I + (axial − transverse)·d dᵀ
    Matrix3::identity() * transverse + d * d.transpose() * (axial - transverse)
}

/// Joint position and velocity of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
}

impl JointState {
    pub fn new(q: DVector<f64>, qd: DVector<f64>) -> Self {
        Self { q, qd }
    }

    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        Self {
            q,
            qd: DVector::zeros(n),
        }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    pub fn check(&self, model: &ArmModel) -> Result<()> {
        check_len("joint positions", model.dof(), self.q.len())?;
        check_len("joint velocities", model.dof(), self.qd.len())?;
        crate::error::check_finite("joint state", self.q.iter().chain(self.qd.iter()))
    }
}

/// End-effector pose in the base frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskPose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl TaskPose {
    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn from_isometry(iso: &Isometry3<f64>) -> Self {
        Self {
            position: iso.translation.vector,
            orientation: iso.rotation,
        }
    }

    /// Six-vector error `self − current`: position difference, then the axis-angle vector of
    /// the rotation carrying `current` onto `self`, both in the base frame.
    pub fn error_from(&self, current: &TaskPose) -> Vector6<f64> {
        let dp = self.position - current.position;
        let dr = (self.orientation * current.orientation.inverse()).scaled_axis();
        Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z)
    }
}

/// Linear and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaskTwist {
    pub linear: Vector3<f64>,
    pub angular: Vector3<f64>,
}

impl TaskTwist {
    pub fn new(linear: Vector3<f64>, angular: Vector3<f64>) -> Self {
        Self { linear, angular }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.linear.x,
            self.linear.y,
            self.linear.z,
            self.angular.x,
            self.angular.y,
            self.angular.z,
        )
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            linear: Vector3::new(v[0], v[1], v[2]),
            angular: Vector3::new(v[3], v[4], v[5]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.linear.iter().chain(self.angular.iter()).all(|v| v.is_finite())
    }
}

/// Force and moment acting at the end-effector point, in the base frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn new(force: Vector3<f64>, torque: Vector3<f64>) -> Self {
        Self { force, torque }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_force(force: Vector3<f64>) -> Self {
        Self {
            force,
            torque: Vector3::zeros(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.force.x,
            self.force.y,
            self.force.z,
            self.torque.x,
            self.torque.y,
            self.torque.z,
        )
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            force: Vector3::new(v[0], v[1], v[2]),
            torque: Vector3::new(v[3], v[4], v[5]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.torque.iter()).all(|v| v.is_finite())
    }
}

impl core::ops::Add for Wrench {
    type Output = Wrench;

    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force + rhs.force, self.torque + rhs.torque)
    }
}
