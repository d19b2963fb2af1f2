use alloc::vec::Vec;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::rigid_body::{TaskPose, TaskTwist, Wrench};

/// Half-space obstacle `{p : n·p < offset}` with a penalty spring-damper surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    /// Unit normal pointing out of the obstacle.
    pub normal: Vector3<f64>,
    pub offset: f64,
    /// N/m.
    pub stiffness: f64,
    /// N·s/m.
    pub damping: f64,
}

impl Plane {
    /// Penetration depth of `p`; positive inside the obstacle.
    pub fn depth(&self, p: &Vector3<f64>) -> f64 {
        self.offset - self.normal.dot(p)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContactEnvironment {
    pub planes: Vec<Plane>,
}

impl ContactEnvironment {
    pub fn new(planes: Vec<Plane>) -> Result<Self> {
        let env = Self { planes };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.planes {
            let finite = p.normal.iter().all(|v| v.is_finite()) && p.offset.is_finite();
            if !finite || (p.normal.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig("plane normal must be a unit vector".into()));
            }
            if !(p.stiffness > 0.0) || !(p.damping >= 0.0) {
                return Err(Error::InvalidConfig(
                    "plane stiffness must be > 0 and damping >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Normal force from every penetrated plane at the end-effector point. Damping can slow a
/// pull-out but never makes the surface attractive.
pub fn contact_wrench(env: &ContactEnvironment, ee_pose: &TaskPose, ee_twist: &TaskTwist) -> Wrench {
    let p = &ee_pose.position;
    let force = env
        .planes
        .iter()
        .filter_map(|plane| {
            let d = plane.depth(p);
            if d <= 0.0 {
                return None;
            }
            let approach = plane.normal.dot(&ee_twist.linear);
            let f = (plane.stiffness * d - plane.damping * approach).max(0.0);
            Some(plane.normal * f)
        })
        .fold(Vector3::zeros(), |acc, f| acc + f);
    Wrench::from_force(force)
}
