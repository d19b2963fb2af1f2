//! Desk-scale reference arms.
//!
//! None of these reproduce a particular commercial manipulator; the parameters are plausible
//! stand-ins chosen so that the controllers and scenarios have something realistic to act on.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{DVector, Isometry3, Matrix3, Translation3, UnitQuaternion, Vector3};

use super::model::{rod_inertia, ArmModel, Link, TaskAxes};

/// One link of a planar chain moving in the x-y plane about +z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarLink {
    pub length: f64,
    pub mass: f64,
    /// Distance from the joint to the COM along the link.
    pub com: f64,
    /// Inertia about the COM around the joint axis.
    pub inertia: f64,
}

impl PlanarLink {
    /// Uniform slender rod.
    pub fn rod(length: f64, mass: f64) -> Self {
        Self {
            length,
            mass,
            com: 0.5 * length,
            inertia: mass * length * length / 12.0,
        }
    }
}

/// Planar chain in the x-y plane with gravity `gravity_y` along +y (use a negative value for a
/// downward field). The task is the 2-D tip position.
pub fn planar_chain(links: &[PlanarLink], gravity_y: f64) -> ArmModel {
    let mut offset = 0.0;
    let body = links
        .iter()
        .map(|l| {
            let link = Link::revolute(
                l.mass,
                Vector3::new(l.com, 0.0, 0.0),
                Matrix3::from_diagonal(&Vector3::new(l.inertia, l.inertia, l.inertia)),
                Vector3::z(),
                Vector3::new(offset, 0.0, 0.0),
            );
            offset = l.length;
            link
        })
        .collect::<Vec<_>>();
    let n = links.len();
    ArmModel {
        name: String::from("planar"),
        links: body,
        tool: Isometry3::translation(offset, 0.0, 0.0),
        gravity: Vector3::new(0.0, gravity_y, 0.0),
        lower_limits: vec![-3.0; n],
        upper_limits: vec![3.0; n],
        velocity_limits: vec![4.0; n],
        torque_limits: vec![100.0; n],
        task_axes: TaskAxes::PLANAR_POSITION,
    }
}

/// Single 1 m, 1 kg rod pendulum.
pub fn planar_1link() -> ArmModel {
    let mut m = planar_chain(&[PlanarLink::rod(1.0, 1.0)], -9.81);
    m.name = String::from("planar1");
    m
}

/// Two-link planar arm, 0.5 m links.
pub fn planar_2link() -> ArmModel {
    let mut m = planar_chain(
        &[PlanarLink::rod(0.5, 2.0), PlanarLink::rod(0.5, 1.5)],
        -9.81,
    );
    m.name = String::from("planar2");
    m
}

/// Three-link planar arm regulating a 2-D tip position, leaving one redundant direction.
pub fn planar_3link() -> ArmModel {
    let mut m = planar_chain(
        &[
            PlanarLink::rod(0.4, 2.0),
            PlanarLink::rod(0.35, 1.5),
            PlanarLink::rod(0.25, 1.0),
        ],
        -9.81,
    );
    m.name = String::from("planar3");
    m.torque_limits = vec![60.0, 40.0, 20.0];
    m
}

/// Default posture of the planar 3-link arm.
pub fn planar_3link_home() -> DVector<f64> {
    DVector::from_vec(vec![0.6, -1.1, -0.7])
}

/// Modified-DH style table: (a, d, alpha) per joint.
const COBOT7_DH: [(f64, f64, f64); 7] = [
    (0.0, 0.333, 0.0),
    (0.0, 0.0, -FRAC_PI_2),
    (0.0, 0.316, FRAC_PI_2),
    (0.0825, 0.0, FRAC_PI_2),
    (-0.0825, 0.384, -FRAC_PI_2),
    (0.0, 0.0, FRAC_PI_2),
    (0.088, 0.0, FRAC_PI_2),
];

/// Mass and COM (link frame) per link.
const COBOT7_MASS: [(f64, [f64; 3]); 7] = [
    (4.0, [0.0, -0.03, -0.07]),
    (3.0, [0.0, -0.07, 0.03]),
    (3.0, [0.04, 0.03, -0.07]),
    (2.5, [-0.04, 0.1, 0.03]),
    (2.0, [0.0, 0.04, -0.11]),
    (1.5, [0.05, -0.01, 0.0]),
    (1.0, [0.0, 0.0, 0.08]),
];

/// Seven-joint spatial cobot-like chain with a 0.21 m tool.
pub fn cobot_7dof() -> ArmModel {
    let links = COBOT7_DH
        .iter()
        .zip(COBOT7_MASS.iter())
        .map(|(&(a, d, alpha), &(mass, com))| {
            let rot = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), alpha);
            let trans = rot * Vector3::new(a, 0.0, d);
            let com = Vector3::from(com);
            let len = 2.0 * com.norm().max(0.05);
            let dir = if com.norm() > 1e-9 { com } else { Vector3::z() };
            Link {
                mass,
                com,
                inertia: rod_inertia(mass, len, 0.05, dir),
                axis: Vector3::z(),
                origin: Isometry3::from_parts(Translation3::from(trans), rot),
            }
        })
        .collect();
    ArmModel {
        name: String::from("cobot7"),
        links,
        tool: Isometry3::translation(0.0, 0.0, 0.21),
        gravity: Vector3::new(0.0, 0.0, -9.81),
        lower_limits: vec![-2.8, -1.7, -2.8, -3.0, -2.8, -0.1, -2.8],
        upper_limits: vec![2.8, 1.7, 2.8, -0.1, 2.8, 3.7, 2.8],
        velocity_limits: vec![2.1, 2.1, 2.1, 2.1, 2.6, 2.6, 2.6],
        torque_limits: vec![87.0, 87.0, 87.0, 87.0, 12.0, 12.0, 12.0],
        task_axes: TaskAxes::ALL,
    }
}

/// Default "ready" posture of the 7-joint chain: elbow up, tool pointing down.
pub fn cobot_7dof_home() -> DVector<f64> {
    DVector::from_vec(vec![
        0.0,
        -FRAC_PI_4,
        0.0,
        -3.0 * FRAC_PI_4,
        0.0,
        FRAC_PI_2,
        FRAC_PI_4,
    ])
}

/// Looks up a reference model and its default posture by name.
pub fn by_name(name: &str) -> Option<(ArmModel, DVector<f64>)> {
    match name {
        "planar1" => Some((planar_1link(), DVector::from_vec(vec![-FRAC_PI_4]))),
        "planar2" => Some((planar_2link(), DVector::from_vec(vec![0.4, -1.2]))),
        "planar3" => Some((planar_3link(), planar_3link_home())),
        "cobot7" => Some((cobot_7dof(), cobot_7dof_home())),
        _ => None,
    }
}
