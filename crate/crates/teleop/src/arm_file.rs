//! Arm model files.
//!
//! ```text
//! [arm]
//! name = planar2
//! gravity = 0 -9.81 0
//! tool = 0.5 0 0             # translation of the tool frame
//! tool_quat = 1 0 0 0        # optional, w x y z
//! task_axes = x y
//! home = 0.4 -1.2
//!
//! [link]                     # one per joint, base first
//! mass = 2
//! com = 0.25 0 0
//! inertia = 0.04 0.04 0.04 0 0 0   # ixx iyy izz ixy ixz iyz about the COM
//! axis = 0 0 1
//! origin = 0 0 0
//! origin_quat = 1 0 0 0      # or origin_rpy = r p y
//! lower = -3
//! upper = 3
//! velocity = 4
//! torque = 100
//! ```

use std::fmt::Write;
use std::path::Path;

use nalgebra::{
    DVector, Isometry3, Matrix3, Quaternion, Translation3, UnitQuaternion, Vector3,
};
use teleop_core::rigid_body::{ArmModel, Link, TaskAxes};

use crate::fields::{ConfigError, Fields, Result};
use crate::ini::{self, Section};

fn quat(fields: &mut Fields<'_>, key: &'static str) -> Result<Option<UnitQuaternion<f64>>> {
    fields.get(key, |s| {
        let v = crate::fields::floats(s)?;
        if v.len() != 4 {
            return Err(format!("expected 4 numbers, found {}", v.len()));
        }
        let q = Quaternion::new(v[0], v[1], v[2], v[3]);
        if (q.norm() - 1.0).abs() > 1e-9 {
            return Err("quaternion is not unit norm".into());
        }
        Ok(UnitQuaternion::new_normalize(q))
    })
}

fn rotation(
    fields: &mut Fields<'_>,
    quat_key: &'static str,
    rpy_key: &'static str,
) -> Result<UnitQuaternion<f64>> {
    let q = quat(fields, quat_key)?;
    let rpy = fields.vec3(rpy_key)?;
    match (q, rpy) {
        (Some(_), Some(_)) => Err(fields.field_error(rpy_key, format!("conflicts with `{quat_key}`"))),
        (Some(q), None) => Ok(q),
        (None, Some(r)) => Ok(UnitQuaternion::from_euler_angles(r.x, r.y, r.z)),
        (None, None) => Ok(UnitQuaternion::identity()),
    }
}

struct LinkRow {
    link: Link,
    lower: f64,
    upper: f64,
    velocity: f64,
    torque: f64,
}

fn link(section: &Section) -> Result<LinkRow> {
    let mut f = Fields::new(section);
    let mass = f.req_f64("mass")?;
    let com = f.req_vec3("com")?;
    let i = f.require("inertia", |s| {
        let v = crate::fields::floats(s)?;
        if v.len() == 6 {
            Ok(v)
        } else {
            Err(format!("expected 6 numbers, found {}", v.len()))
        }
    })?;
    let inertia = Matrix3::new(i[0], i[3], i[4], i[3], i[1], i[5], i[4], i[5], i[2]);
    let axis = f.req_vec3("axis")?;
    let offset = f.vec3("origin")?.unwrap_or_else(Vector3::zeros);
    let rot = rotation(&mut f, "origin_quat", "origin_rpy")?;
    let row = LinkRow {
        link: Link {
            mass,
            com,
            inertia,
            axis,
            origin: Isometry3::from_parts(Translation3::from(offset), rot),
        },
        lower: f.req_f64("lower")?,
        upper: f.req_f64("upper")?,
        velocity: f.req_f64("velocity")?,
        torque: f.req_f64("torque")?,
    };
    f.finish()?;
    Ok(row)
}

/// Parses an arm file into a validated model and its default posture.
pub fn parse(bytes: &[u8]) -> Result<(ArmModel, DVector<f64>)> {
    let doc = ini::parse(bytes)?;
    let mut header = None;
    let mut rows = Vec::new();
    for s in &doc.sections {
        match s.name.as_str() {
            "arm" if header.is_some() => {
                return Err(ConfigError::section(s, "duplicate [arm] section"))
            }
            "arm" => header = Some(s),
            "link" => rows.push(link(s)?),
            _ => return Err(ConfigError::section(s, "unknown section")),
        }
    }
    let Some(header) = header else {
        return Err(ConfigError::Invalid("missing [arm] section".into()));
    };
    let mut f = Fields::new(header);
    let name = f.string("name")?.unwrap_or_else(|| "arm".into());
    let gravity = f.vec3("gravity")?.unwrap_or_else(|| Vector3::new(0.0, 0.0, -9.81));
    let tool_offset = f.vec3("tool")?.unwrap_or_else(Vector3::zeros);
    let tool_rot = rotation(&mut f, "tool_quat", "tool_rpy")?;
    let task_axes = f.get("task_axes", TaskAxes::parse)?.unwrap_or_default();
    let n = rows.len();
    let home = f.require("home", |s| {
        let v = crate::fields::floats(s)?;
        if v.len() == n {
            Ok(DVector::from_vec(v))
        } else {
            Err(format!("expected {n} joint angles, found {}", v.len()))
        }
    })?;
    f.finish()?;
    let model = ArmModel {
        name,
        links: rows.iter().map(|r| r.link.clone()).collect(),
        tool: Isometry3::from_parts(Translation3::from(tool_offset), tool_rot),
        gravity,
        lower_limits: rows.iter().map(|r| r.lower).collect(),
        upper_limits: rows.iter().map(|r| r.upper).collect(),
        velocity_limits: rows.iter().map(|r| r.velocity).collect(),
        torque_limits: rows.iter().map(|r| r.torque).collect(),
        task_axes,
    };
    model.validate()?;
    model.check_q(&home)?;
    Ok((model, home))
}

pub fn load(path: &Path) -> Result<(ArmModel, DVector<f64>)> {
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&bytes).map_err(|e| ConfigError::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

fn join<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    values
        .into_iter()
        .map(|v| (v + 0.0).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn quat_text(q: &UnitQuaternion<f64>) -> String {
    join([q.w, q.i, q.j, q.k].iter())
}

/// Writes `model` in the file format; parsing the result gives the same model back.
pub fn to_string(model: &ArmModel, home: &DVector<f64>) -> String {
    const AXES: [&str; 6] = ["x", "y", "z", "rx", "ry", "rz"];
    let mut out = String::new();
    let axes: Vec<&str> = model.task_axes.rows().map(|i| AXES[i]).collect();
    let _ = writeln!(out, "[arm]");
    let _ = writeln!(out, "name = {}", model.name);
    let _ = writeln!(out, "gravity = {}", join(model.gravity.iter()));
    let _ = writeln!(out, "tool = {}", join(model.tool.translation.vector.iter()));
    let _ = writeln!(out, "tool_quat = {}", quat_text(&model.tool.rotation));
    let _ = writeln!(out, "task_axes = {}", axes.join(" "));
    let _ = writeln!(out, "home = {}", join(home.iter()));
    for (i, l) in model.links.iter().enumerate() {
        let m = &l.inertia;
        let _ = writeln!(out, "\n[link]");
        let _ = writeln!(out, "mass = {}", l.mass);
        let _ = writeln!(out, "com = {}", join(l.com.iter()));
        let _ = writeln!(
            out,
            "inertia = {}",
            join([m[(0, 0)], m[(1, 1)], m[(2, 2)], m[(0, 1)], m[(0, 2)], m[(1, 2)]].iter())
        );
        let _ = writeln!(out, "axis = {}", join(l.axis.iter()));
        let _ = writeln!(out, "origin = {}", join(l.origin.translation.vector.iter()));
        let _ = writeln!(out, "origin_quat = {}", quat_text(&l.origin.rotation));
        let _ = writeln!(out, "lower = {}", model.lower_limits[i]);
        let _ = writeln!(out, "upper = {}", model.upper_limits[i]);
        let _ = writeln!(out, "velocity = {}", model.velocity_limits[i]);
        let _ = writeln!(out, "torque = {}", model.torque_limits[i]);
    }
    out
}
