//! Scenario files: everything needed to reproduce one run.
//!
//! ```text
//! [scenario]
//! arm = ../models/cobot7.arm   # arm file relative to this file, or a built-in name
//! duration = 10                # s
//! tick = 0.001                 # s
//! coupling = wave              # wave | direct
//! wave_impedance = 50          # N·s/m
//! initial_offset = 0 0.5 0 0 0 0 0   # added to the home posture (or initial_q = ...)
//! output = freespace.csv       # metrics CSV, relative to the working directory
//! divergence_threshold = 1     # J
//! saturation_window = 0.1      # s
//! playout_depth = 4
//!
//! [gains]      k_pos k_rot k_null b_null k_wall b_wall wall_margin
//! [master]     mass damping hand_stiffness hand_damping scale
//! [gripper]    wave_impedance stiffness damping closed_angle object_angle object_stiffness
//! [channel]    mean_delay jitter_shape jitter_scale drop seed capacity
//! [payload]    mass from
//! [recovery]   duration timeout position_tol velocity_tol kp kd
//! [waypoint]   t position rpy grip            (repeatable)
//! [plane]      normal offset stiffness damping (repeatable)
//! [footplate]  t roll pitch yaw pressures threshold deadband max_tilt max_twist (repeatable)
//! ```
//!
//! The channel section describes both directions; the returning link is seeded with
//! `seed + 1`.

use std::path::{Path, PathBuf};

use nalgebra::{DVector, Vector3};
use teleop_core::control::{FootplateSample, GainSet, ReferenceGains};
use teleop_core::netsim::{ChannelConfig, GammaJitter};
use teleop_core::rigid_body::{models, ArmModel, TaskTwist};
use teleop_core::session::{
    ContactEnvironment, CouplingMode, FootplateScript, OperatorScript, Payload, Plane,
    SessionConfig, Waypoint,
};

use crate::arm_file;
use crate::fields::{ConfigError, Fields, Result};
use crate::ini::{self, Document, Section};

/// Where the arm model came from.
#[derive(Debug, Clone, PartialEq)]
pub enum ArmSource {
    Builtin(String),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub arm: ArmSource,
    pub session: SessionConfig,
    pub forward: ChannelConfig,
    pub backward: ChannelConfig,
    pub duration: f64,
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Reads and validates a scenario file. Relative arm paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&bytes, dir).map_err(|e| ConfigError::InFile {
            path: path.to_path_buf(),
            source: Box::new(e),
        })
    }

    pub fn parse(bytes: &[u8], base_dir: &Path) -> Result<Self> {
        let doc = ini::parse(bytes)?;
        Builder::new(&doc, base_dir)?.build()
    }

    /// Re-seeds both links.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.forward.seed = seed;
        self.backward.seed = seed.wrapping_add(1);
        self
    }

    pub fn ticks(&self) -> usize {
        (self.duration / self.session.tick).round() as usize
    }
}

const SECTIONS: [&str; 10] = [
    "scenario", "gains", "master", "gripper", "channel", "payload", "recovery", "waypoint",
    "plane", "footplate",
];
const SINGLE: [&str; 7] = [
    "scenario", "gains", "master", "gripper", "channel", "payload", "recovery",
];

struct Builder<'a> {
    doc: &'a Document,
    base_dir: &'a Path,
}

fn positive(f: &Fields<'_>, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(f.field_error(key, "must be > 0"))
    }
}

fn within_limits(f: &Fields<'_>, key: &str, model: &ArmModel, q: &DVector<f64>) -> Result<()> {
    for (i, v) in q.iter().enumerate() {
        if !(model.lower_limits[i] <= *v && *v <= model.upper_limits[i]) {
            return Err(f.field_error(key, format!("joint {i} at {v} is outside its limits")));
        }
    }
    Ok(())
}

impl<'a> Builder<'a> {
    fn new(doc: &'a Document, base_dir: &'a Path) -> Result<Self> {
        for (i, s) in doc.sections.iter().enumerate() {
            if !SECTIONS.contains(&s.name.as_str()) {
                return Err(ConfigError::section(s, "unknown section"));
            }
            if SINGLE.contains(&s.name.as_str())
                && doc.sections[..i].iter().any(|p| p.name == s.name)
            {
                return Err(ConfigError::section(s, "section may appear only once"));
            }
        }
        Ok(Self { doc, base_dir })
    }

    fn single(&self, name: &str) -> Option<&'a Section> {
        self.doc.sections.iter().find(|s| s.name == name)
    }

    fn arm(&self, f: &mut Fields<'a>) -> Result<(ArmSource, ArmModel, DVector<f64>)> {
        let name = f.require("arm", |s| Ok(s.to_string()))?;
        if let Some((model, home)) = models::by_name(&name) {
            return Ok((ArmSource::Builtin(name), model, home));
        }
        let path = self.base_dir.join(&name);
        if !path.is_file() {
            return Err(f.field_error(
                "arm",
                format!("`{name}` is neither a built-in arm nor an existing file"),
            ));
        }
        let (model, home) = arm_file::load(&path)?;
        Ok((ArmSource::File(path), model, home))
    }

    fn build(&self) -> Result<ScenarioConfig> {
        let Some(head) = self.single("scenario") else {
            return Err(ConfigError::Invalid("missing [scenario] section".into()));
        };
        let mut f = Fields::new(head);
        let (arm, model, mut home) = self.arm(&mut f)?;
        let n = model.dof();
        if let Some(h) = f.floats_n("home", n)? {
            home = DVector::from_vec(h);
            within_limits(&f, "home", &model, &home)?;
        }
        let gains = self.gains(&model, &home)?;
        let mut cfg =
            SessionConfig::new(model, home).map_err(|e| ConfigError::section(head, e.to_string()))?;
        cfg.gains = gains;
        let duration = f.req_f64("duration")?;
        let duration = positive(&f, "duration", duration)?;
        if let Some(t) = f.f64("tick")? {
            cfg.tick = positive(&f, "tick", t)?;
        }
        if let Some(c) = f.get("coupling", |s| match s {
            "wave" => Ok(CouplingMode::Wave),
            "direct" => Ok(CouplingMode::Direct),
            _ => Err(format!("`{s}` is not one of wave, direct")),
        })? {
            cfg.coupling = c;
        }
        f.set_f64("wave_impedance", &mut cfg.wave_impedance)?;
        f.set_f64("divergence_threshold", &mut cfg.divergence_threshold)?;
        f.set_f64("saturation_window", &mut cfg.saturation_window)?;
        if let Some(d) = f.u64("playout_depth")? {
            cfg.playout_depth = d as usize;
        }
        let initial_q = f.floats_n("initial_q", n)?;
        let offset = f.floats_n("initial_offset", n)?;
        match (initial_q, offset) {
            (Some(_), Some(_)) => {
                return Err(f.field_error("initial_offset", "conflicts with `initial_q`"))
            }
            (Some(q), None) => {
                cfg.initial_q = DVector::from_vec(q);
                within_limits(&f, "initial_q", &cfg.model, &cfg.initial_q)?;
            }
            (None, Some(d)) => {
                cfg.initial_q = cfg.home() + DVector::from_vec(d);
                within_limits(&f, "initial_offset", &cfg.model, &cfg.initial_q)?;
            }
            (None, None) => {}
        }
        let output = f.string("output")?.map(PathBuf::from);
        f.finish()?;

        self.master(&mut cfg)?;
        self.gripper(&mut cfg)?;
        self.payload(&mut cfg)?;
        self.recovery(&mut cfg)?;
        cfg.script = self.script()?;
        cfg.environment = self.planes()?;
        cfg.footplate = self.footplate()?;
        let forward = self.channel()?;
        let backward = ChannelConfig {
            seed: forward.seed.wrapping_add(1),
            ..forward.clone()
        };
        cfg.validate()
            .map_err(|e| ConfigError::section(head, e.to_string()))?;
        Ok(ScenarioConfig {
            arm,
            session: cfg,
            forward,
            backward,
            duration,
            output,
        })
    }

    fn gains(&self, model: &ArmModel, home: &DVector<f64>) -> Result<GainSet> {
        let mut g = ReferenceGains::default();
        if let Some(s) = self.single("gains") {
            let mut f = Fields::new(s);
            f.set_f64("k_pos", &mut g.k_pos)?;
            f.set_f64("k_rot", &mut g.k_rot)?;
            f.set_f64("k_null", &mut g.k_null)?;
            f.set_f64("b_null", &mut g.b_null)?;
            f.set_f64("k_wall", &mut g.k_wall)?;
            f.set_f64("b_wall", &mut g.b_wall)?;
            f.set_f64("wall_margin", &mut g.wall_margin)?;
            f.finish()?;
            let gains = GainSet::reference(model, home, &g)
                .map_err(|e| ConfigError::section(s, e.to_string()))?;
            gains
                .validate(model)
                .map_err(|e| ConfigError::section(s, e.to_string()))?;
            return Ok(gains);
        }
        Ok(GainSet::reference(model, home, &g)?)
    }

    fn master(&self, cfg: &mut SessionConfig) -> Result<()> {
        let Some(s) = self.single("master") else {
            return Ok(());
        };
        let m = &mut cfg.master;
        let mut f = Fields::new(s);
        f.set_f64("mass", &mut m.mass)?;
        f.set_f64("damping", &mut m.damping)?;
        f.set_f64("hand_stiffness", &mut m.hand_stiffness)?;
        f.set_f64("hand_damping", &mut m.hand_damping)?;
        f.set_f64("scale", &mut m.scale)?;
        f.finish()
    }

    fn gripper(&self, cfg: &mut SessionConfig) -> Result<()> {
        let Some(s) = self.single("gripper") else {
            return Ok(());
        };
        let g = &mut cfg.gripper;
        let mut f = Fields::new(s);
        f.set_f64("wave_impedance", &mut g.wave_impedance)?;
        f.set_f64("stiffness", &mut g.stiffness)?;
        f.set_f64("damping", &mut g.damping)?;
        f.set_f64("closed_angle", &mut g.closed_angle)?;
        f.set_f64("object_stiffness", &mut g.object_stiffness)?;
        if let Some(a) = f.f64("object_angle")? {
            g.object_angle = Some(a);
        }
        f.finish()
    }

    fn payload(&self, cfg: &mut SessionConfig) -> Result<()> {
        let Some(s) = self.single("payload") else {
            return Ok(());
        };
        let mut f = Fields::new(s);
        let mass = f.req_f64("mass")?;
        if mass < 0.0 {
            return Err(f.field_error("mass", "must be >= 0"));
        }
        let from = f.f64("from")?.unwrap_or(0.0);
        f.finish()?;
        cfg.payload = Some(Payload { mass, from });
        Ok(())
    }

    fn recovery(&self, cfg: &mut SessionConfig) -> Result<()> {
        let Some(s) = self.single("recovery") else {
            return Ok(());
        };
        let r = &mut cfg.recovery;
        let mut f = Fields::new(s);
        for (key, slot) in [
            ("duration", &mut r.duration),
            ("timeout", &mut r.timeout),
            ("position_tol", &mut r.position_tol),
            ("velocity_tol", &mut r.velocity_tol),
            ("kp", &mut r.kp),
            ("kd", &mut r.kd),
        ] {
            if let Some(v) = f.f64(key)? {
                *slot = positive(&f, key, v)?;
            }
        }
        f.finish()
    }

    fn channel(&self) -> Result<ChannelConfig> {
        let mut c = ChannelConfig::fixed(0.0, 0);
        let Some(s) = self.single("channel") else {
            return Ok(c);
        };
        let mut f = Fields::new(s);
        f.set_f64("mean_delay", &mut c.mean_delay)?;
        f.set_f64("drop", &mut c.drop_prob)?;
        let shape = f.f64("jitter_shape")?;
        let scale = f.f64("jitter_scale")?;
        c.jitter = match (shape, scale) {
            (Some(shape), Some(scale)) => Some(GammaJitter { shape, scale }),
            (None, None) => None,
            (Some(_), None) => return Err(f.field_error("jitter_scale", "missing; required with jitter_shape")),
            (None, Some(_)) => return Err(f.field_error("jitter_shape", "missing; required with jitter_scale")),
        };
        if let Some(seed) = f.u64("seed")? {
            c.seed = seed;
        }
        if let Some(cap) = f.u64("capacity")? {
            c.capacity = cap as usize;
        }
        c.validate().map_err(|e| ConfigError::section(s, e.to_string()))?;
        f.finish()?;
        Ok(c)
    }

    fn script(&self) -> Result<OperatorScript> {
        let mut points = Vec::new();
        for s in self.doc.sections("waypoint") {
            let mut f = Fields::new(s);
            let mut w = Waypoint::at(f.req_f64("t")?, f.vec3("position")?.unwrap_or_else(Vector3::zeros));
            if let Some(rpy) = f.vec3("rpy")? {
                w.rpy = rpy;
            }
            if let Some(g) = f.f64("grip")? {
                if !(0.0..=1.0).contains(&g) {
                    return Err(f.field_error("grip", "must lie in [0, 1]"));
                }
                w.grip = g;
            }
            if points.last().is_some_and(|p: &Waypoint| p.t >= w.t) {
                return Err(f.field_error("t", "waypoint times must strictly increase"));
            }
            f.finish()?;
            points.push(w);
        }
        Ok(OperatorScript::new(points)?)
    }

    fn planes(&self) -> Result<ContactEnvironment> {
        let mut planes = Vec::new();
        for s in self.doc.sections("plane") {
            let mut f = Fields::new(s);
            let normal = f.req_vec3("normal")?;
            if normal.norm() == 0.0 {
                return Err(f.field_error("normal", "must be non-zero"));
            }
            let plane = Plane {
                normal: normal.normalize(),
                offset: f.req_f64("offset")?,
                stiffness: f.req_f64("stiffness")?,
                damping: f.f64("damping")?.unwrap_or(0.0),
            };
            f.finish()?;
            ContactEnvironment::new(vec![plane])
                .map_err(|e| ConfigError::section(s, e.to_string()))?;
            planes.push(plane);
        }
        Ok(ContactEnvironment::new(planes)?)
    }

    fn footplate(&self) -> Result<FootplateScript> {
        let mut keys: Vec<(f64, FootplateSample)> = Vec::new();
        for s in self.doc.sections("footplate") {
            let mut f = Fields::new(s);
            let t = f.req_f64("t")?;
            let pressures = f.require("pressures", |s| {
                let v = crate::fields::floats(s)?;
                <[f64; 5]>::try_from(v.as_slice())
                    .map_err(|_| format!("expected 5 readings, found {}", v.len()))
            })?;
            let twist = f.vec3("max_twist")?.unwrap_or_else(|| Vector3::new(0.5, 0.5, 0.5));
            let sample = FootplateSample {
                roll: f.f64("roll")?.unwrap_or(0.0),
                pitch: f.f64("pitch")?.unwrap_or(0.0),
                yaw: f.f64("yaw")?.unwrap_or(0.0),
                pressures,
                pressure_threshold: f.f64("threshold")?.unwrap_or(5.0),
                deadband: f.f64("deadband")?.unwrap_or(0.02),
                max_tilt: f.f64("max_tilt")?.unwrap_or(0.2),
                max_twist: TaskTwist::new(
                    Vector3::new(twist.x, twist.y, 0.0),
                    Vector3::new(0.0, 0.0, twist.z),
                ),
            };
            if !sample.is_valid() {
                return Err(ConfigError::section(s, "invalid footplate sample"));
            }
            if keys.last().is_some_and(|k| k.0 >= t) {
                return Err(f.field_error("t", "footplate times must strictly increase"));
            }
            f.finish()?;
            keys.push((t, sample));
        }
        Ok(FootplateScript::new(keys)?)
    }
}
