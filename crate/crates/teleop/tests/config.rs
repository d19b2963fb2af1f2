use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use proptest::prelude::*;
use teleop::arm_file;
use teleop::scenario::{ArmSource, ScenarioConfig};
use teleop::ConfigError;
use teleop_core::rigid_body::{models, ArmModel};
use teleop_core::session::CouplingMode;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs())
}

fn same_model(a: &ArmModel, b: &ArmModel) {
    assert_eq!(a.name, b.name);
    assert_eq!(a.dof(), b.dof());
    assert_eq!(a.task_axes, b.task_axes);
    assert_eq!(a.gravity, b.gravity);
    assert_eq!(a.lower_limits, b.lower_limits);
    assert_eq!(a.upper_limits, b.upper_limits);
    assert_eq!(a.velocity_limits, b.velocity_limits);
    assert_eq!(a.torque_limits, b.torque_limits);
    assert!(a.tool.translation.vector == b.tool.translation.vector);
    assert!(a.tool.rotation.angle_to(&b.tool.rotation) < 1e-12);
    for (x, y) in a.links.iter().zip(&b.links) {
        assert_eq!(x.mass, y.mass);
        assert_eq!(x.com, y.com);
        assert_eq!(x.axis, y.axis);
        assert!(x.inertia.iter().zip(y.inertia.iter()).all(|(p, q)| close(*p, *q)));
        assert_eq!(x.origin.translation.vector, y.origin.translation.vector);
        assert!(x.origin.rotation.angle_to(&y.origin.rotation) < 1e-12);
    }
}

#[test]
fn bundled_arm_files_match_builtins() {
    for name in ["planar2", "planar3", "cobot7"] {
        let (model, home) = models::by_name(name).unwrap();
        let (parsed, parsed_home) =
            arm_file::load(&root().join("models").join(format!("{name}.arm"))).unwrap();
        same_model(&parsed, &model);
        assert_eq!(parsed_home, home);
        // And the writer round-trips.
        let (again, _) = arm_file::parse(arm_file::to_string(&model, &home).as_bytes()).unwrap();
        same_model(&again, &model);
    }
}

#[test]
fn bundled_scenarios_load() {
    let dir = root().join("scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let cfg = ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{e}"));
            assert!(matches!(cfg.arm, ArmSource::File(_)));
            assert_eq!(cfg.session.model.name, "cobot7");
            n += 1;
        }
    }
    assert_eq!(n, 8);
    let direct = ScenarioConfig::load(&dir.join("direct-coupling.cfg")).unwrap();
    assert_eq!(direct.session.coupling, CouplingMode::Direct);
    assert_eq!(direct.session.gains.stiffness[(0, 0)], 3000.0);
    let pinned = ScenarioConfig::load(&dir.join("pinned-arm.cfg")).unwrap();
    assert_eq!(pinned.session.initial_q[1], pinned.session.home()[1] + 0.5);
    assert_eq!(pinned.session.environment.planes.len(), 1);
}

const MINIMAL: &str = "[scenario]\narm = planar3\nduration = 1\n";

fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
    ScenarioConfig::parse(text.as_bytes(), &root().join("scenarios"))
}

#[test]
fn defaults_fill_a_minimal_scenario() {
    let cfg = parse(MINIMAL).unwrap();
    assert_eq!(cfg.arm, ArmSource::Builtin("planar3".into()));
    assert_eq!(cfg.duration, 1.0);
    assert_eq!(cfg.session.tick, 1e-3);
    assert_eq!(cfg.ticks(), 1000);
    assert_eq!(cfg.forward.seed, 0);
    assert_eq!(cfg.backward.seed, 1);
    assert_eq!(cfg.forward.drop_prob, 0.0);
    assert!(cfg.output.is_none());
    let reseeded = cfg.with_seed(7);
    assert_eq!((reseeded.forward.seed, reseeded.backward.seed), (7, 8));
}

#[test]
fn every_section_is_read() {
    let text = "\
[scenario]
arm = cobot7
duration = 2
tick = 0.002
coupling = direct
wave_impedance = 40
output = out.csv
playout_depth = 6
[gains]
k_pos = 800
[master]
damping = 3
[gripper]
object_angle = 0.8
[channel]
mean_delay = 0.002
jitter_shape = 2
jitter_scale = 0.0005
drop = 0.1
seed = 9
[payload]
mass = 0.5
[recovery]
duration = 2
[waypoint]
t = 0.5
position = 0.01 0 0
grip = 1
[plane]
normal = 0 0 2
offset = 0.1
stiffness = 1e4
[footplate]
t = 0
pressures = 10 10 0 0 0
pitch = 0.1
";
    let cfg = parse(text).unwrap();
    let s = &cfg.session;
    assert_eq!(s.tick, 0.002);
    assert_eq!(s.coupling, CouplingMode::Direct);
    assert_eq!(s.wave_impedance, 40.0);
    assert_eq!(s.playout_depth, 6);
    assert_eq!(s.gains.stiffness[(2, 2)], 800.0);
    assert_eq!(s.master.damping, 3.0);
    assert_eq!(s.gripper.object_angle, Some(0.8));
    assert_eq!(cfg.forward.jitter.unwrap().shape, 2.0);
    assert_eq!(cfg.backward.seed, 10);
    assert_eq!(s.payload.unwrap().mass, 0.5);
    assert_eq!(s.recovery.duration, 2.0);
    assert_eq!(s.script.waypoints()[0].grip, 1.0);
    assert_eq!(s.environment.planes[0].normal, Vector3::z());
    assert!(s.footplate.sample(1.0).is_some());
    assert_eq!(cfg.output, Some(PathBuf::from("out.csv")));
}

fn field_error(text: &str) -> (usize, String, String) {
    match parse(text).unwrap_err() {
        ConfigError::Field {
            line, section, key, ..
        } => (line, section, key),
        other => panic!("expected a field error, got {other}"),
    }
}

#[test]
fn errors_name_line_and_field() {
    let at = |l: usize, s: &str, k: &str| (l, s.to_string(), k.to_string());
    assert_eq!(field_error("[scenario]\narm = planar3\nduration = -1\n"), at(3, "scenario", "duration"));
    assert_eq!(field_error("[scenario]\narm = planar3\nduration = 1\ntick = fast\n"), at(4, "scenario", "tick"));
    assert_eq!(field_error("[scenario]\narm = planar3\nduration = 1\ncolour = red\n"), at(4, "scenario", "colour"));
    assert_eq!(field_error("[scenario]\nduration = 1\n"), at(1, "scenario", "arm"));
    assert_eq!(field_error("[scenario]\narm = nowhere.arm\nduration = 1\n"), at(2, "scenario", "arm"));
    assert_eq!(
        field_error(&format!("{MINIMAL}[channel]\njitter_shape = 2\n")),
        at(4, "channel", "jitter_scale")
    );
    assert_eq!(
        field_error(&format!("{MINIMAL}[waypoint]\nt = 1\n[waypoint]\nt = 1\n")),
        at(7, "waypoint", "t")
    );
    assert_eq!(
        field_error(&format!("{MINIMAL}[plane]\nnormal = 0 0\noffset = 0\nstiffness = 1\n")),
        at(5, "plane", "normal")
    );
    assert_eq!(
        field_error("[scenario]\narm = planar3\nduration = 1\nhome = 0 0 9\n"),
        at(4, "scenario", "home")
    );

    let e = parse(&format!("{MINIMAL}[weather]\n")).unwrap_err();
    assert_eq!(e.line(), Some(4));
    let e = parse(&format!("{MINIMAL}[channel]\ndrop = 1.5\n")).unwrap_err();
    assert_eq!(e.line(), Some(4), "{e}");
    let e = parse("[scenario]\narm = cobot7\nduration = 1\n[master]\nmass = 1\n").unwrap_err();
    assert_eq!(e.line(), Some(1), "{e}");
    assert!(e.to_string().contains("mass"), "{e}");
    let e = parse(&format!("{MINIMAL}[gains]\nk_pos = 500\n[gains]\n")).unwrap_err();
    assert_eq!(e.line(), Some(6));
    assert!(matches!(parse("# empty\n").unwrap_err(), ConfigError::Invalid(_)));
    assert!(matches!(
        ScenarioConfig::load(Path::new("/no/such/file.cfg")).unwrap_err(),
        ConfigError::Io { .. }
    ));
}

#[test]
fn arm_file_errors_point_into_the_arm_file() {
    let dir = tempfile::tempdir().unwrap();
    let arm = dir.path().join("bad.arm");
    std::fs::write(&arm, "[arm]\nhome = 0\n[link]\nmass = -1\ncom = 0 0 0\ninertia = 1 1 1 0 0 0\naxis = 0 0 1\nlower = -1\nupper = 1\nvelocity = 1\ntorque = 1\n").unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(&cfg, "[scenario]\narm = bad.arm\nduration = 1\n").unwrap();
    let e = ScenarioConfig::load(&cfg).unwrap_err();
    assert!(e.to_string().contains("bad.arm"), "{e}");
    assert!(e.to_string().contains("mass must be > 0"), "{e}");

    std::fs::write(&arm, "[arm]\nhome = 0\n[link]\nmass = 1\n").unwrap();
    let e = ScenarioConfig::load(&cfg).unwrap_err();
    assert_eq!(e.line(), Some(3), "{e}");
}

fn valid_config() -> Vec<u8> {
    std::fs::read(root().join("scenarios/lift-1kg.cfg")).unwrap()
}

fn check_total(bytes: &[u8]) -> Result<(), TestCaseError> {
    match ScenarioConfig::parse(bytes, &root().join("scenarios")) {
        Ok(cfg) => {
            prop_assert!(cfg.duration > 0.0 && cfg.session.tick > 0.0);
        }
        Err(ConfigError::Invalid(msg)) => prop_assert!(msg.contains("[scenario]"), "{msg}"),
        Err(e) => prop_assert!(e.line().is_some(), "no line in `{e}`"),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arbitrary_bytes_parse_or_fail_cleanly(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        check_total(&bytes)?;
    }

    #[test]
    fn mutated_scenarios_parse_or_fail_cleanly(
        edits in proptest::collection::vec((any::<prop::sample::Index>(), any::<u8>(), 0u8..3), 1..6)
    ) {
        let mut bytes = valid_config();
        for (at, byte, kind) in edits {
            let i = at.index(bytes.len());
            match kind {
                0 => bytes[i] = byte,
                1 => { bytes.remove(i); }
                _ => bytes.insert(i, byte),
            }
        }
        check_total(&bytes)?;
    }
}
