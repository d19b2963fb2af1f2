mod common;

use std::f64::consts::FRAC_PI_2;

use approx::assert_abs_diff_eq;
use nalgebra::{DVector, UnitQuaternion, Vector3};
use proptest::prelude::*;
use rand::Rng;
use teleop_core::control::{GainSet, ReferenceGains};
use teleop_core::netsim::{ChannelConfig, GammaJitter};
use teleop_core::rigid_body::{models, JointState, TaskPose, TaskTwist, Wrench};
use teleop_core::session::*;

fn cobot() -> SessionConfig {
    let (model, home) = models::by_name("cobot7").unwrap();
    SessionConfig::new(model, home).unwrap()
}

fn wired(seed: u64) -> ChannelConfig {
    ChannelConfig::fixed(0.1e-3, seed)
}

fn wireless(seed: u64) -> ChannelConfig {
    ChannelConfig {
        mean_delay: 2e-3,
        jitter: Some(GammaJitter {
            shape: 2.0,
            scale: 0.5e-3,
        }),
        drop_prob: 0.05,
        seed,
        capacity: ChannelConfig::DEFAULT_CAPACITY,
    }
}

fn sweep(amplitude: f64, period: f64, strokes: usize) -> OperatorScript {
    let mut w = vec![Waypoint::at(0.5, Vector3::zeros())];
    for k in 0..strokes {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        w.push(Waypoint::at(
            0.5 + (k + 1) as f64 * period,
            Vector3::new(0.8, 0.5, 0.6) * (s * amplitude),
        ));
    }
    OperatorScript::new(w).unwrap()
}

fn wrist_snap(at: f64) -> OperatorScript {
    let mut b = Waypoint::at(at + 0.06, Vector3::zeros());
    b.rpy = Vector3::new(0.0, 0.0, 1.2);
    OperatorScript::new(vec![Waypoint::at(at, Vector3::zeros()), b]).unwrap()
}

#[test]
fn couple_setpoints_examples() {
    let slave = TaskPose::new(Vector3::new(0.3, 0.0, 0.5), UnitQuaternion::identity());
    let master0 = TaskPose::new(Vector3::zeros(), UnitQuaternion::identity());
    let map = CouplingMap::clutch(1.0, &master0, &slave);

    let (x_d, xd_d) = map.couple_setpoints(&master0, &TaskTwist::zero());
    assert_eq!(x_d.position, slave.position);
    assert_eq!(xd_d, TaskTwist::zero());

    let up = TaskPose::new(Vector3::new(0.0, 0.0, 0.1), UnitQuaternion::identity());
    let (x_d, _) = map.couple_setpoints(&up, &TaskTwist::zero());
    assert_abs_diff_eq!(x_d.position, Vector3::new(0.3, 0.0, 0.6), epsilon = 1e-15);

    let turned = TaskPose::new(
        Vector3::zeros(),
        UnitQuaternion::from_axis_angle(&Vector3::z_axis(), FRAC_PI_2),
    );
    let (x_d, _) = map.couple_setpoints(&turned, &TaskTwist::zero());
    assert_eq!(x_d.position, slave.position);
    assert_abs_diff_eq!(x_d.orientation.angle(), FRAC_PI_2, epsilon = 1e-12);
    let axis = x_d.orientation.axis().unwrap();
    assert_abs_diff_eq!(axis.into_inner(), Vector3::z(), epsilon = 1e-12);
}

#[test]
fn coupling_scales_translation_and_twist() {
    let slave = TaskPose::new(
        Vector3::new(0.3, 0.1, 0.5),
        UnitQuaternion::from_euler_angles(0.3, 0.2, 0.1),
    );
    let master0 = TaskPose::new(
        Vector3::new(1.0, 2.0, 3.0),
        UnitQuaternion::from_euler_angles(-0.5, 0.1, 0.0),
    );
    let map = CouplingMap::clutch(0.5, &master0, &slave);
    // At the clutch the map is the identity onto the slave pose.
    let (x_d, _) = map.couple_setpoints(&master0, &TaskTwist::zero());
    assert_abs_diff_eq!(x_d.position, slave.position, epsilon = 1e-15);
    assert!(x_d.orientation.angle_to(&slave.orientation) < 1e-12);
    let moved = TaskPose::new(master0.position + Vector3::new(0.2, 0.0, 0.0), master0.orientation);
    let twist = TaskTwist::new(Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 0.0, 2.0));
    let (x_d, xd_d) = map.couple_setpoints(&moved, &twist);
    assert_abs_diff_eq!(x_d.position.x, 0.4, epsilon = 1e-15);
    assert_eq!(xd_d.linear, Vector3::new(0.5, 0.0, 0.0));
    assert_eq!(xd_d.angular, twist.angular);
}

#[test]
fn feedback_is_translation_only() {
    let torque_only = Wrench::new(Vector3::zeros(), Vector3::new(1.0, -2.0, 3.0));
    assert_eq!(feedback_wrench(&torque_only), Vector3::zeros());
    assert_eq!(feedback_wrench(&Wrench::zero()), Vector3::zeros());
    let w = Wrench::new(Vector3::new(0.0, 0.0, -9.81), Vector3::new(5.0, 0.0, 0.0));
    assert_eq!(feedback_wrench(&w), Vector3::new(0.0, 0.0, -9.81));
}

fn floor(k: f64, c: f64) -> ContactEnvironment {
    ContactEnvironment::new(vec![Plane {
        normal: Vector3::z(),
        offset: 0.0,
        stiffness: k,
        damping: c,
    }])
    .unwrap()
}

#[test]
fn contact_examples() {
    let env = floor(1e4, 100.0);
    let at = |z: f64| TaskPose::new(Vector3::new(0.0, 0.0, z), UnitQuaternion::identity());
    let moving = |vz: f64| TaskTwist::new(Vector3::new(0.0, 0.0, vz), Vector3::zeros());

    assert_eq!(contact_wrench(&env, &at(0.01), &moving(-1.0)), Wrench::zero());
    let w = contact_wrench(&env, &at(-1e-3), &TaskTwist::zero());
    assert_abs_diff_eq!(w.force, Vector3::new(0.0, 0.0, 10.0), epsilon = 1e-12);
    assert_eq!(w.torque, Vector3::zeros());
    // Pressing in adds damping.
    assert!(contact_wrench(&env, &at(-1e-3), &moving(-0.1)).force.z > 10.0);
    // Fast pull-out is clipped at zero, never attractive.
    for vz in [0.05, 0.1, 0.5, 10.0] {
        assert!(contact_wrench(&env, &at(-1e-3), &moving(vz)).force.z >= 0.0);
    }
    assert_eq!(contact_wrench(&env, &at(-1e-3), &moving(10.0)).force.z, 0.0);

    assert!(ContactEnvironment::new(vec![Plane {
        normal: Vector3::new(0.0, 0.0, 2.0),
        offset: 0.0,
        stiffness: 1.0,
        damping: 0.0
    }])
    .is_err());
    assert!(ContactEnvironment::new(vec![Plane {
        normal: Vector3::z(),
        offset: 0.0,
        stiffness: 0.0,
        damping: 0.0
    }])
    .is_err());
}

#[test]
fn monitor_examples() {
    let cfg = cobot();
    let model = &cfg.model;
    let home = cfg.home().clone();
    let dt = 1e-3;
    let mut mon = ErrorMonitor::new(0.1);
    let rest = JointState::at_rest(home.clone());
    assert_eq!(mon.check(model, &rest, false, dt), None);

    let mut fast = rest.clone();
    fast.qd[4] = model.velocity_limits[4] + 1e-6;
    assert_eq!(
        mon.check(model, &fast, false, dt),
        Some((FaultKind::VelocityLimit, Some(4)))
    );

    let mut out = rest.clone();
    out.q[3] = model.upper_limits[3] + 1e-3;
    out.qd[0] = 100.0;
    assert_eq!(
        error_monitor(&mut mon, model, &out, false, dt),
        Some((FaultKind::PositionLimit, Some(3)))
    );

    // A single saturated tick, or exactly 100 ms of it, is tolerated.
    let mut mon = ErrorMonitor::new(0.1);
    assert_eq!(mon.check(model, &rest, true, dt), None);
    assert_eq!(mon.check(model, &rest, false, dt), None);
    for _ in 0..100 {
        assert_eq!(mon.check(model, &rest, true, dt), None);
    }
    assert_eq!(
        mon.check(model, &rest, true, dt),
        Some((FaultKind::TorqueSaturationPersistent, None))
    );
}

#[test]
fn recovery_plan_shape() {
    let cfg = RecoveryConfig::default();
    let q0 = DVector::from_vec(vec![0.1, -0.2, 0.3]);
    let home = recover(&JointState::at_rest(q0.clone()), &q0, &cfg);
    assert_eq!(home.duration, 0.0);
    assert_eq!(home.sample(1e-9).progress, 1.0);

    let start = JointState::at_rest(DVector::from_vec(vec![1.0, 0.0, -1.0]));
    let plan = recover(&start, &q0, &cfg);
    assert_eq!(plan.duration, 3.0);
    let r0 = plan.sample(0.0);
    assert_eq!(r0.q, start.q);
    assert_eq!(r0.qd.norm(), 0.0);
    let mid = plan.sample(1.5);
    assert_abs_diff_eq!(mid.q, (&start.q + &q0) * 0.5, epsilon = 1e-12);
    let end = plan.sample(3.0);
    assert_eq!(end.q, q0);
    assert_eq!(end.progress, 1.0);
    // Velocity is the derivative of position.
    let h = 1e-6;
    let fd = (plan.sample(1.0 + h).q - plan.sample(1.0 - h).q) / (2.0 * h);
    assert_abs_diff_eq!(fd, plan.sample(1.0).qd, epsilon = 1e-6);
    let fd = (plan.sample(1.0 + h).qd - plan.sample(1.0 - h).qd) / (2.0 * h);
    assert_abs_diff_eq!(fd, plan.sample(1.0).qdd, epsilon = 1e-5);
}

#[test]
fn min_jerk_boundaries() {
    assert_eq!(min_jerk(0.0), (0.0, 0.0));
    assert_eq!(min_jerk(1.0), (1.0, 0.0));
    assert_eq!(min_jerk(0.5).0, 0.5);
    assert_eq!(min_jerk(-1.0), (0.0, 0.0));
}

#[test]
fn script_interpolates() {
    let mut b = Waypoint::at(2.0, Vector3::new(0.1, 0.0, 0.0));
    b.grip = 1.0;
    let s = OperatorScript::new(vec![Waypoint::at(1.0, Vector3::zeros()), b]).unwrap();
    assert_eq!(s.sample(0.0).position, Vector3::zeros());
    assert_abs_diff_eq!(s.sample(1.5).position.x, 0.05, epsilon = 1e-15);
    assert_abs_diff_eq!(s.sample(1.5).velocity.x, 0.1 * 1.875, epsilon = 1e-12);
    assert_eq!(s.sample(5.0).position, b.position);
    assert_eq!(s.sample(5.0).grip, 1.0);
    assert!(OperatorScript::new(vec![b, Waypoint::at(1.0, Vector3::zeros())]).is_err());
}

#[test]
fn status_messages_round_trip() {
    for mode in [
        Mode::Operational,
        Mode::Fault(FaultKind::TorqueSaturationPersistent),
        Mode::Recovering { progress: 0.25 },
    ] {
        let m = StatusMessage {
            mode,
            fault: (mode != Mode::Operational).then_some(FaultKind::VelocityLimit),
            joint: Some(3),
            unrecoverable: false,
        };
        let m = StatusMessage {
            fault: if let Mode::Fault(k) = mode { Some(k) } else { m.fault },
            ..m
        };
        assert_eq!(StatusMessage::from_packet(&m.to_packet(7, 0)), Some(m));
    }
}

#[test]
fn master_must_be_light() {
    let mut cfg = cobot();
    cfg.master.mass = 1.0;
    assert!(cfg.validate().is_err());
    assert!(Session::simulated(&cfg, wired(0), wired(1)).is_err());
    let lambda = translational_inertia_min(&cfg.model, &cfg.initial_q).unwrap();
    assert!(cobot().master.mass <= lambda / 10.0);
}

#[test]
fn zero_length_run_is_empty() {
    let mut s = Session::simulated(&cobot(), wired(0), wired(1)).unwrap();
    assert!(s.run(0.0).unwrap().is_empty());
}

#[test]
fn ten_second_run_bookkeeping() {
    let mut cfg = cobot();
    cfg.script = sweep(0.04, 1.5, 6);
    let mut s = Session::simulated(&cfg, wired(0), wired(1)).unwrap();
    let recs = s.run(10.0).unwrap();
    assert_eq!(recs.len(), 10_000);
    assert!(recs.windows(2).all(|w| w[1].t > w[0].t));
    assert_abs_diff_eq!(recs.last().unwrap().t, 10.0, epsilon = 1e-9);
    assert!(recs.iter().all(|r| r.mode == Mode::Operational && r.fault.is_none()));
    assert!(s.fault_events().is_empty());
    let max_err = recs.iter().map(|r| r.tracking_error).fold(0.0, f64::max);
    assert!(max_err < 0.01, "max tracking error {max_err}");
}

#[test]
fn free_space_force_is_small_at_rest() {
    let mut s = Session::simulated(&cobot(), wired(0), wired(1)).unwrap();
    let recs = s.run(2.0).unwrap();
    let last = recs.last().unwrap();
    assert!(last.felt_force.norm() < 0.05, "{:?}", last.felt_force);
}

#[test]
fn lift_renders_weight() {
    let mut cfg = cobot();
    cfg.payload = Some(Payload {
        mass: 1.0,
        from: 1.0,
    });
    let mut s = Session::simulated(&cfg, wireless(0), wireless(1)).unwrap();
    let recs = s.run(6.0).unwrap();
    let tail = &recs[recs.len() - 1000..];
    let fz = tail.iter().map(|r| r.felt_force.z).sum::<f64>() / tail.len() as f64;
    assert!((fz + 9.81).abs() < 0.05 * 9.81, "felt z {fz}");
    let fxy = tail.iter().map(|r| r.felt_force.xy().norm()).fold(0.0, f64::max);
    assert!(fxy < 0.5);
}

#[test]
fn wave_observer_matches_ledgers() {
    let mut cfg = cobot();
    cfg.script = sweep(0.04, 1.0, 4);
    let mut s = Session::simulated(&cfg, wireless(3), wireless(4)).unwrap();
    s.run(5.0).unwrap();
    let ledger = s.master().ledger().dissipated() + s.slave().ledger().dissipated();
    let obs = s.observer().dissipated();
    assert!(obs >= 0.0);
    assert!((obs - ledger).abs() < 1e-9 * (1.0 + obs.abs()), "{obs} vs {ledger}");
}

#[test]
fn identical_seeds_identical_runs() {
    let mut cfg = cobot();
    cfg.script = sweep(0.04, 1.0, 2);
    let run = |seed| {
        let mut s = Session::simulated(&cfg, wireless(seed), wireless(seed + 1)).unwrap();
        s.run(2.5).unwrap()
    };
    let (a, b) = (run(5), run(5));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| {
        x.t.to_bits() == y.t.to_bits()
            && x.tracking_error.to_bits() == y.tracking_error.to_bits()
            && x.felt_force.iter().zip(y.felt_force.iter()).all(|(p, q)| p.to_bits() == q.to_bits())
    }));
    assert_ne!(a, run(9));
}

#[test]
fn wrist_snap_faults_and_recovers() {
    let mut cfg = cobot();
    cfg.script = wrist_snap(1.0);
    let mut s = Session::simulated(&cfg, wireless(0), wireless(1)).unwrap();
    let recs = s.run(6.0).unwrap();
    let events = s.fault_events();
    assert_eq!(events.len(), 1);
    assert_eq!(events[0].kind, FaultKind::VelocityLimit);
    let fault_at = events[0].t;
    // Raised on the tick the limit was exceeded.
    let i = recs.iter().position(|r| r.mode != Mode::Operational).unwrap();
    assert_eq!(recs[i].mode, Mode::Fault(FaultKind::VelocityLimit));
    assert!(matches!(recs[i + 1].mode, Mode::Recovering { .. }));
    let back = recs[i..].iter().find(|r| r.mode == Mode::Operational).unwrap();
    assert!(back.t - fault_at < 3.5, "recovered after {}", back.t - fault_at);
    assert!((&s.slave().state().q - cfg.home()).norm() < 0.02);
}

#[test]
fn operator_is_ignored_while_recovering() {
    let mut cfg = cobot();
    // The operator keeps moving after the fault.
    let mut w = wrist_snap(0.5).waypoints().to_vec();
    w.push(Waypoint::at(1.0, Vector3::new(0.05, 0.05, 0.0)));
    w.push(Waypoint::at(2.0, Vector3::new(-0.05, 0.0, 0.05)));
    w.last_mut().unwrap().rpy = Vector3::new(0.0, 0.0, 1.2);
    cfg.script = OperatorScript::new(w).unwrap();
    let mut s = Session::simulated(&cfg, wired(0), wired(1)).unwrap();
    let mut frozen = None;
    for _ in 0..4000 {
        let r = s.run_tick().unwrap();
        if let Mode::Recovering { .. } = r.mode {
            let sp = *s.slave().setpoint();
            let f = *frozen.get_or_insert(sp);
            assert_eq!(sp, f);
            assert_eq!(r.felt_force, Vector3::zeros());
        }
    }
    assert!(frozen.is_some());
}

#[test]
fn recovery_from_random_postures() {
    let mut rng = common::rng(31);
    let cfg = cobot();
    let model = cfg.model.clone();
    for _ in 0..5 {
        let q = DVector::from_fn(model.dof(), |i, _| {
            let (lo, hi) = (cfg.gains.wall_lower[i], cfg.gains.wall_upper[i]);
            rng.random_range(lo..hi)
        });
        let mut c = cfg.clone();
        c.initial_q = q;
        let mut s = Session::simulated(&c, wired(0), wired(1)).unwrap();
        s.slave_mut().inject_fault(0.0, FaultKind::PositionLimit, None);
        let recs = s.run(4.0).unwrap();
        let back = recs.iter().position(|r| r.mode == Mode::Operational).unwrap();
        assert!(recs[back].t < 3.5, "took {}", recs[back].t);
        assert!((&s.slave().state().q - c.home()).norm() < 0.02);
    }
}

#[test]
fn fault_at_home_recovers_immediately() {
    let cfg = cobot();
    let mut s = Session::simulated(&cfg, wired(0), wired(1)).unwrap();
    s.slave_mut().inject_fault(0.0, FaultKind::TorqueSaturationPersistent, None);
    let r = s.run_tick().unwrap();
    assert_eq!(r.mode, Mode::Operational);
    assert!(s.fault_events().len() == 1);
}

#[test]
fn pinned_arm_times_out() {
    let mut cfg = cobot();
    cfg.script = wrist_snap(0.5);
    let home_ee = SlaveSide::new(&cfg).unwrap().end_effector().unwrap().position;
    cfg.initial_q[1] += 0.5;
    let start_ee = SlaveSide::new(&cfg).unwrap().end_effector().unwrap().position;
    let offset = 0.5 * (home_ee.x + start_ee.x);
    cfg.environment = ContactEnvironment::new(vec![Plane {
        normal: Vector3::x(),
        offset,
        stiffness: 1e5,
        damping: 200.0,
    }])
    .unwrap();
    let mut s = Session::simulated(&cfg, wired(0), wired(1)).unwrap();
    let recs = s.run(12.0).unwrap();
    assert!(s.slave().unrecoverable());
    let ev = s.fault_events();
    assert_eq!(ev.len(), 2);
    assert!((ev[1].t - ev[0].t - 10.0).abs() < 0.01);
    assert!(matches!(recs.last().unwrap().mode, Mode::Fault(_)));
    // Never returned to Operational after the first fault.
    let first = recs.iter().position(|r| r.mode != Mode::Operational).unwrap();
    assert!(recs[first..].iter().all(|r| r.mode != Mode::Operational));
}

#[test]
fn planar_arm_session_runs() {
    let (model, home) = models::by_name("planar3").unwrap();
    let mut cfg = SessionConfig::new(model, home).unwrap();
    cfg.master.mass = 0.5 * translational_inertia_min(&cfg.model, &cfg.initial_q).unwrap() / 10.0;
    cfg.script = sweep(0.03, 1.0, 3);
    let mut s = Session::simulated(&cfg, wireless(0), wireless(1)).unwrap();
    let recs = s.run(4.0).unwrap();
    assert!(s.fault_events().is_empty());
    assert!(recs.iter().all(|r| r.tracking_error < 0.02));
    // The master stays in the plane of the arm.
    assert_eq!(s.master().position().z, 0.0);
}

#[test]
fn direct_coupling_with_stiff_gains_diverges() {
    let mut cfg = cobot();
    let home = cfg.home().clone();
    cfg.gains = GainSet::reference(
        &cfg.model,
        &home,
        &ReferenceGains {
            k_pos: 3000.0,
            ..Default::default()
        },
    )
    .unwrap();
    cfg.script = sweep(0.03, 1.0, 3);
    let mut wave = Session::simulated(&cfg, wireless(0), wireless(1)).unwrap();
    wave.run(4.0).unwrap();
    assert!(!wave.observer().divergent());
    assert!(wave.observer().dissipated() >= 0.0);

    cfg.coupling = CouplingMode::Direct;
    let mut direct = Session::simulated(&cfg, wireless(0), wireless(1)).unwrap();
    direct.run(4.0).unwrap();
    assert!(direct.observer().divergent());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mode_machine_never_skips_recovery(
        faults in proptest::collection::vec((0u32..1500, 0u8..3), 0..4),
        seed in 0u64..1000,
    ) {
        let mut cfg = cobot();
        cfg.script = sweep(0.03, 0.5, 3);
        let mut s = Session::simulated(&cfg, wireless(seed), wireless(seed + 1)).unwrap();
        let mut prev = Mode::Operational;
        for k in 0..1500u32 {
            for (at, kind) in &faults {
                if *at == k {
                    let kind = FaultKind::from_code(kind + 1).unwrap();
                    let t = s.time();
                    s.slave_mut().inject_fault(t, kind, None);
                }
            }
            let r = s.run_tick().unwrap();
            if let Mode::Fault(_) = prev {
                prop_assert!(r.mode != Mode::Operational);
            }
            prev = r.mode;
        }
    }
}
