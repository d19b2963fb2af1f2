//! Built-in oracle checks, runnable from the command line on any build.

use std::fmt;

use nalgebra::{DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use teleop_core::control::{nullspace_projector, PseudoInverse};
use teleop_core::netsim::{decode_packet, encode_packet, CodecError, Packet};
use teleop_core::rigid_body::models::{planar_3link, planar_chain, PlanarLink};
use teleop_core::rigid_body::{bias_forces, jacobian, mass_matrix, task_jacobian, JointState};
use teleop_core::wave::{decode, encode, WaveConfig};

/// `{ch 0, flags 0, seq 1, stamp 0, payload [0.0]}`.
pub const GOLDEN_MINIMAL: [u8; 34] = [
    0x57, 0x41, 0x56, 0x45, 0x01, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x93, 0x50, 0xb8, 0x09,
];

/// `{ch 2, flags 1, seq 0xDEADBEEF, stamp 1234567890123, payload [1.5, -2.25, 1e-3]}`.
pub const GOLDEN_CONTROL: [u8; 50] = [
    0x57, 0x41, 0x56, 0x45, 0x01, 0x02, 0x01, 0x00, 0xef, 0xbe, 0xad, 0xde, 0xcb, 0x04, 0xfb,
    0x71, 0x1f, 0x01, 0x00, 0x00, 0x03, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xf8, 0x3f,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x02, 0xc0, 0xfc, 0xa9, 0xf1, 0xd2, 0x4d, 0x62, 0x50,
    0x3f, 0x45, 0x9c, 0x3f, 0xa4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    /// Random states per suite.
    pub samples: usize,
    pub seed: u64,
    /// Flip one bit of the golden packets before checking them.
    pub perturb_golden: bool,
    pub pinv: PseudoInverse,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            perturb_golden: false,
            pinv: PseudoInverse::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            let status = if s.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{status} {:<10} {}", s.name, s.detail)?;
        }
        Ok(())
    }
}

fn result(name: &'static str, failure: Option<String>, ok: String) -> SuiteResult {
    match failure {
        Some(detail) => SuiteResult {
            name,
            passed: false,
            detail,
        },
        None => SuiteResult {
            name,
            passed: true,
            detail: ok,
        },
    }
}

pub fn run(opts: &SelftestOptions) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    SelftestReport {
        suites: vec![
            dynamics(opts.samples, &mut rng),
            wave(opts.samples, &mut rng),
            codec(opts.perturb_golden),
            projector(opts.samples, &opts.pinv, &mut rng),
        ],
    }
}

/// Two-link planar arm in textbook form, gravity along −y.
struct TwoLink {
    m1: f64,
    m2: f64,
    l1: f64,
    lc1: f64,
    lc2: f64,
    i1: f64,
    i2: f64,
}

const G: f64 = 9.81;

impl TwoLink {
    fn mass(&self, q2: f64) -> Matrix2<f64> {
        let c2 = q2.cos();
        let m22 = self.i2 + self.m2 * self.lc2 * self.lc2;
        let m12 = m22 + self.m2 * self.l1 * self.lc2 * c2;
        let m11 = self.i1
            + self.m1 * self.lc1 * self.lc1
            + self.m2 * self.l1 * self.l1
            + 2.0 * m12
            - m22;
        Matrix2::new(m11, m12, m12, m22)
    }

    fn bias(&self, q: &DVector<f64>, qd: &DVector<f64>) -> Vector2<f64> {
        let h = self.m2 * self.l1 * self.lc2 * q[1].sin();
        let g2 = self.m2 * self.lc2 * G * (q[0] + q[1]).cos();
        let g1 = (self.m1 * self.lc1 + self.m2 * self.l1) * G * q[0].cos() + g2;
        Vector2::new(
            -h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]) + g1,
            h * qd[0] * qd[0] + g2,
        )
    }
}

fn dynamics(samples: usize, rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for _ in 0..samples {
        let p = TwoLink {
            m1: rng.random_range(0.5..5.0),
            m2: rng.random_range(0.5..5.0),
            l1: rng.random_range(0.2..1.0),
            lc1: rng.random_range(0.05..0.5),
            lc2: rng.random_range(0.05..0.5),
            i1: rng.random_range(0.01..0.3),
            i2: rng.random_range(0.01..0.3),
        };
        let model = planar_chain(
            &[
                PlanarLink { length: p.l1, mass: p.m1, com: p.lc1, inertia: p.i1 },
                PlanarLink { length: 0.4, mass: p.m2, com: p.lc2, inertia: p.i2 },
            ],
            -G,
        );
        let q = DVector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
        let qd = DVector::from_fn(2, |_, _| rng.random_range(-5.0..5.0));
        let (m, b) = match (
            mass_matrix(&model, &q),
            bias_forces(&model, &JointState::new(q.clone(), qd.clone())),
        ) {
            (Ok(m), Ok(b)) => (m, b),
            (Err(e), _) | (_, Err(e)) => {
                failure = Some(format!("dynamics error: {e}"));
                break;
            }
        };
        let dm = (m - p.mass(q[1])).abs().max();
        let db = (b - p.bias(&q, &qd)).abs().max();
        worst = worst.max(dm).max(db);
        if dm > 1e-9 || db > 1e-9 {
            failure = Some(format!("q = {:?}: |ΔM| = {dm:e}, |Δbias| = {db:e}", q.as_slice()));
            break;
        }
    }
    result("dynamics", failure, format!("{samples} two-link states, worst {worst:.1e}"))
}

fn wave(samples: usize, rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut worst: f64 = 0.0;
    for b in [0.1, 1.0, 10.0] {
        let cfg = match WaveConfig::uniform(b, 1) {
            Ok(c) => c,
            Err(e) => return result("wave", Some(e.to_string()), String::new()),
        };
        for _ in 0..samples {
            let xd = rng.random_range(-2.0..2.0);
            let f = rng.random_range(-50.0..50.0);
            let (u, (xd2, v)) = match encode(&[xd], &[f], &cfg)
                .and_then(|u| decode(&u, &[f], &cfg).map(|d| (u, d)))
            {
                Ok(r) => r,
                Err(e) => return result("wave", Some(e.to_string()), String::new()),
            };
            // Relative to the magnitudes involved, as the power terms grow quadratically.
            let scale = 1.0 + xd.abs() + f.abs();
            let err_rt = (xd2[0] - xd).abs() / scale;
            let power = 0.5 * u.values[0] * u.values[0] - 0.5 * v.values[0] * v.values[0];
            let err_p = (power - f * xd2[0]).abs() / (scale * scale);
            worst = worst.max(err_rt).max(err_p);
            if err_rt > 1e-12 || err_p > 1e-12 {
                return result(
                    "wave",
                    Some(format!("b = {b}: round trip {err_rt:e}, power {err_p:e}")),
                    String::new(),
                );
            }
        }
    }
    result("wave", None, format!("3 impedances x {samples}, worst {worst:.1e}"))
}

fn codec(perturb: bool) -> SuiteResult {
    let minimal = Packet::new(0, 1, 0, vec![0.0]);
    let mut control = Packet::new(2, 0xDEAD_BEEF, 1_234_567_890_123, vec![1.5, -2.25, 1e-3]);
    control.flags = 1;
    let mut failure = None;
    for (name, packet, golden) in [
        ("minimal", &minimal, &GOLDEN_MINIMAL[..]),
        ("control", &control, &GOLDEN_CONTROL[..]),
    ] {
        let mut golden = golden.to_vec();
        if perturb {
            golden[12] ^= 0x01;
        }
        match encode_packet(packet) {
            Ok(bytes) if bytes == golden => {}
            Ok(_) => {
                failure = Some(format!("{name}: encoded bytes differ from golden"));
                break;
            }
            Err(e) => {
                failure = Some(format!("{name}: {e}"));
                break;
            }
        }
        if decode_packet(&golden).as_ref() != Ok(packet) {
            failure = Some(format!("{name}: golden bytes do not decode to the packet"));
            break;
        }
    }
    if failure.is_none() {
        let corrupt = |i: usize, byte: u8| {
            let mut b = GOLDEN_MINIMAL.to_vec();
            b[i] ^= byte;
            b
        };
        type Check = fn(&CodecError) -> bool;
        let cases: [(&str, Vec<u8>, Check); 4] = [
            ("magic", corrupt(0, 0x0f), |e| matches!(e, CodecError::BadMagic(_))),
            ("version", corrupt(4, 0x03), |e| matches!(e, CodecError::BadVersion(2))),
            ("crc", corrupt(25, 0x40), |e| matches!(e, CodecError::BadCrc { .. })),
            ("truncated", GOLDEN_MINIMAL[..20].to_vec(), |e| {
                matches!(e, CodecError::Truncated { .. })
            }),
        ];
        for (name, bytes, check) in cases {
            match decode_packet(&bytes) {
                Err(e) if check(&e) => {}
                other => {
                    failure = Some(format!("{name} case not detected: {other:?}"));
                    break;
                }
            }
        }
    }
    result("codec", failure, "2 golden packets, 4 error cases".into())
}

fn projector(samples: usize, pinv: &PseudoInverse, rng: &mut ChaCha8Rng) -> SuiteResult {
    let model = planar_3link();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let q = DVector::from_fn(3, |i, _| {
            rng.random_range(model.lower_limits[i]..model.upper_limits[i])
        });
        let tau = DVector::from_fn(3, |_, _| rng.random_range(-50.0..50.0));
        let jt = match jacobian(&model, &q) {
            Ok(j) => task_jacobian(&model, &j),
            Err(e) => return result("projector", Some(e.to_string()), String::new()),
        };
        let (p, _) = nullspace_projector(&jt, pinv);
        let t_null = p * tau;
        let ratio = (&jt * &t_null).norm() / (1.0 + t_null.norm());
        worst = worst.max(ratio);
        if ratio > 1e-8 {
            return result(
                "projector",
                Some(format!("q = {:?}: |J T_null| / (1 + |T_null|) = {ratio:e}", q.as_slice())),
                String::new(),
            );
        }
    }
    result("projector", None, format!("{samples} three-link postures, worst {worst:.1e}"))
}
