//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use teleop_core::rigid_body::models::{planar_chain, PlanarLink};
use teleop_core::rigid_body::ArmModel;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameters of a planar two-link arm in textbook notation.
#[derive(Debug, Clone, Copy)]
pub struct TwoLink {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub lc1: f64,
    pub lc2: f64,
    pub i1: f64,
    pub i2: f64,
    pub g: f64,
}

impl TwoLink {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            m1: rng.random_range(0.5..5.0),
            m2: rng.random_range(0.5..5.0),
            l1: rng.random_range(0.2..1.0),
            lc1: rng.random_range(0.05..0.5),
            lc2: rng.random_range(0.05..0.5),
            i1: rng.random_range(0.01..0.3),
            i2: rng.random_range(0.01..0.3),
            g: 9.81,
        }
    }

    pub fn model(&self) -> ArmModel {
        planar_chain(
            &[
                PlanarLink {
                    length: self.l1,
                    mass: self.m1,
                    com: self.lc1,
                    inertia: self.i1,
                },
                PlanarLink {
                    length: 0.4,
                    mass: self.m2,
                    com: self.lc2,
                    inertia: self.i2,
                },
            ],
            -self.g,
        )
    }

    pub fn mass_matrix(&self, q2: f64) -> Matrix2<f64> {
        let c2 = q2.cos();
        let m11 = self.i1
            + self.i2
            + self.m1 * self.lc1 * self.lc1
            + self.m2 * (self.l1 * self.l1 + self.lc2 * self.lc2 + 2.0 * self.l1 * self.lc2 * c2);
        let m12 = self.i2 + self.m2 * (self.lc2 * self.lc2 + self.l1 * self.lc2 * c2);
        let m22 = self.i2 + self.m2 * self.lc2 * self.lc2;
        Matrix2::new(m11, m12, m12, m22)
    }

    /// `C(q, q̇)q̇ + G(q)` with gravity along −y and angles measured from +x.
    pub fn bias(&self, q: [f64; 2], qd: [f64; 2]) -> Vector2<f64> {
        let h = self.m2 * self.l1 * self.lc2 * q[1].sin();
        let c1 = -h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]);
        let c2 = h * qd[0] * qd[0];
        let g12 = self.m2 * self.lc2 * self.g * (q[0] + q[1]).cos();
        let g1 = (self.m1 * self.lc1 + self.m2 * self.l1) * self.g * q[0].cos() + g12;
        Vector2::new(c1 + g1, c2 + g12)
    }
}

/// Random configuration within ±π.
pub fn random_q(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-3.1..3.1))
}

pub fn random_vec(rng: &mut impl Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-scale..scale))
}

/// Central finite-difference derivative of a matrix-valued function along `dir`.
pub fn directional_derivative<F>(f: F, q: &DVector<f64>, dir: &DVector<f64>, h: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    (f(&(q + dir * h)) - f(&(q - dir * h))) / (2.0 * h)
}
