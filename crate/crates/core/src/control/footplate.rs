use nalgebra::Vector3;

use crate::rigid_body::TaskTwist;

/// Minimum number of pressure sensors that must read above threshold for the plate to count
/// as occupied.
pub const FOOT_PRESENT_VOTES: usize = 2;

/// One reading of the operator's footplate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootplateSample {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Readings of the five pressure sensors under the plate (N).
    pub pressures: [f64; 5],
    pub pressure_threshold: f64,
    pub deadband: f64,
    pub max_tilt: f64,
    /// Base twist reached at full tilt; only `linear.x`, `linear.y` and `angular.z` are used.
    pub max_twist: TaskTwist,
}

impl FootplateSample {
    pub fn is_valid(&self) -> bool {
        let finite = [
            self.roll,
            self.pitch,
            self.yaw,
            self.pressure_threshold,
            self.deadband,
            self.max_tilt,
        ]
        .iter()
        .chain(self.pressures.iter())
        .all(|v| v.is_finite());
        finite
            && self.max_twist.is_finite()
            && self.pressures.iter().all(|p| *p >= 0.0)
            && self.deadband >= 0.0
            && self.deadband < self.max_tilt
    }

    pub fn foot_present(&self) -> bool {
        self.pressures
            .iter()
            .filter(|p| **p > self.pressure_threshold)
            .count()
            >= FOOT_PRESENT_VOTES
    }

    /// Deadband followed by a cubic ramp, clamped to `±max`.
    fn shape(&self, tilt: f64, max: f64) -> f64 {
        let mag = tilt.abs();
        if mag <= self.deadband {
            return 0.0;
        }
        let s = ((mag - self.deadband) / (self.max_tilt - self.deadband)).min(1.0);
        let out = max * s * s * s;
        if tilt < 0.0 {
            -out
        } else {
            out
        }
    }
}

/// Maps plate tilt to an omnidirectional base twist: pitch drives forward, roll drives
/// sideways, yaw turns. Returns zero unless the foot is on the plate. Invalid samples also map
/// to zero.
pub fn footplate_to_twist(sample: &FootplateSample) -> TaskTwist {
    if !sample.is_valid() || !sample.foot_present() {
        return TaskTwist::zero();
    }
    let max = &sample.max_twist;
    TaskTwist::new(
        Vector3::new(
            sample.shape(sample.pitch, max.linear.x),
            sample.shape(sample.roll, max.linear.y),
            0.0,
        ),
        Vector3::new(0.0, 0.0, sample.shape(sample.yaw, max.angular.z)),
    )
}
