/// Port-power energy observer for the master-slave link.
///
/// Integrates the power entering the link at the master port and leaving it at the slave
/// port. A passive link only ever stores or dissipates energy; a link that has produced more
/// than `threshold` joules is flagged divergent, and the flag latches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyObserver {
    pub e_in: f64,
    pub e_out: f64,
    pub threshold: f64,
    /// Largest energy the link has generated so far.
    pub peak_generated: f64,
    divergent_at: Option<f64>,
}

impl EnergyObserver {
    pub fn new(threshold: f64) -> Self {
        Self {
            e_in: 0.0,
            e_out: 0.0,
            threshold,
            peak_generated: 0.0,
            divergent_at: None,
        }
    }

    /// Adds one tick ending at time `t` with the given port powers.
    pub fn update(&mut self, t: f64, power_in: f64, power_out: f64, dt: f64) {
        self.e_in += power_in * dt;
        self.e_out += power_out * dt;
        self.record(t);
    }

    /// Sets the cumulative port energies directly.
    pub fn set(&mut self, t: f64, e_in: f64, e_out: f64) {
        self.e_in = e_in;
        self.e_out = e_out;
        self.record(t);
    }

    fn record(&mut self, t: f64) {
        let generated = self.generated();
        if generated > self.peak_generated {
            self.peak_generated = generated;
        }
        if self.divergent_at.is_none() && generated > self.threshold {
            self.divergent_at = Some(t);
        }
    }

    /// Energy absorbed by the link (J); negative when the link has produced energy.
    pub fn dissipated(&self) -> f64 {
        self.e_in - self.e_out
    }

    pub fn generated(&self) -> f64 {
        -self.dissipated()
    }

    pub fn divergent(&self) -> bool {
        self.divergent_at.is_some()
    }

    /// Time at which the threshold was first crossed.
    pub fn divergent_at(&self) -> Option<f64> {
        self.divergent_at
    }
}
