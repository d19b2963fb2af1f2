use super::transform::WaveSample;

/// Wave energy bookkeeping for one port, or for a whole channel when both ports feed the same
/// ledger.
///
/// Every sample sent into the channel adds `‖w‖²·dt/2` to `e_in` and every sample taken out
/// adds to `e_out`. For a passive channel the difference never goes negative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub e_in: f64,
    pub e_out: f64,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Energy the channel has absorbed (stored in flight or dissipated).
    pub fn dissipated(&self) -> f64 {
        self.e_in - self.e_out
    }

    pub fn update(self, sent: &WaveSample, received: &WaveSample, dt: f64) -> Self {
        energy_update(self, sent, received, dt)
    }
}

/// Accounts one tick at a port that sent `sent` and consumed `received`.
pub fn energy_update(
    ledger: EnergyLedger,
    sent: &WaveSample,
    received: &WaveSample,
    dt: f64,
) -> EnergyLedger {
    if !(dt > 0.0) {
        return ledger;
    }
    EnergyLedger {
        e_in: ledger.e_in + sent.power() * dt,
        e_out: ledger.e_out + received.power() * dt,
    }
}
