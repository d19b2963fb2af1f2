use alloc::collections::BTreeMap;

use super::transform::{on_missing_sample, Direction, WaveConfig, WaveSample};

/// Counters kept by a [`WaveReceiver`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReceiverStats {
    pub consumed: u64,
    /// Samples older than the last consumed one, discarded on arrival.
    pub stale: u64,
    /// Samples discarded because the playout buffer was full.
    pub overflow: u64,
    /// Ticks that had nothing to play and used a zero sample.
    pub missing: u64,
}

/// Per-direction playout buffer.
///
/// Each tick consumes at most one sample, in sequence order, so every transmitted sample is
/// played at most once. Samples older than the last consumed one are dropped, and a tick with
/// nothing to play substitutes a zero wave. Together these keep the channel passive under any
/// delay, jitter or loss pattern.
#[derive(Debug, Clone)]
pub struct WaveReceiver {
    cfg: WaveConfig,
    direction: Direction,
    depth: usize,
    pending: BTreeMap<u32, WaveSample>,
    last_seq: Option<u32>,
    started: bool,
    stats: ReceiverStats,
}

impl WaveReceiver {
    pub fn new(cfg: WaveConfig, direction: Direction, depth: usize) -> Self {
        Self {
            cfg,
            direction,
            depth: depth.max(1),
            pending: BTreeMap::new(),
            last_seq: None,
            started: false,
            stats: ReceiverStats::default(),
        }
    }

    pub fn stats(&self) -> ReceiverStats {
        self.stats
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn push(&mut self, sample: WaveSample) {
        if sample.values.len() != self.cfg.dof() || !sample.values.iter().all(|v| v.is_finite()) {
            self.stats.stale += 1;
            return;
        }
        if self.last_seq.is_some_and(|last| sample.seq <= last)
            || self.pending.contains_key(&sample.seq)
        {
            self.stats.stale += 1;
            return;
        }
        self.started = true;
        self.pending.insert(sample.seq, sample);
        while self.pending.len() > self.depth {
            self.pending.pop_first();
            self.stats.overflow += 1;
        }
    }

    /// Queues a redundant copy of an earlier sample. Copies that are already consumed or queued
    /// are ignored without counting as stale.
    pub fn push_redundant(&mut self, sample: WaveSample) {
        let seen = self.last_seq.is_some_and(|last| sample.seq <= last)
            || self.pending.contains_key(&sample.seq);
        if !seen {
            self.push(sample);
        }
    }

    /// Sample to play this tick.
    pub fn next_sample(&mut self) -> WaveSample {
        match self.pending.pop_first() {
            Some((seq, sample)) => {
                self.last_seq = Some(seq);
                self.stats.consumed += 1;
                sample
            }
            None => {
                if self.started {
                    self.stats.missing += 1;
                }
                on_missing_sample(&self.cfg, self.direction)
            }
        }
    }

    /// Forgets buffered samples, e.g. when the session re-engages after a fault.
    pub fn flush(&mut self) {
        if let Some((&seq, _)) = self.pending.last_key_value() {
            self.last_seq = Some(seq);
        }
        self.pending.clear();
    }
}
