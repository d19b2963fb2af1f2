use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::codec::Packet;
use super::{Link, LinkError};
use crate::error::{Error, Result};

/// Gamma-distributed delay component, `shape·scale` seconds on average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaJitter {
    pub shape: f64,
    /// Seconds.
    pub scale: f64,
}

impl GammaJitter {
    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }
}

/// Impairment parameters for one direction of a simulated link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Mean one-way delay (s), including the jitter component.
    pub mean_delay: f64,
    /// `None` delivers every packet exactly `mean_delay` after sending.
    pub jitter: Option<GammaJitter>,
    pub drop_prob: f64,
    pub seed: u64,
    /// Maximum packets in flight; sending beyond it is an overload error.
    pub capacity: usize,
}

impl ChannelConfig {
    pub const DEFAULT_CAPACITY: usize = 4096;

    /// Ideal link: fixed delay, no jitter, no loss.
    pub fn fixed(mean_delay: f64, seed: u64) -> Self {
        Self {
            mean_delay,
            jitter: None,
            drop_prob: 0.0,
            seed,
            capacity: Self::DEFAULT_CAPACITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.mean_delay >= 0.0) || !self.mean_delay.is_finite() {
            return bad("mean delay must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return bad("drop probability must lie in [0, 1]");
        }
        if self.capacity == 0 {
            return bad("channel capacity must be positive");
        }
        if let Some(j) = self.jitter {
            if !(j.shape > 0.0 && j.scale > 0.0 && j.shape.is_finite() && j.scale.is_finite()) {
                return bad("gamma jitter parameters must be > 0");
            }
            // The gamma part is shifted so the overall mean stays at mean_delay.
            if j.mean() > self.mean_delay * (1.0 + 1e-12) {
                return bad("jitter mean (shape*scale) exceeds the mean delay");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ChannelStats {
    pub sent: u64,
    pub dropped: u64,
    pub delivered: u64,
    pub overflowed: u64,
}

#[derive(Debug)]
struct InFlight {
    due: f64,
    order: u64,
    packet: Packet,
}

impl PartialEq for InFlight {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for InFlight {}
impl PartialOrd for InFlight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for InFlight {
    // Reversed so the max-heap pops the earliest delivery first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .due
            .total_cmp(&self.due)
            .then_with(|| other.order.cmp(&self.order))
    }
}

/// Seeded one-way channel with random drops and gamma-distributed delay.
#[derive(Debug)]
pub struct SimChannel {
    cfg: ChannelConfig,
    gamma: Option<Gamma<f64>>,
    base_delay: f64,
    rng: ChaCha8Rng,
    queue: BinaryHeap<InFlight>,
    order: u64,
    stats: ChannelStats,
}

impl SimChannel {
    pub fn new(cfg: ChannelConfig) -> Result<Self> {
        cfg.validate()?;
        let gamma = match cfg.jitter {
            Some(j) => Some(
                Gamma::new(j.shape, j.scale)
                    .map_err(|_| Error::InvalidConfig("bad gamma parameters".into()))?,
            ),
            None => None,
        };
        let base_delay = cfg.mean_delay - cfg.jitter.map_or(0.0, |j| j.mean());
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            base_delay: base_delay.max(0.0),
            gamma,
            cfg,
            queue: BinaryHeap::new(),
            order: 0,
            stats: ChannelStats::default(),
        })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    pub fn stats(&self) -> ChannelStats {
        self.stats
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }

    /// Offers a packet at time `now`. Dropped packets are silently discarded.
    pub fn send(&mut self, packet: Packet, now: f64) -> core::result::Result<(), LinkError> {
        self.stats.sent += 1;
        if self.cfg.drop_prob > 0.0 && self.rng.random_bool(self.cfg.drop_prob) {
            self.stats.dropped += 1;
            return Ok(());
        }
        if self.queue.len() >= self.cfg.capacity {
            self.stats.overflowed += 1;
            return Err(LinkError::Overflow(self.cfg.capacity));
        }
        let jitter = match &self.gamma {
            Some(g) => g.sample(&mut self.rng),
            None => 0.0,
        };
        self.queue.push(InFlight {
            due: now + self.base_delay + jitter,
            order: self.order,
            packet,
        });
        self.order += 1;
        Ok(())
    }

    /// Removes and returns every packet due at or before `now`, earliest first.
    pub fn poll(&mut self, now: f64) -> Vec<Packet> {
        self.poll_timed(now).into_iter().map(|(_, p)| p).collect()
    }

    /// Like [`SimChannel::poll`], with each packet's delivery time.
    pub fn poll_timed(&mut self, now: f64) -> Vec<(f64, Packet)> {
        let mut out = Vec::new();
        while self.queue.peek().is_some_and(|p| p.due <= now) {
            if let Some(p) = self.queue.pop() {
                out.push((p.due, p.packet));
            }
        }
        self.stats.delivered += out.len() as u64;
        out
    }
}

impl Link for SimChannel {
    fn send(&mut self, packet: Packet, now: f64) -> core::result::Result<(), LinkError> {
        SimChannel::send(self, packet, now)
    }

    fn poll(&mut self, now: f64) -> Vec<Packet> {
        SimChannel::poll(self, now)
    }
}
