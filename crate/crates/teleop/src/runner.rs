use std::fmt;

use teleop_core::netsim::Link;
use teleop_core::session::{
    FaultEvent, MasterReport, MasterSide, MetricsBuilder, MetricsRecord, Session, SlaveReport,
    SlaveSide,
};

use crate::scenario::ScenarioConfig;
use crate::udp::{UdpEndpoints, UdpLink};

/// Normal completion.
pub const EXIT_OK: i32 = 0;
/// The runtime failed for a reason other than the scenario itself.
pub const EXIT_RUNTIME: i32 = 1;
/// The slave hit a fault it could not recover from.
pub const EXIT_UNRECOVERABLE: i32 = 2;
/// The configuration could not be loaded.
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<MetricsRecord>,
    pub fault_events: Vec<FaultEvent>,
    pub unrecoverable: bool,
    pub divergent: bool,
    pub divergent_at: Option<f64>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.unrecoverable {
            EXIT_UNRECOVERABLE
        } else {
            EXIT_OK
        }
    }

    pub fn summary(&self) -> Summary {
        let n = self.records.len().max(1) as f64;
        Summary {
            mean_error: self.records.iter().map(|r| r.tracking_error).sum::<f64>() / n,
            max_error: self.records.iter().map(|r| r.tracking_error).fold(0.0, f64::max),
            channel_energy: self.records.last().map_or(0.0, |r| r.channel_energy),
            faults: self.fault_events.len(),
            divergent: self.divergent,
        }
    }
}

/// Headline numbers of one run, as printed by `compare`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean_error: f64,
    pub max_error: f64,
    pub channel_energy: f64,
    pub faults: usize,
    pub divergent: bool,
}

/// Side-by-side table of two summaries.
pub struct Comparison<'a> {
    pub labels: [&'a str; 2],
    pub summaries: [Summary; 2],
}

impl fmt::Display for Comparison<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = &self.summaries;
        let w = self.labels.iter().map(|l| l.len()).max().unwrap_or(0).max(14);
        writeln!(f, "{:<22} {:>w$} {:>w$}", "", self.labels[0], self.labels[1])?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, x: String, y: String| {
            writeln!(f, "{name:<22} {x:>w$} {y:>w$}")
        };
        row(f, "mean tracking error m", format!("{:.6e}", a.mean_error), format!("{:.6e}", b.mean_error))?;
        row(f, "max tracking error m", format!("{:.6e}", a.max_error), format!("{:.6e}", b.max_error))?;
        row(f, "channel dissipated J", format!("{:.6e}", a.channel_energy), format!("{:.6e}", b.channel_energy))?;
        row(f, "faults", a.faults.to_string(), b.faults.to_string())?;
        row(f, "energy divergent", a.divergent.to_string(), b.divergent.to_string())
    }
}

/// Runs the scenario over simulated links.
pub fn run_simulated(cfg: &ScenarioConfig) -> teleop_core::Result<RunOutcome> {
    let mut session = Session::simulated(&cfg.session, cfg.forward.clone(), cfg.backward.clone())?;
    let records = session.run(cfg.duration)?;
    Ok(RunOutcome {
        records,
        fault_events: session.fault_events().to_vec(),
        unrecoverable: session.slave().unrecoverable(),
        divergent: session.observer().divergent(),
        divergent_at: session.observer().divergent_at(),
    })
}

#[derive(Debug, thiserror::Error)]
pub enum UdpRunError {
    #[error(transparent)]
    Core(#[from] teleop_core::Error),
    #[error("socket: {0}")]
    Io(#[from] std::io::Error),
    #[error("a side loop panicked")]
    Panicked,
}

/// Paces `step` at the control rate on the wall clock, one report per tick.
fn paced<L, R>(
    ticks: usize,
    tick: f64,
    link: &mut L,
    mut step: impl FnMut(f64, f64, &[teleop_core::netsim::Packet]) -> teleop_core::Result<(Vec<teleop_core::netsim::Packet>, R)>,
) -> teleop_core::Result<Vec<R>>
where
    L: Link,
{
    let start = std::time::Instant::now();
    let period = std::time::Duration::from_secs_f64(tick);
    let mut reports = Vec::with_capacity(ticks);
    for k in 0..ticks {
        let t = k as f64 * tick;
        let inbox = link.poll(t);
        let (out, report) = step(t, tick, &inbox)?;
        for p in out {
            // A refused datagram is indistinguishable from a lost one.
            let _ = link.send(p, t);
        }
        reports.push(report);
        let deadline = start + period * (k as u32 + 1);
        if let Some(wait) = deadline.checked_duration_since(std::time::Instant::now()) {
            std::thread::sleep(wait);
        }
    }
    Ok(reports)
}

/// Runs master and slave as two independent loops that talk only through UDP datagrams, then
/// joins their per-tick reports into metrics.
pub fn run_udp(cfg: &ScenarioConfig, endpoints: UdpEndpoints) -> Result<RunOutcome, UdpRunError> {
    let session = &cfg.session;
    let mut master = MasterSide::new(session)?;
    let mut slave = SlaveSide::new(session)?;
    let start = slave.end_effector()?.position;
    let mut master_link = UdpLink::bind(endpoints.backward, endpoints.forward)?;
    let mut slave_link = UdpLink::bind(endpoints.forward, endpoints.backward)?;
    let (ticks, tick) = (cfg.ticks(), session.tick);

    let (m, s) = std::thread::scope(|scope| {
        let m = scope.spawn(|| {
            paced(ticks, tick, &mut master_link, |t, dt, inbox| master.step(t, dt, inbox))
        });
        let s = scope.spawn(|| {
            paced(ticks, tick, &mut slave_link, |t, dt, inbox| slave.step(t, dt, inbox))
        });
        (m.join(), s.join())
    });
    let m: Vec<MasterReport> = m.map_err(|_| UdpRunError::Panicked)??;
    let s: Vec<SlaveReport> = s.map_err(|_| UdpRunError::Panicked)??;

    let mut metrics = MetricsBuilder::new(session, start);
    let records = m
        .iter()
        .zip(&s)
        .enumerate()
        .map(|(k, (m, s))| metrics.record(k as f64 * tick, tick, m, s))
        .collect();
    Ok(RunOutcome {
        records,
        fault_events: slave.fault_events().to_vec(),
        unrecoverable: slave.unrecoverable(),
        divergent: metrics.observer().divergent(),
        divergent_at: metrics.observer().divergent_at(),
    })
}
