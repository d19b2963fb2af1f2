use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use teleop::runner::{Comparison, RunOutcome, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};
use teleop::selftest::{self, SelftestOptions};
use teleop::udp::UdpEndpoints;
use teleop::{metrics, run_simulated, run_udp, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "teleop", version, about = "Bilateral teleoperation simulator")]
struct Cli {
    /// Seed for the forward link; the returning link uses SEED+1. Defaults to the scenario's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Metrics CSV path for `run`, overriding the scenario's `output`.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Run master and slave as separate loops over UDP sockets. Takes the slave and master
    /// listening addresses as FORWARD,BACKWARD host:port pairs.
    #[arg(
        long,
        global = true,
        num_args = 0..=1,
        value_name = "FWD,BWD",
        default_missing_value = "127.0.0.1:47474,127.0.0.1:47475"
    )]
    udp: Option<UdpEndpoints>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its metrics CSV.
    Run { config: PathBuf },
    /// Run two scenarios and print their summaries side by side.
    Compare { a: PathBuf, b: PathBuf },
    /// Run the built-in oracle suites.
    Selftest {
        /// Random samples per suite.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Flip a bit in the golden packets (the codec suite must then fail).
        #[arg(long)]
        perturb_golden: bool,
        /// Relative singular-value cutoff for the nullspace projector.
        #[arg(long)]
        svd_cutoff: Option<f64>,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, ExitCode> {
    match ScenarioConfig::load(path) {
        Ok(cfg) => Ok(match seed {
            Some(s) => cfg.with_seed(s),
            None => cfg,
        }),
        Err(e) => {
            eprintln!("config error: {e}");
            Err(ExitCode::from(EXIT_CONFIG as u8))
        }
    }
}

fn execute(cfg: &ScenarioConfig, udp: Option<UdpEndpoints>) -> Result<RunOutcome, ExitCode> {
    let outcome = match udp {
        Some(ep) => run_udp(cfg, ep).map_err(|e| e.to_string()),
        None => run_simulated(cfg).map_err(|e| e.to_string()),
    };
    let outcome = outcome.map_err(|e| {
        eprintln!("run failed: {e}");
        ExitCode::from(EXIT_RUNTIME as u8)
    })?;
    for ev in &outcome.fault_events {
        let joint = ev.joint.map_or_else(|| "-".to_string(), |j| j.to_string());
        eprintln!("fault t={:.6} kind={} joint={joint}", ev.t, ev.kind);
    }
    if outcome.unrecoverable {
        eprintln!("unrecoverable: recovery timed out");
    }
    Ok(outcome)
}

fn run(cli: &Cli, config: &Path) -> Result<ExitCode, ExitCode> {
    let cfg = load(config, cli.seed)?;
    let outcome = execute(&cfg, cli.udp)?;
    let path = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| {
            let stem = config.file_stem().unwrap_or_default();
            PathBuf::from(stem).with_extension("csv")
        });
    let written = File::create(&path)
        .map_err(csv::Error::from)
        .and_then(|f| metrics::write_csv(BufWriter::new(f), &outcome.records));
    if let Err(e) = written {
        eprintln!("cannot write {}: {e}", path.display());
        return Err(ExitCode::from(EXIT_RUNTIME as u8));
    }
    let s = outcome.summary();
    println!(
        "{} rows -> {}; mean error {:.3e} m, faults {}, channel dissipated {:.3e} J{}",
        outcome.records.len(),
        path.display(),
        s.mean_error,
        s.faults,
        s.channel_energy,
        if s.divergent { ", energy divergent" } else { "" },
    );
    Ok(ExitCode::from(outcome.exit_code() as u8))
}

fn compare(cli: &Cli, a: &Path, b: &Path) -> Result<ExitCode, ExitCode> {
    let (ca, cb) = (load(a, cli.seed)?, load(b, cli.seed)?);
    let (ra, rb) = (execute(&ca, cli.udp)?, execute(&cb, cli.udp)?);
    let label = |p: &Path| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let (la, lb) = (label(a), label(b));
    print!(
        "{}",
        Comparison {
            labels: [&la, &lb],
            summaries: [ra.summary(), rb.summary()],
        }
    );
    Ok(ExitCode::from(EXIT_OK as u8))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::Compare { a, b } => compare(&cli, a, b),
        Command::Selftest {
            samples,
            perturb_golden,
            svd_cutoff,
        } => {
            let mut opts = SelftestOptions {
                samples: *samples,
                perturb_golden: *perturb_golden,
                ..Default::default()
            };
            if let Some(c) = svd_cutoff {
                opts.pinv.cutoff = *c;
            }
            let report = selftest::run(&opts);
            print!("{report}");
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    };
    result.unwrap_or_else(|code| code)
}
