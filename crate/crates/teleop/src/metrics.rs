//! Metrics CSV.
//!
//! One row per control tick, header
//! `t,err_pos,felt_fx,felt_fy,felt_fz,e_channel,mode,fault`:
//!
//! | column    | unit | meaning                                                   |
//! |-----------|------|-----------------------------------------------------------|
//! | t         | s    | end of the tick                                           |
//! | err_pos   | m    | slave end-effector distance from the mapped master target |
//! | felt_f*   | N    | force rendered on the operator's hand                     |
//! | e_channel | J    | energy absorbed by the link so far                        |
//! | mode      |      | `operational`, `fault` or `recovering`                    |
//! | fault     |      | fault kind while not operational, else empty              |
//!
//! Times are written with 6 decimals and all other numbers with 9.

use std::io::Write;

use teleop_core::session::MetricsRecord;

pub const HEADER: [&str; 8] = [
    "t", "err_pos", "felt_fx", "felt_fy", "felt_fz", "e_channel", "mode", "fault",
];

/// Fixed-point text without a sign on values that round to zero.
fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

pub fn write_csv<W: Write>(out: W, records: &[MetricsRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            fixed(r.t, 6),
            fixed(r.tracking_error, 9),
            fixed(r.felt_force.x, 9),
            fixed(r.felt_force.y, 9),
            fixed(r.felt_force.z, 9),
            fixed(r.channel_energy, 9),
            r.mode.as_str().to_string(),
            r.fault.map_or_else(String::new, |f| f.as_str().to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
