use std::io::Write;
use std::path::Path;

use super::TrialResult;
use crate::report::format::{fmt_opt_sig6, fmt_sig6};
use crate::{Error, Result};

pub const TRIAL_LOG_HEADER: [&str; 10] = [
    "eval_index",
    "kp",
    "ki",
    "kd",
    "rise_time_ms",
    "overshoot_pct",
    "settling_time_ms",
    "sse_deg",
    "accepted",
    "fitness",
];

/// One row per evaluation; absent metrics are empty fields.
pub fn write_trial_log<W: Write>(out: W, result: &TrialResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_LOG_HEADER)?;
    for e in &result.history {
        w.write_record([
            e.eval_index.to_string(),
            fmt_sig6(e.gains.kp),
            fmt_sig6(e.gains.ki),
            fmt_sig6(e.gains.kd),
            fmt_opt_sig6(e.metrics.rise_time_ms.map(|t| t as f64)),
            fmt_sig6(e.metrics.overshoot_pct),
            fmt_opt_sig6(e.metrics.settling_time_ms.map(|t| t as f64)),
            fmt_sig6(e.metrics.steady_state_error_deg),
            e.accepted.to_string(),
            fmt_sig6(e.fitness),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<trial log>", e))?;
    Ok(())
}

pub fn write_trial_log_file(path: &Path, result: &TrialResult) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trial_log(std::io::BufWriter::new(file), result)
}
