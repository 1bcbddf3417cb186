use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::format::{fmt_opt_sig6, fmt_sig6, to_stable_json};
use super::{KdeCurve, SummaryRow};
use crate::trials::TrialResult;
use crate::{Error, Result};

pub const SUMMARY_HEADER: [&str; 12] = [
    "robot",
    "eec",
    "initial_state",
    "optimizer",
    "runs",
    "converged",
    "convergence_pct",
    "best_settling_ms",
    "best_rise_ms",
    "best_overshoot_pct",
    "best_sse_deg",
    "eval_count_at_convergence",
];

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Pretty JSON, floats rounded to six significant digits.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = to_stable_json(value).map_err(|source| Error::Json { path: path.into(), source })?;
    write_text(path, &text)
}

pub fn write_results_json(path: &Path, results: &[TrialResult]) -> Result<()> {
    write_json(path, &results)
}

pub fn read_results_json(path: &Path) -> Result<Vec<TrialResult>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

fn csv_to_file(path: &Path, rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    rows(&mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    std::fs::File::create(path).and_then(|mut f| f.write_all(&bytes)).map_err(|e| Error::io(path, e))
}

/// Summary table; an empty slice yields a header-only file.
pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    csv_to_file(path, |w| {
        w.write_record(SUMMARY_HEADER)?;
        for r in rows {
            w.write_record([
                r.robot.to_string(),
                r.eec.to_string(),
                r.initial_state.to_string(),
                r.optimizer.to_string(),
                r.runs.to_string(),
                r.converged.to_string(),
                fmt_sig6(r.convergence_pct),
                fmt_opt_sig6(r.best_settling_ms),
                fmt_opt_sig6(r.best_rise_ms),
                fmt_opt_sig6(r.best_overshoot_pct),
                fmt_opt_sig6(r.best_sse_deg),
                r.eval_count_at_convergence.map(|n| n.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(())
    })
}

/// Long-format curve table: `series,x,density`.
pub fn write_curves_csv(path: &Path, curves: &[(&str, &KdeCurve)]) -> Result<()> {
    csv_to_file(path, |w| {
        w.write_record(["series", "x", "density"])?;
        for (label, c) in curves {
            for (x, y) in c.grid.iter().zip(&c.density) {
                w.write_record([label.to_string(), fmt_sig6(*x), fmt_sig6(*y)])?;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::summarize;
    use crate::report::tests::fake_result;

    #[test]
    fn empty_summary_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("summary.csv");
        write_summary_csv(&p, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), format!("{}\n", SUMMARY_HEADER.join(",")));
    }

    #[test]
    fn results_round_trip_and_stable_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let results: Vec<_> = (0..4).map(|s| fake_result(1, s, s % 2 == 0, 1800)).collect();
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        write_results_json(&a, &results).unwrap();
        write_results_json(&b, &results).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(read_results_json(&a).unwrap(), results);

        let s = dir.path().join("s.csv");
        write_summary_csv(&s, &summarize(&results)).unwrap();
        let text = std::fs::read_to_string(&s).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "ddrm,1,1,bo,4,2,50,1800,600,12,0.5,1");
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = write_text(Path::new("/nonexistent-dir/x.txt"), "x").unwrap_err();
        assert!(err.is_io());
        assert!(err.to_string().contains("/nonexistent-dir/x.txt"));
        assert!(read_results_json(Path::new("/nonexistent-dir/r.json")).unwrap_err().is_io());
    }
}
