//! Aggregation of trial results into convergence tables, settling-time
//! densities and their file exports.

mod export;
pub mod format;
mod kde;
mod svg;

pub use export::{
    read_results_json, write_curves_csv, write_json, write_results_json, write_summary_csv, write_text, SUMMARY_HEADER,
};
pub use kde::{kde, silverman_bandwidth, Bandwidth, KdeCurve, GRID_POINTS};
pub use svg::{render_kde_svg, KdeSeries};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::trials::{OptimizerKind, RobotKind, TrialResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub robot: RobotKind,
    pub eec: u32,
    pub initial_state: u32,
    pub optimizer: OptimizerKind,
    pub runs: usize,
    pub converged: usize,
    pub convergence_pct: f64,
    pub best_settling_ms: Option<f64>,
    pub best_rise_ms: Option<f64>,
    pub best_overshoot_pct: Option<f64>,
    pub best_sse_deg: Option<f64>,
    pub eval_count_at_convergence: Option<usize>,
}

type GroupKey = (RobotKind, u32, u32, OptimizerKind);

fn group_key(r: &TrialResult) -> GroupKey {
    (r.config.robot, r.config.eec.id, r.config.initial_state.id, r.config.optimizer)
}

/// Convergence read from the recorded history: the final evaluation
/// carries the converged flag.
fn converged_in_history(r: &TrialResult) -> bool {
    r.failure.is_none() && r.history.last().is_some_and(|e| e.converged)
}

/// One row per (robot, eec, initial state, optimizer), sorted by that key.
///
/// `best_*` come from the converged run with the lowest settling time
/// (ties: fewer evaluations, then lower seed); absent when none converged.
pub fn summarize(results: &[TrialResult]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<GroupKey, Vec<&TrialResult>> = BTreeMap::new();
    for r in results {
        groups.entry(group_key(r)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((robot, eec, initial_state, optimizer), runs)| {
            let converged: Vec<_> = runs.iter().filter(|r| converged_in_history(r)).collect();
            let best = converged.iter().map(|r| (r, r.history.last().expect("converged run has history"))).min_by(
                |(ra, a), (rb, b)| {
                    a.fitness
                        .total_cmp(&b.fitness)
                        .then(ra.history.len().cmp(&rb.history.len()))
                        .then(ra.config.seed.cmp(&rb.config.seed))
                },
            );
            SummaryRow {
                robot,
                eec,
                initial_state,
                optimizer,
                runs: runs.len(),
                converged: converged.len(),
                convergence_pct: converged.len() as f64 / runs.len() as f64 * 100.0,
                best_settling_ms: best.and_then(|(_, e)| e.metrics.settling_time_ms.map(|t| t as f64)),
                best_rise_ms: best.and_then(|(_, e)| e.metrics.rise_time_ms.map(|t| t as f64)),
                best_overshoot_pct: best.map(|(_, e)| e.metrics.overshoot_pct),
                best_sse_deg: best.map(|(_, e)| e.metrics.steady_state_error_deg),
                eval_count_at_convergence: best.map(|(r, _)| r.history.len()),
            }
        })
        .collect()
}

/// Unweighted mean of the rows' convergence percentages.
pub fn average_convergence_pct(rows: &[SummaryRow]) -> Option<f64> {
    if rows.is_empty() {
        return None;
    }
    Some(rows.iter().map(|r| r.convergence_pct).sum::<f64>() / rows.len() as f64)
}

/// Mean convergence percentage per optimizer across `rows`.
pub fn convergence_by_optimizer(rows: &[SummaryRow]) -> BTreeMap<OptimizerKind, f64> {
    let mut by: BTreeMap<OptimizerKind, Vec<SummaryRow>> = BTreeMap::new();
    for r in rows {
        by.entry(r.optimizer).or_default().push(r.clone());
    }
    by.into_iter().filter_map(|(k, rs)| average_convergence_pct(&rs).map(|p| (k, p))).collect()
}

/// Settling times of every accepted experiment in `results`, in
/// milliseconds.
pub fn accepted_settling_times<'a>(results: impl IntoIterator<Item = &'a TrialResult>) -> Vec<f64> {
    results
        .into_iter()
        .flat_map(|r| r.history.iter())
        .filter(|e| e.accepted)
        .filter_map(|e| e.metrics.settling_time_ms.map(|t| t as f64))
        .collect()
}
