//! Median statistics of a run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::accel::{AndersonConfig, SolveTrace, TerminationStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub params: BTreeMap<String, f64>,
    pub config: AndersonConfig,
    pub status: TerminationStatus,
    /// Number of iteration records (map evaluations).
    pub iterations: usize,
    #[serde(with = "crate::serde_float::option")]
    pub theta_median: Option<f64>,
    /// Median of `‖w_k‖ / ‖w_{k−1}‖`.
    #[serde(with = "crate::serde_float::option")]
    pub conv_rate_median: Option<f64>,
    /// Median of `‖e_{k+1}‖ / ‖e_k‖`, the step-based reading of the rate.
    #[serde(with = "crate::serde_float::option")]
    pub step_rate_median: Option<f64>,
    /// Largest recorded residual ratio.
    #[serde(with = "crate::serde_float::option")]
    pub kappa_hat: Option<f64>,
    #[serde(with = "crate::serde_float")]
    pub eta_max: f64,
    /// `theta_median` times the median rate of the paired depth-0 run.
    #[serde(with = "crate::serde_float::option")]
    pub predicted_rate: Option<f64>,
    #[serde(with = "crate::serde_float::option")]
    pub final_residual: Option<f64>,
}

/// Lower median (the smaller middle element for even counts). Non-finite
/// entries are ignored; `None` when nothing is left.
pub fn lower_median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

pub fn summarize(trace: &SolveTrace) -> Result<RunSummary, ReportError> {
    summarize_with_reference(trace, None)
}

/// Summary with the paired depth-0 median rate used for `predicted_rate`.
pub fn summarize_with_reference(
    trace: &SolveTrace,
    kappa_reference: Option<f64>,
) -> Result<RunSummary, ReportError> {
    let recs = &trace.records;
    if recs.is_empty() {
        return Err(ReportError::EmptyTrace);
    }
    let theta_median = lower_median(recs.iter().skip(1).map(|r| r.theta))
        .or_else(|| lower_median(recs.iter().map(|r| r.theta)));
    let conv_rate_median = lower_median(recs.iter().filter_map(|r| r.step_ratio));
    let steps: Vec<f64> = recs.iter().filter_map(|r| r.step_norm).collect();
    let step_rate_median = lower_median(steps.windows(2).map(|p| p[1] / p[0]));
    let kappa_hat = recs
        .iter()
        .filter_map(|r| r.step_ratio)
        .filter(|v| v.is_finite())
        .reduce(f64::max);
    let eta_max = recs.iter().map(|r| r.eta_partial).fold(0.0, f64::max);
    let predicted_rate = match (theta_median, kappa_reference) {
        (Some(t), Some(k)) => Some(t * k),
        _ => None,
    };
    Ok(RunSummary {
        label: trace.label.clone(),
        params: trace.params.clone(),
        config: trace.config.clone(),
        status: trace.status,
        iterations: recs.len(),
        theta_median,
        conv_rate_median,
        step_rate_median,
        kappa_hat,
        eta_max,
        predicted_rate,
        final_residual: recs.last().map(|r| r.residual_norm),
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

/// Plain-text table, one row per run: depth, θ median, rate median,
/// predicted rate, iterations and status.
pub fn format_table(summaries: &[RunSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:>3} {:>9} {:>9} {:>9} {:>9} {:>6}  status",
        "run", "m", "theta_med", "rate_med", "predicted", "eta_max", "iters"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<28} {:>3} {:>9} {:>9} {:>9} {:>9.4} {:>6}  {:?}",
            s.label,
            s.config.depth_m,
            cell(s.theta_median),
            cell(s.conv_rate_median),
            cell(s.predicted_rate),
            s.eta_max,
            s.iterations,
            s.status
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::IterationRecord;

    pub(crate) fn record(k: usize, residual: f64, ratio: Option<f64>, theta: f64) -> IterationRecord {
        IterationRecord {
            k,
            residual_norm: residual,
            theta,
            alphas: vec![1.0],
            eta_partial: 0.0,
            depth_used: 0,
            step_ratio: ratio,
            step_norm: None,
            gtilde_step_norm: None,
            wall_ms: 0.0,
        }
    }

    fn trace(records: Vec<IterationRecord>) -> SolveTrace {
        SolveTrace {
            label: "t".into(),
            params: BTreeMap::new(),
            config: AndersonConfig::default(),
            status: TerminationStatus::Converged,
            records,
            failure: None,
            wall_ms: 0.0,
            solution: None,
        }
    }

    #[test]
    fn median_of_three_ratios() {
        let t = trace(vec![
            record(0, 1.0, None, 1.0),
            record(1, 0.5, Some(0.7), 0.9),
            record(2, 0.3, Some(0.5), 0.8),
            record(3, 0.18, Some(0.6), 0.7),
        ]);
        let s = summarize(&t).unwrap();
        assert_eq!(s.conv_rate_median, Some(0.6));
        assert_eq!(s.theta_median, Some(0.8));
        assert_eq!(s.kappa_hat, Some(0.7));
    }

    #[test]
    fn single_record_has_no_rate() {
        let s = summarize(&trace(vec![record(0, 1e-9, None, 1.0)])).unwrap();
        assert_eq!(s.conv_rate_median, None);
        assert_eq!(s.theta_median, Some(1.0));
        assert_eq!(s.iterations, 1);
    }

    #[test]
    fn empty_trace_is_an_error() {
        assert!(matches!(summarize(&trace(vec![])), Err(ReportError::EmptyTrace)));
    }

    #[test]
    fn lower_median_takes_smaller_middle() {
        assert_eq!(lower_median([4.0, 1.0, 3.0, 2.0]), Some(2.0));
        assert_eq!(lower_median([f64::NAN]), None);
    }

    #[test]
    fn predicted_rate_uses_reference() {
        let t = trace(vec![record(0, 1.0, None, 1.0), record(1, 0.5, Some(0.5), 0.5)]);
        let s = summarize_with_reference(&t, Some(0.6)).unwrap();
        assert_eq!(s.predicted_rate, Some(0.3));
    }
}
