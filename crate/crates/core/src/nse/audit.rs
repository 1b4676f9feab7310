//! Residual-contraction audits for depth-1 and depth-2 accelerated Picard.

use serde::{Deserialize, Serialize};

use crate::accel::theory::audit_row;
use crate::accel::{AccelError, AuditReport, SolveTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NseAuditParams {
    /// Estimated contraction ratio of the Picard map.
    pub kappa_hat: f64,
    /// Estimated trilinear bound constant.
    pub m_hat: f64,
    /// Bound on `|α|` of the newest coefficient; the largest recorded value
    /// when absent.
    pub alpha_bar: Option<f64>,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NseAuditReport {
    pub c0: f64,
    pub alpha_bar: f64,
    /// `‖w_k‖ ≤ κ ‖w_{k−1}‖ (θ + C₀ ‖w_{k−2}‖)` per step.
    pub residual_contraction: AuditReport,
    /// `‖G(u_{k−1}) − G(u_{k−2})‖ ≤ κ ‖e_{k−1}‖` per step.
    pub map_steps: AuditReport,
    /// `‖e_k‖ ≤ ‖w_{k−1}‖ / (1 − κ)` per step.
    pub steps_by_residual: AuditReport,
}

impl NseAuditReport {
    pub fn violated(&self) -> usize {
        self.residual_contraction.violated + self.map_steps.violated + self.steps_by_residual.violated
    }
}

/// Audits a depth-1 trace against the residual contraction bound
///
/// `‖w_k‖ ≤ κ ‖w_{k−1}‖ (θ + C₀ ‖w_{k−2}‖)`, `C₀ = M ᾱ / (ν (1 − κ)²)`,
///
/// and the two error-by-residual inequalities used to prove it. `θ` is the
/// gain of the mixing that produced `u_k`. Diagnostic only: `κ`, `M` are
/// estimates, so violations are reported rather than raised.
pub fn audit_nse_m1(trace: &SolveTrace, params: &NseAuditParams) -> Result<NseAuditReport, AccelError> {
    let recs = &trace.records;
    if recs.len() < 3 {
        return Err(AccelError::InsufficientTrace { needed: 3, found: recs.len() });
    }
    let kappa = params.kappa_hat;
    if !(0.0..1.0).contains(&kappa) {
        return Err(AccelError::InvalidArgument(format!("kappa_hat = {kappa} is not in [0, 1)")));
    }
    let alpha_bar = params.alpha_bar.unwrap_or_else(|| {
        recs.iter()
            .filter_map(|r| r.alphas.last())
            .fold(0.0, |m: f64, a| m.max(a.abs()))
    });
    let c0 = params.m_hat * alpha_bar / (params.nu * (1.0 - kappa).powi(2));

    let mut contraction = Vec::new();
    for k in 2..recs.len() {
        let rhs = kappa * recs[k - 1].residual_norm * (recs[k - 1].theta + c0 * recs[k - 2].residual_norm);
        contraction.push(audit_row(k, recs[k].residual_norm, rhs));
    }
    let mut map_steps = Vec::new();
    for k in 2..recs.len() {
        if let (Some(g), Some(e)) = (recs[k - 1].gtilde_step_norm, recs[k - 2].step_norm) {
            map_steps.push(audit_row(k, g, kappa * e));
        }
    }
    let mut by_residual = Vec::new();
    for k in 1..recs.len() {
        if let Some(e) = recs[k - 1].step_norm {
            by_residual.push(audit_row(k, e, recs[k - 1].residual_norm / (1.0 - kappa)));
        }
    }
    Ok(NseAuditReport {
        c0,
        alpha_bar,
        residual_contraction: AuditReport::from_rows(kappa, contraction),
        map_steps: AuditReport::from_rows(kappa, map_steps),
        steps_by_residual: AuditReport::from_rows(kappa, by_residual),
    })
}

/// First-order depth-2 check: once `‖w_{k−2}‖ ≤ onset · ‖w_0‖`, every later
/// ratio `‖w_{k+1}‖ / ‖w_k‖` stays below `κ θ + tolerance`, with `θ` the
/// gain of the mixing that produced `u_{k+1}`.
pub fn audit_nse_m2(
    trace: &SolveTrace,
    kappa_hat: f64,
    onset: f64,
    tolerance: f64,
) -> Result<AuditReport, AccelError> {
    let recs = &trace.records;
    if recs.len() < 2 {
        return Err(AccelError::InsufficientTrace { needed: 2, found: recs.len() });
    }
    let w0 = recs[0].residual_norm;
    let start = (2..recs.len()).find(|&k| recs[k - 2].residual_norm <= onset * w0);
    let mut rows = Vec::new();
    if let Some(start) = start {
        for k in start..recs.len() - 1 {
            let ratio = recs[k + 1].residual_norm / recs[k].residual_norm;
            rows.push(audit_row(k, ratio, kappa_hat * recs[k].theta + tolerance));
        }
    }
    Ok(AuditReport::from_rows(kappa_hat, rows))
}
