//! Convergence-theory checks for accelerated contractive maps.
//!
//! Notation: `e_k = u_k − u_{k−1}`, `w_k = G(u_k) − u_k`, `θ_k` the mixing
//! gain and `η` the budget on partial sums of the older coefficients.

use serde::{Deserialize, Serialize};

use super::{AccelError, SolveTrace};

/// Relative slack allowed before a recorded step counts as a violation;
/// covers rounding in norms that are equal in exact arithmetic.
pub const AUDIT_REL_TOL: f64 = 1e-10;

/// Largest gain `θ_k` that still guarantees `‖e_{k+1}‖ ≤ r^k ‖e_1‖` for a
/// depth-`m` iteration whose older coefficients have partial sums bounded
/// by `eta`.
///
/// Returns `HypothesisViolated` when `eta` is too large for any gain to
/// give the guarantee.
pub fn theta_threshold(r: f64, eta: f64, m: usize, k: usize) -> Result<f64, AccelError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(AccelError::InvalidArgument(format!("r = {r} is not in (0, 1)")));
    }
    if !(eta >= 0.0) {
        return Err(AccelError::InvalidArgument(format!("eta = {eta} is negative")));
    }
    if k == 0 {
        return Err(AccelError::InvalidArgument("k must be at least 1".into()));
    }
    if m == 0 {
        return Ok(1.0);
    }
    let rm = r.powi(m as i32);
    let bound = rm * (1.0 - r) / (1.0 - rm);
    if eta >= bound {
        return Err(AccelError::HypothesisViolated { eta, bound });
    }
    if k == 1 {
        if eta >= r {
            return Err(AccelError::HypothesisViolated { eta, bound: r });
        }
        return Ok(1.0 - eta / r);
    }
    let value = if k <= m {
        let rk = r.powi(k as i32);
        (rk - eta * (1.0 - rk) / (1.0 - r)) / (rk + eta * (r - rk) / (1.0 - r))
    } else {
        (rm - eta * (1.0 - rm) / (1.0 - r)) / (rm + eta * (1.0 - rm) / (1.0 - r))
    };
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub k: usize,
    #[serde(with = "crate::serde_float")]
    pub lhs: f64,
    #[serde(with = "crate::serde_float")]
    pub rhs: f64,
    /// `rhs − lhs`; negative on a violation.
    #[serde(with = "crate::serde_float")]
    pub slack: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    #[serde(with = "crate::serde_float")]
    pub r_hat: f64,
    pub rows: Vec<AuditRow>,
    pub satisfied: usize,
    pub violated: usize,
}

impl AuditReport {
    pub(crate) fn from_rows(r_hat: f64, rows: Vec<AuditRow>) -> Self {
        let violated = rows.iter().filter(|r| !r.satisfied).count();
        Self {
            r_hat,
            satisfied: rows.len() - violated,
            violated,
            rows,
        }
    }

    pub fn violated_steps(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| !r.satisfied).map(|r| r.k).collect()
    }
}

pub(crate) fn audit_row(k: usize, lhs: f64, rhs: f64) -> AuditRow {
    AuditRow {
        k,
        lhs,
        rhs,
        slack: rhs - lhs,
        satisfied: lhs <= rhs * (1.0 + AUDIT_REL_TOL),
    }
}

/// Checks every recorded step against the step-size recursion
///
/// `‖e_{k+1}‖ ≤ r θ_k (‖e_k‖ + η Σ_{i=k−m_{k−1}}^{k−1} ‖e_i‖) + η Σ_{j=k−m_k+1}^{k} ‖e_j‖`
///
/// with `m_k = min(k, m)` and `η` the running maximum of the recorded
/// partial-sum budgets. For `k ≤ m` and `k > m` this is exactly the pair of
/// bounds for accelerated contractions (both follow by collecting terms),
/// and for `m = 0` it reduces to `‖e_{k+1}‖ ≤ r ‖e_k‖`. The bound assumes
/// undamped mixing.
pub fn audit_recursion(trace: &SolveTrace, r_hat: f64) -> Result<AuditReport, AccelError> {
    let m = trace.config.depth_m;
    // e[j] = ‖u_j − u_{j−1}‖ = step_norm of record j−1
    let mut e = vec![f64::NAN];
    for rec in &trace.records {
        match rec.step_norm {
            Some(s) => e.push(s),
            None => break,
        }
    }
    let usable = e.len().saturating_sub(2);
    if usable < 1 {
        return Err(AccelError::InsufficientTrace { needed: 1, found: usable });
    }
    let mut rows = Vec::new();
    let mut eta: f64 = 0.0;
    for k in 1..e.len() - 1 {
        eta = eta.max(trace.records[k - 1].eta_partial);
        eta = eta.max(trace.records[k].eta_partial);
        let theta = trace.records[k].theta;
        let mk = k.min(m);
        let mk1 = (k - 1).min(m);
        let older: f64 = (k - mk1..k).map(|i| e[i]).sum();
        let mixed: f64 = (k + 1 - mk..=k).map(|j| e[j]).sum();
        let rhs = r_hat * theta * (e[k] + eta * older) + eta * mixed;
        rows.push(audit_row(k, e[k + 1], rhs));
    }
    Ok(AuditReport::from_rows(r_hat, rows))
}

/// Slack (`rhs − lhs`) of the four depth-2 step bounds, in order:
/// `|α_k| ‖e_k‖`, `|1−α_k| ‖e_k‖`, `|α_{k−2}| ‖e_{k−1}‖` and
/// `|1−α_{k−2}| ‖e_{k−1}‖`, each bounded by residual norms over `(1−r)`.
///
/// `alphas` are the coefficients `[α_{k−2}, α_{k−1}, α_k]` computed from
/// `w = [‖w_{k−2}‖, ‖w_{k−1}‖, ‖w_k‖]`.
pub fn depth_two_step_bounds(
    alphas: [f64; 3],
    w: [f64; 3],
    e_k: f64,
    e_km1: f64,
    r: f64,
) -> [f64; 4] {
    let [a2, _, a0] = alphas;
    let [w2, w1, w0] = w;
    let s = 1.0 / (1.0 - r);
    [
        s * ((1.0 - a2).abs() * w1 + a2.abs() * w2) - a0.abs() * e_k,
        s * ((1.0 - a0).abs() * w1 + (1.0 + a0.abs()) * w0) - (1.0 - a0).abs() * e_k,
        s * ((1.0 - a0).abs() * w1 + a0.abs() * w0) - a2.abs() * e_km1,
        s * ((1.0 - a2).abs() * w1 + (1.0 + a2.abs()) * w2) - (1.0 - a2).abs() * e_km1,
    ]
}
