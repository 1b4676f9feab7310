//! The accelerated fixed-point loop and its recorded trace.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::mixing::{mix, solve_mixing, AndersonHistory};
use super::{AccelError, AndersonConfig, FixedPointMap};
use crate::CoeffVector;

/// Diagnostics of step `k`, taken at the iterate `u_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `‖w_k‖ = ‖G(u_k) − u_k‖`.
    #[serde(with = "crate::serde_float")]
    pub residual_norm: f64,
    #[serde(with = "crate::serde_float")]
    pub theta: f64,
    /// Mixing coefficients for `u_{k+1}`, oldest first.
    #[serde(with = "crate::serde_float::vec")]
    pub alphas: Vec<f64>,
    #[serde(with = "crate::serde_float")]
    pub eta_partial: f64,
    pub depth_used: usize,
    /// `‖w_k‖ / ‖w_{k−1}‖`; absent at `k = 0`.
    #[serde(with = "crate::serde_float::option")]
    pub step_ratio: Option<f64>,
    /// `‖u_{k+1} − u_k‖`; absent on the final record.
    #[serde(with = "crate::serde_float::option")]
    pub step_norm: Option<f64>,
    /// `‖G(u_k) − G(u_{k−1})‖`; absent at `k = 0`.
    #[serde(with = "crate::serde_float::option")]
    pub gtilde_step_norm: Option<f64>,
    /// Milliseconds spent on this step (zero when timings are off).
    #[serde(with = "crate::serde_float")]
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminationStatus {
    Converged,
    MaxIters,
    Diverged,
    /// The map itself failed; the trace holds the steps before the failure.
    OperatorFailure,
}

/// Everything recorded about one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub label: String,
    /// Problem parameters echoed for grouping in reports (e.g. `re`, `n`).
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub config: AndersonConfig,
    pub status: TerminationStatus,
    pub records: Vec<IterationRecord>,
    #[serde(default)]
    pub failure: Option<String>,
    #[serde(with = "crate::serde_float")]
    pub wall_ms: f64,
    /// `G(u_k)` at the last evaluated iterate. Not serialized.
    #[serde(skip)]
    pub solution: Option<CoeffVector>,
}

impl SolveTrace {
    pub fn converged(&self) -> bool {
        self.status == TerminationStatus::Converged
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.records.last().map(|r| r.residual_norm)
    }

    pub fn depth(&self) -> usize {
        self.config.depth_m
    }
}

/// Runs the depth-m accelerated iteration from `u0`.
///
/// Each step evaluates `G(u_k)`, measures `w_k`, checks termination, then
/// mixes. With `depth_m = 0` and `β = 1` the update is `u_{k+1} = G(u_k)`
/// bit for bit. On termination the trace's solution is `G(u_k)`.
pub fn run_accelerated<F: FixedPointMap + ?Sized>(
    op: &F,
    u0: CoeffVector,
    config: &AndersonConfig,
) -> Result<SolveTrace, AccelError> {
    config.validate()?;
    let ip = op.inner_product();
    let started = Instant::now();
    let elapsed_ms = |t: Instant| {
        if config.record_timings {
            t.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    };

    let mut trace = SolveTrace {
        label: String::new(),
        params: BTreeMap::new(),
        config: config.clone(),
        status: TerminationStatus::MaxIters,
        records: Vec::new(),
        failure: None,
        wall_ms: 0.0,
        solution: None,
    };
    let mut history = AndersonHistory::new(config.depth_m, ip);
    let mut u = u0;
    let mut first_norm = 0.0;
    let mut prev_g: Option<CoeffVector> = None;

    for k in 0.. {
        let step_start = Instant::now();
        let g = match op.apply(&u) {
            Ok(g) => g,
            Err(e) => {
                trace.status = TerminationStatus::OperatorFailure;
                trace.failure = Some(e.0);
                break;
            }
        };
        let gtilde_step_norm = match &prev_g {
            Some(pg) => Some(ip.norm(&g.sub(pg))?),
            None => None,
        };
        prev_g = Some(g.clone());

        let residual_norm = history.push(u.clone(), g)?;
        if k == 0 {
            first_norm = residual_norm;
        }
        let mixing = solve_mixing(&history, config.cond_threshold)?;
        let step_ratio = trace.records.last().map(|r: &IterationRecord| {
            residual_norm / r.residual_norm
        });
        trace.records.push(IterationRecord {
            k,
            residual_norm,
            theta: mixing.theta,
            alphas: mixing.alphas.clone(),
            eta_partial: mixing.eta_partial,
            depth_used: mixing.depth_used,
            step_ratio,
            step_norm: None,
            gtilde_step_norm,
            wall_ms: 0.0,
        });

        let status = if !residual_norm.is_finite() {
            Some(TerminationStatus::Diverged)
        } else if residual_norm <= config.tol_abs || residual_norm <= config.tol_rel * first_norm {
            Some(TerminationStatus::Converged)
        } else if residual_norm > config.divergence_factor * first_norm {
            Some(TerminationStatus::Diverged)
        } else if k >= config.max_iters {
            Some(TerminationStatus::MaxIters)
        } else {
            None
        };
        if let Some(s) = status {
            trace.status = s;
            trace.records.last_mut().unwrap().wall_ms = elapsed_ms(step_start);
            break;
        }

        let next = mix(&history, &mixing.alphas, config.damping_beta);
        let step_norm = ip.norm(&next.sub(&u))?;
        let rec = trace.records.last_mut().unwrap();
        rec.step_norm = Some(step_norm);
        rec.wall_ms = elapsed_ms(step_start);
        u = next;
    }
    trace.solution = prev_g;
    trace.wall_ms = elapsed_ms(started);
    Ok(trace)
}
