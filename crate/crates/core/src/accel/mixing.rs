//! History window and the constrained least-squares mixing step.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{AccelError, AndersonConfig};
use crate::linalg::{dot, InnerProduct};
use crate::CoeffVector;

#[derive(Debug, Clone)]
struct Entry {
    u: CoeffVector,
    g: CoeffVector,
    w: CoeffVector,
    /// Riesz image of `w`, so inner products against it are plain dots.
    gw: Vec<f64>,
}

/// The latest `m_k + 1` iterates `u_j`, map values `G(u_j)` and residuals
/// `w_j = G(u_j) − u_j`, oldest first.
#[derive(Debug, Clone)]
pub struct AndersonHistory<'a> {
    depth: usize,
    ip: &'a InnerProduct,
    entries: VecDeque<Entry>,
}

impl<'a> AndersonHistory<'a> {
    pub fn new(depth: usize, ip: &'a InnerProduct) -> Self {
        Self {
            depth,
            ip,
            entries: VecDeque::with_capacity(depth + 1),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn inner_product(&self) -> &InnerProduct {
        self.ip
    }

    /// Appends `(u_k, G(u_k))`, dropping the oldest entry once the window
    /// holds `depth + 1` pairs. Returns `‖w_k‖`.
    pub fn push(&mut self, u: CoeffVector, g: CoeffVector) -> Result<f64, AccelError> {
        if u.len() != self.ip.dim() || g.len() != self.ip.dim() {
            return Err(AccelError::Linalg(crate::linalg::LinalgError::DimensionMismatch {
                expected: self.ip.dim(),
                found: if u.len() != self.ip.dim() { u.len() } else { g.len() },
            }));
        }
        let w = g.sub(&u);
        let gw = self.ip.apply(&w)?;
        let norm = dot(&w, &gw).max(0.0).sqrt();
        if self.entries.len() == self.depth + 1 {
            self.entries.pop_front();
        }
        self.entries.push_back(Entry { u, g, w, gw });
        Ok(norm)
    }

    /// Residual `w_j` by window position (0 is oldest).
    pub fn residual(&self, i: usize) -> &[f64] {
        &self.entries[i].w
    }

    pub fn iterate(&self, i: usize) -> &[f64] {
        &self.entries[i].u
    }

    pub fn map_value(&self, i: usize) -> &[f64] {
        &self.entries[i].g
    }
}

/// Solution of the mixing problem at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingResult {
    /// Coefficients on the window entries, oldest first; they sum to one.
    pub alphas: Vec<f64>,
    /// `objective / ‖w_k‖`, or 0 when `w_k = 0`.
    pub theta: f64,
    /// `max_l |Σ_{j≤l} α_j|` over partial sums that exclude the newest entry.
    pub eta_partial: f64,
    /// `‖Σ α_j w_j‖` at the optimum.
    pub objective: f64,
    /// `‖w_k‖`.
    pub residual_norm: f64,
    /// Difference columns kept after the conditioning check.
    pub depth_used: usize,
}

/// Exact minimizer of `‖Σ α_j w_j‖` subject to `Σ α_j = 1`.
///
/// Solved in the unconstrained form: minimize `‖w_k − Σ γ_i Δ_i‖` over
/// `γ ∈ R^{m_k}` with `Δ_i = w_{k−i+1} − w_{k−i}`, by modified Gram-Schmidt
/// in the history's inner product. Columns are ordered newest first, so
/// dropping the oldest difference just truncates the factorization; this
/// repeats while the squared condition estimate of `R` exceeds
/// `cond_threshold`.
pub fn solve_mixing(
    history: &AndersonHistory<'_>,
    cond_threshold: f64,
) -> Result<MixingResult, AccelError> {
    let n = history.len();
    if n == 0 {
        return Err(AccelError::EmptyHistory);
    }
    let mk = n - 1;
    let e = &history.entries;
    let newest = &e[mk];
    let residual_norm = dot(&newest.w, &newest.gw).max(0.0).sqrt();

    // Δ_i and its Riesz image, i = 1..m_k
    let diffs: Vec<(Vec<f64>, Vec<f64>)> = (1..=mk)
        .map(|i| {
            let (a, b) = (&e[n - i], &e[n - 1 - i]);
            (
                a.w.iter().zip(b.w.iter()).map(|(x, y)| x - y).collect(),
                a.gw.iter().zip(&b.gw).map(|(x, y)| x - y).collect(),
            )
        })
        .collect();

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(mk);
    let mut gq: Vec<Vec<f64>> = Vec::with_capacity(mk);
    let mut r = vec![vec![0.0; mk]; mk];
    let mut available = mk;
    for j in 0..mk {
        let (mut v, mut gv) = diffs[j].clone();
        for i in 0..j {
            let rij = dot(&q[i], &gv);
            r[i][j] = rij;
            for (vv, qq) in v.iter_mut().zip(&q[i]) {
                *vv -= rij * qq;
            }
            for (vv, qq) in gv.iter_mut().zip(&gq[i]) {
                *vv -= rij * qq;
            }
        }
        let rjj = dot(&v, &gv).max(0.0).sqrt();
        if !(rjj > 0.0 && rjj.is_finite()) {
            available = j;
            break;
        }
        r[j][j] = rjj;
        v.iter_mut().for_each(|x| *x /= rjj);
        gv.iter_mut().for_each(|x| *x /= rjj);
        q.push(v);
        gq.push(gv);
    }

    let mut p = available;
    while p > 0 && condition_squared(&r, p) > cond_threshold {
        p -= 1;
    }

    let c: Vec<f64> = (0..p).map(|i| dot(&q[i], &newest.gw)).collect();
    let mut gamma = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = c[i];
        for jj in i + 1..p {
            s -= r[i][jj] * gamma[jj];
        }
        gamma[i] = s / r[i][i];
    }

    let objective = if p == 0 {
        residual_norm
    } else {
        let mut res = newest.w.to_vec();
        let mut gres = newest.gw.clone();
        for (i, gi) in gamma.iter().enumerate() {
            for (x, d) in res.iter_mut().zip(&diffs[i].0) {
                *x -= gi * d;
            }
            for (x, d) in gres.iter_mut().zip(&diffs[i].1) {
                *x -= gi * d;
            }
        }
        dot(&res, &gres).max(0.0).sqrt()
    };

    // α_k = 1 − γ_1, α_{k−i} = γ_i − γ_{i+1}, α_{k−m} = γ_m; oldest first
    let gam = |i: usize| if i >= 1 && i <= p { gamma[i - 1] } else { 0.0 };
    let mut alphas = vec![0.0; n];
    alphas[mk] = 1.0 - gam(1);
    for i in 1..=mk {
        alphas[mk - i] = gam(i) - gam(i + 1);
    }

    let mut eta_partial: f64 = 0.0;
    let mut partial = 0.0;
    for a in &alphas[..mk] {
        partial += a;
        eta_partial = eta_partial.max(partial.abs());
    }

    let theta = if residual_norm == 0.0 {
        0.0
    } else {
        objective / residual_norm
    };
    Ok(MixingResult {
        alphas,
        theta,
        eta_partial,
        objective,
        residual_norm,
        depth_used: p,
    })
}

/// `(‖R‖_F ‖R⁻¹‖_F)²` for the leading `p × p` block of an upper triangular
/// `R`. Bounds the 2-norm condition of the difference Gram matrix from
/// above, within a factor `p²`.
fn condition_squared(r: &[Vec<f64>], p: usize) -> f64 {
    let mut inv = vec![vec![0.0; p]; p];
    for j in 0..p {
        inv[j][j] = 1.0 / r[j][j];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for l in i + 1..=j {
                s += r[i][l] * inv[l][j];
            }
            inv[i][j] = -s / r[i][i];
        }
    }
    let fro = |m: &dyn Fn(usize, usize) -> f64| {
        let mut s = 0.0;
        for i in 0..p {
            for j in i..p {
                s += m(i, j).powi(2);
            }
        }
        s
    };
    fro(&|i, j| r[i][j]) * fro(&|i, j| inv[i][j])
}

/// Mixes the window with `alphas`:
/// `u_{k+1} = β Σ α_j G(u_j) + (1 − β) Σ α_j u_j`.
pub fn mix(history: &AndersonHistory<'_>, alphas: &[f64], beta: f64) -> CoeffVector {
    let dim = history.ip.dim();
    let mut out = CoeffVector::zeros(dim);
    for (entry, &a) in history.entries.iter().zip(alphas) {
        if a != 0.0 {
            out.axpy(beta * a, &entry.g);
        }
    }
    if beta != 1.0 {
        for (entry, &a) in history.entries.iter().zip(alphas) {
            if a != 0.0 {
                out.axpy((1.0 - beta) * a, &entry.u);
            }
        }
    }
    out
}

/// One Anderson update from a history whose newest entry is
/// `(u_k, G(u_k))`.
pub fn anderson_step(
    history: &AndersonHistory<'_>,
    config: &AndersonConfig,
) -> Result<(CoeffVector, MixingResult), AccelError> {
    let mixing = solve_mixing(history, config.cond_threshold)?;
    let next = mix(history, &mixing.alphas, config.damping_beta);
    Ok((next, mixing))
}
