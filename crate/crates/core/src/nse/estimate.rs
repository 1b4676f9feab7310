//! Empirical contraction ratio of the Picard map and the trilinear bound.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::operator::PicardOperator;
use super::NseError;
use crate::accel::SolveTrace;
use crate::fem2d::{assemble_trilinear, Discretization};
use crate::linalg::dot;

/// Power-iteration refinements applied to each random perturbation.
const REFINE_STEPS: usize = 3;

/// Velocity field `Σ c_kl sin(kπx) sin(lπy)` per component with random
/// coefficients, `1 ≤ k, l ≤ modes`; zero on the boundary, zero pressure.
pub fn random_smooth_field(disc: &Discretization, modes: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let coef: Vec<[f64; 2]> = (0..modes * modes)
        .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    disc.interpolate(
        |x, y| {
            let mut u = [0.0; 2];
            for k in 0..modes {
                let sx = ((k + 1) as f64 * PI * x).sin();
                for l in 0..modes {
                    let s = sx * ((l + 1) as f64 * PI * y).sin();
                    let c = coef[k * modes + l];
                    u[0] += c[0] * s;
                    u[1] += c[1] * s;
                }
            }
            u
        },
        |_, _| 0.0,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    /// Largest `‖∇(G(w₁) − G(w₂))‖ / ‖∇(w₁ − w₂)‖` over sampled pairs.
    pub sampled: f64,
    /// Largest recorded residual ratio of a companion Picard trace.
    pub trace_step_ratio: Option<f64>,
    /// Largest `‖G(u_k) − G(u_{k−1})‖ / ‖u_k − u_{k−1}‖` along that trace.
    pub trace_pairwise: Option<f64>,
}

impl KappaEstimate {
    /// The largest of the available estimates.
    pub fn r_hat(&self) -> f64 {
        [self.trace_step_ratio, self.trace_pairwise]
            .into_iter()
            .flatten()
            .fold(self.sampled, f64::max)
    }
}

fn trace_estimates(trace: &SolveTrace) -> (Option<f64>, Option<f64>) {
    let ratio = trace
        .records
        .iter()
        .filter_map(|r| r.step_ratio)
        .filter(|v| v.is_finite())
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let pairwise = trace
        .records
        .windows(2)
        .filter_map(|p| match (p[1].gtilde_step_norm, p[0].step_norm) {
            (Some(g), Some(e)) if e > 0.0 => Some(g / e),
            _ => None,
        })
        .filter(|v| v.is_finite())
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    (ratio, pairwise)
}

/// Samples the contraction ratio of `G` around the Stokes solution.
///
/// Each sample perturbs the Stokes state by a random smooth field and then
/// refines the perturbation direction by a few power-iteration steps
/// (`δ ← G(w + δ) − G(w)`, rescaled), keeping the largest ratio seen. A
/// companion Picard trace, when given, contributes its own estimates.
pub fn estimate_kappa(
    op: &PicardOperator,
    samples: usize,
    seed: u64,
    picard_trace: Option<&SolveTrace>,
) -> Result<KappaEstimate, NseError> {
    let disc = op.discretization();
    let ip = disc.velocity_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = op.solve_stokes()?;
    let base_norm = op.h1_seminorm(&base);
    let scale = if base_norm > 0.0 { base_norm } else { 1.0 };

    let mut sampled: f64 = 0.0;
    for _ in 0..samples {
        let size = scale * rng.random_range(0.05..0.5);
        let mut delta = random_smooth_field(disc, 3, &mut rng);
        let g0 = op.apply_g(&base)?;
        for _ in 0..=REFINE_STEPS {
            let dn = ip.norm(&delta)?;
            if dn == 0.0 {
                break;
            }
            delta.iter_mut().for_each(|d| *d *= size / dn);
            let w1: Vec<f64> = base.iter().zip(&delta).map(|(b, d)| b + d).collect();
            let g1 = op.apply_g(&w1)?;
            let diff = g1.sub(&g0);
            let ratio = ip.norm(&diff)? / size;
            sampled = sampled.max(ratio);
            delta = diff.into_inner();
        }
    }
    let (trace_step_ratio, trace_pairwise) = match picard_trace {
        Some(t) => trace_estimates(t),
        None => (None, None),
    };
    Ok(KappaEstimate {
        sampled,
        trace_step_ratio,
        trace_pairwise,
    })
}

/// Largest sampled `|b*(u, v, w)| / (‖∇u‖ ‖∇v‖ ‖∇w‖)` over random smooth
/// triples: an empirical stand-in for the trilinear bound constant.
pub fn estimate_trilinear_bound(disc: &Discretization, samples: usize, seed: u64) -> f64 {
    let ip = disc.velocity_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for s in 0..samples {
        let modes = 1 + s % 4;
        let u = random_smooth_field(disc, modes, &mut rng);
        let v = random_smooth_field(disc, modes, &mut rng);
        let w = random_smooth_field(disc, 1 + (s + 1) % 4, &mut rng);
        let n = assemble_trilinear(disc, &u);
        let b = dot(&w, &n.mul_vec(&v).expect("sizes match"));
        let denom = ip.norm(&u).unwrap() * ip.norm(&v).unwrap() * ip.norm(&w).unwrap();
        if denom > 0.0 {
            best = best.max(b.abs() / denom);
        }
    }
    best
}
