//! Self-checks run by `aanse verify`: least-squares exactness, the
//! skew-symmetric convection form, depth-0 equivalence, the degree-of-freedom
//! count and manufactured-solution convergence orders.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::accel::{run_accelerated, solve_mixing, AffineMap, AndersonConfig, AndersonHistory, FixedPointMap};
use crate::fem2d::{
    assemble_trilinear_with, build_cavity_mesh, pressure_l2_error, velocity_h1_error,
    ConvectionForm, Discretization, DofMap, ManufacturedFlow,
};
use crate::linalg::{dot, InnerProduct};
use crate::nse::{manufactured_problem, random_smooth_field, run_picard, PicardOperator};
use crate::CoeffVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifyLevel {
    /// Manufactured-solution meshes n ∈ {4, 8, 16}.
    Quick,
    /// Manufactured-solution meshes n ∈ {8, 16, 32}.
    Full,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub level: VerifyLevel,
    pub seed: u64,
    /// Convection form under test; the fault-injected form must fail.
    pub convection: ConvectionForm,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            level: VerifyLevel::Quick,
            seed: 1,
            convection: ConvectionForm::Skew,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Solves the dense system `A x = b` by Gaussian elimination with partial
/// pivoting. Small sizes only.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Lagrange-multiplier solution of `min ‖Σ α_j w_j‖²` with `Σ α_j = 1`:
/// `[2WᵀW 1; 1ᵀ 0] [α; λ] = [0; 1]` in the Euclidean inner product.
pub fn kkt_mixing_oracle(ws: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = ws.len();
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = 2.0 * dot(&ws[i], &ws[j]);
        }
        a[i][n] = 1.0;
        a[n][i] = 1.0;
    }
    let mut b = vec![0.0; n + 1];
    b[n] = 1.0;
    let mut x = dense_solve(a, b)?;
    x.truncate(n);
    Some(x)
}

fn history_of<'a>(ip: &'a InnerProduct, ws: &[Vec<f64>]) -> AndersonHistory<'a> {
    let mut h = AndersonHistory::new(ws.len() - 1, ip);
    for w in ws {
        h.push(CoeffVector::zeros(w.len()), CoeffVector::from(w.clone()))
            .expect("dimensions match");
    }
    h
}

fn check_mixing_oracle(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ip = InnerProduct::euclidean(6);
    let mut worst: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    let mut dropped = 0;
    for _ in 0..500 {
        let m = rng.random_range(1..=4usize);
        let ws: Vec<Vec<f64>> = (0..=m)
            .map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mix = solve_mixing(&history_of(&ip, &ws), 1e10).expect("nonempty");
        if mix.depth_used < m {
            dropped += 1;
            continue;
        }
        let oracle = kkt_mixing_oracle(&ws).expect("nonsingular KKT system");
        let scale = oracle.iter().fold(1.0f64, |s, a| s.max(a.abs()));
        for (a, o) in mix.alphas.iter().zip(&oracle) {
            worst = worst.max((a - o).abs() / scale);
        }
        worst_sum = worst_sum.max((mix.alphas.iter().sum::<f64>() - 1.0).abs());
    }
    CheckResult {
        name: "mixing matches KKT oracle".into(),
        passed: worst <= 1e-10 && worst_sum <= 1e-12 && dropped == 0,
        detail: format!("max rel diff {worst:.2e}, max |Σα−1| {worst_sum:.2e}, dropped {dropped}"),
        seconds: 0.0,
    }
}

fn check_depth_one_closed_form(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let ip = InnerProduct::euclidean(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let ws: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let (older, newer) = (&ws[0], &ws[1]);
        let d: Vec<f64> = newer.iter().zip(older).map(|(a, b)| a - b).collect();
        let closed = dot(newer, &d) / dot(&d, &d);
        let mix = solve_mixing(&history_of(&ip, &ws), 1e10).expect("nonempty");
        worst = worst.max((mix.alphas[0] - closed).abs() / closed.abs().max(1e-300));
    }
    CheckResult {
        name: "depth-1 closed form".into(),
        passed: worst <= 1e-12,
        detail: format!("max rel diff {worst:.2e}"),
        seconds: 0.0,
    }
}

fn check_skew_symmetry(seed: u64, convection: ConvectionForm) -> CheckResult {
    let disc = Discretization::new(build_cavity_mesh(8).expect("valid n"));
    let ip = disc.velocity_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb5);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let w = random_smooth_field(&disc, 1 + i % 3, &mut rng);
        let v = random_smooth_field(&disc, 1 + (i + 1) % 3, &mut rng);
        let n = assemble_trilinear_with(&disc, &w, convection);
        let b = dot(&v, &n.mul_vec(&v).expect("sizes match"));
        let scale = ip.norm(&w).unwrap() * ip.norm(&v).unwrap().powi(2);
        worst = worst.max(b.abs() / scale);
    }
    CheckResult {
        name: "convection form is skew-symmetric".into(),
        passed: worst <= 1e-12,
        detail: format!("max |b*(w,v,v)| / scale = {worst:.2e} over 200 pairs"),
        seconds: 0.0,
    }
}

fn check_depth_zero_equivalence(seed: u64) -> CheckResult {
    let map = AffineMap::random_contraction(12, 0.8, seed);
    let cfg = AndersonConfig {
        tol_abs: 1e-12,
        record_timings: false,
        ..AndersonConfig::with_depth(0)
    };
    let trace = run_accelerated(&map, CoeffVector::zeros(12), &cfg).expect("valid config");
    let ip = map.inner_product();
    let mut u = CoeffVector::zeros(12);
    let mut same = true;
    for rec in &trace.records {
        let g = map.apply(&u).unwrap();
        let w = g.sub(&u);
        let norm = dot(&w, &ip.apply(&w).unwrap()).max(0.0).sqrt();
        same &= norm.to_bits() == rec.residual_norm.to_bits();
        u = g;
    }
    let sol = trace.solution.as_ref().map(|s| s.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    let bare = u.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    same &= sol.as_deref() == Some(bare.as_slice());
    CheckResult {
        name: "depth 0 equals plain iteration".into(),
        passed: same && trace.converged(),
        detail: format!("{} steps compared bit for bit", trace.records.len()),
        seconds: 0.0,
    }
}

fn check_dof_count() -> CheckResult {
    let d = DofMap::taylor_hood(&build_cavity_mesh(64).expect("valid n"));
    CheckResult {
        name: "Taylor-Hood dofs at n=64".into(),
        passed: d.total_dofs() == 37_507,
        detail: format!("{} dofs", d.total_dofs()),
        seconds: 0.0,
    }
}

/// Velocity `H¹` and pressure `L²` errors of the discrete Navier-Stokes
/// solution for a manufactured flow, solved by Picard iteration from the
/// Stokes state.
pub fn manufactured_errors(
    n: usize,
    flow: ManufacturedFlow,
    gamma_gd: f64,
    convection: ConvectionForm,
) -> Result<(f64, f64), crate::nse::NseError> {
    let problem = manufactured_problem(n, flow, gamma_gd)
        .expect("valid n")
        .with_convection(convection);
    let op = PicardOperator::new(problem);
    let u0 = op.solve_stokes()?;
    let cfg = AndersonConfig {
        tol_abs: 1e-11,
        max_iters: 60,
        ..AndersonConfig::default()
    };
    let trace = run_picard(&op, u0, &cfg)?;
    let sol = trace.solution.expect("at least one evaluation");
    let disc = op.discretization();
    Ok((
        velocity_h1_error(disc, &sol, |x, y| flow.velocity_gradient(x, y)),
        pressure_l2_error(disc, &sol, |x, y| flow.pressure(x, y)),
    ))
}

/// Observed orders `log2(e_h / e_{h/2})` between successive meshes.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|p| (p[0] / p[1]).log2()).collect()
}

fn check_mms(level: VerifyLevel, gamma: f64, convection: ConvectionForm) -> CheckResult {
    let meshes: &[usize] = match level {
        VerifyLevel::Quick => &[4, 8, 16],
        VerifyLevel::Full => &[8, 16, 32],
    };
    let flow = ManufacturedFlow {
        amplitude: 10.0,
        nu: 0.1,
        convective: true,
    };
    let mut eu = Vec::new();
    let mut ep = Vec::new();
    for &n in meshes {
        match manufactured_errors(n, flow, gamma, convection) {
            Ok((u, p)) => {
                eu.push(u);
                ep.push(p);
            }
            Err(e) => {
                return CheckResult {
                    name: format!("manufactured orders (gamma={gamma})"),
                    passed: false,
                    detail: e.to_string(),
                    seconds: 0.0,
                }
            }
        }
    }
    let ou = observed_orders(&eu);
    let op = observed_orders(&ep);
    let min_u = ou.iter().copied().fold(f64::INFINITY, f64::min);
    let min_p = op.iter().copied().fold(f64::INFINITY, f64::min);
    CheckResult {
        name: format!("manufactured orders (gamma={gamma})"),
        passed: min_u >= 1.8 && min_p >= 1.8,
        detail: format!("velocity H1 orders {ou:.2?}, pressure L2 orders {op:.2?}"),
        seconds: 0.0,
    }
}

/// Runs every check in order; the result list names each one.
pub fn run_checks(opts: &VerifyOptions) -> Vec<CheckResult> {
    type Check<'a> = Box<dyn Fn() -> CheckResult + 'a>;
    let checks: Vec<Check> = vec![
        Box::new(|| check_mixing_oracle(opts.seed)),
        Box::new(|| check_depth_one_closed_form(opts.seed)),
        Box::new(|| check_skew_symmetry(opts.seed, opts.convection)),
        Box::new(|| check_depth_zero_equivalence(opts.seed)),
        Box::new(check_dof_count),
        Box::new(|| check_mms(opts.level, 0.0, opts.convection)),
        Box::new(|| check_mms(opts.level, 0.1, opts.convection)),
    ];
    checks
        .into_iter()
        .map(|c| {
            let t = Instant::now();
            let mut r = c();
            r.seconds = t.elapsed().as_secs_f64();
            r
        })
        .collect()
}
