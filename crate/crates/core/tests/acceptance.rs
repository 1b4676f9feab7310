//! End-to-end acceptance run on the full-size cavity benchmark.
//!
//! Runs sequentially so the expensive Re=1000 traces are shared between
//! the rate, gain and coefficient-sum checks. Prints one PASS/FAIL line per
//! criterion and fails at the end if any criterion failed.

use std::time::Instant;

use aanse::accel::{audit_recursion, theta_threshold, AndersonConfig, SolveTrace, TerminationStatus};
use aanse::fem2d::{build_cavity_mesh, DofMap, ManufacturedFlow};
use aanse::nse::{
    audit_nse_m1, cavity_problem, estimate_kappa, estimate_trilinear_bound, manufactured_problem,
    run_anderson_picard, run_newton, run_picard, NseAuditParams, PicardOperator,
};
use aanse::report::summarize;
use aanse::verify::{run_checks, VerifyLevel, VerifyOptions};

const N: usize = 64;
const TOL: f64 = 1e-8;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
}

fn cavity_runs(re: f64, depths: &[usize], max_iters: usize) -> (PicardOperator, Vec<SolveTrace>) {
    let op = PicardOperator::new(cavity_problem(N, re, 0.0).unwrap());
    let u0 = op.solve_stokes().unwrap();
    let traces = depths
        .iter()
        .map(|&m| {
            let cfg = AndersonConfig {
                tol_abs: TOL,
                max_iters,
                ..AndersonConfig::with_depth(m)
            };
            let mut t = run_anderson_picard(&op, u0.clone(), &cfg).unwrap();
            t.label = format!("re{re}_m{m}");
            t
        })
        .collect();
    (op, traces)
}

fn rate(t: &SolveTrace) -> f64 {
    summarize(t).unwrap().conv_rate_median.unwrap_or(f64::NAN)
}

fn theta_median(t: &SolveTrace) -> f64 {
    summarize(t).unwrap().theta_median.unwrap_or(f64::NAN)
}

fn benchmark_rates(re1000: &[SolveTrace]) -> (bool, String) {
    let (r0, r4) = (rate(&re1000[0]), rate(&re1000[4]));
    let converged = re1000[0].converged() && re1000[4].converged();
    let passed = converged && (0.48..=0.68).contains(&r0) && (0.33..=0.50).contains(&r4) && r4 < r0;
    (
        passed,
        format!(
            "m=0 rate {r0:.4} ({} its), m=4 rate {r4:.4} ({} its)",
            re1000[0].records.len(),
            re1000[4].records.len()
        ),
    )
}

fn high_reynolds() -> (bool, String, Vec<SolveTrace>) {
    let (op, traces) = cavity_runs(5000.0, &[0, 3, 4], 200);
    let u0 = op.solve_stokes().unwrap();
    let newton = run_newton(
        &op,
        u0,
        &AndersonConfig {
            tol_abs: TOL,
            max_iters: 200,
            ..AndersonConfig::default()
        },
    )
    .unwrap();
    let picard_fails = !traces[0].converged();
    let newton_fails = matches!(newton.status, TerminationStatus::Diverged | TerminationStatus::MaxIters);
    let accelerated = traces[1].converged() && traces[2].converged();
    let detail = format!(
        "m=0 {:?} after {}, Newton {:?} after {}, m=3 {:?} in {}, m=4 {:?} in {}",
        traces[0].status,
        traces[0].records.len(),
        newton.status,
        newton.records.len(),
        traces[1].status,
        traces[1].records.len(),
        traces[2].status,
        traces[2].records.len()
    );
    (picard_fails && newton_fails && accelerated, detail, traces)
}

fn gain_statistics(re1000: &[SolveTrace]) -> (bool, String) {
    let medians: Vec<f64> = re1000[1..].iter().map(theta_median).collect();
    let decreasing = medians.windows(2).all(|p| p[1] < p[0]);
    let max_theta = re1000
        .iter()
        .flat_map(|t| t.records.iter().map(|r| r.theta))
        .fold(f64::NEG_INFINITY, f64::max);
    let passed = decreasing && medians[0] >= 0.90 && max_theta <= 1.0 + 1e-12;
    (passed, format!("theta medians m=1..4 {medians:.4?}, max theta {max_theta:.15}"))
}

fn threshold_values() -> (bool, String) {
    let cases = [(1, 1, 8.0 / 9.0), (1, 2, 0.8), (1, 7, 0.8), (2, 3, 0.62), (2, 9, 0.62)];
    let mut worst: f64 = 0.0;
    for (m, k, want) in cases {
        match theta_threshold(0.9, 0.1, m, k) {
            Ok(v) => worst = worst.max((v - want).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    (worst <= 1e-12, format!("largest deviation {worst:.2e} over {} cases", cases.len()))
}

fn property_suite(checks: &[aanse::verify::CheckResult], benchmark: &[&SolveTrace]) -> (bool, String) {
    let wanted = [
        "mixing matches KKT oracle",
        "depth-1 closed form",
        "convection form is skew-symmetric",
        "depth 0 equals plain iteration",
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for name in wanted {
        let c = checks.iter().find(|c| c.name == name);
        passed &= c.is_some_and(|c| c.passed);
        parts.push(format!("{name}: {}", c.map_or("missing".into(), |c| c.detail.clone())));
    }
    let (steps, worst) = benchmark
        .iter()
        .flat_map(|t| t.records.iter())
        .fold((0usize, 0.0f64), |(n, w), r| {
            (n + 1, w.max((r.alphas.iter().sum::<f64>() - 1.0).abs()))
        });
    passed &= worst <= 1e-12;
    parts.push(format!("alpha sums within {worst:.2e} over {steps} benchmark steps"));
    (passed, parts.join("; "))
}

fn manufactured_orders(checks: &[aanse::verify::CheckResult]) -> (bool, String) {
    let mms: Vec<_> = checks.iter().filter(|c| c.name.starts_with("manufactured orders")).collect();
    let passed = mms.len() == 2 && mms.iter().all(|c| c.passed);
    let detail = mms.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ");
    (passed, detail)
}

fn small_data_audits() -> (bool, String) {
    let flow = ManufacturedFlow {
        amplitude: 150.0,
        nu: 0.1,
        convective: true,
    };
    let op = PicardOperator::new(manufactured_problem(16, flow, 0.0).unwrap());
    let u0 = op.solve_stokes().unwrap();
    let cfg = |m| AndersonConfig {
        tol_abs: 1e-10,
        ..AndersonConfig::with_depth(m)
    };
    let picard = run_picard(&op, u0.clone(), &cfg(0)).unwrap();
    let kappa = estimate_kappa(&op, 8, 7, Some(&picard)).unwrap().r_hat();
    let m_hat = estimate_trilinear_bound(op.discretization(), 64, 7);
    if !(kappa < 1.0) {
        return (false, format!("measured kappa {kappa:.4} is not below 1"));
    }
    let plain = audit_recursion(&picard, kappa).unwrap();
    let mut violations = plain.violated;
    let mut rows = plain.rows.len();
    let mut nse_m1 = usize::MAX;
    for m in 1..=3 {
        let t = run_anderson_picard(&op, u0.clone(), &cfg(m)).unwrap();
        let report = audit_recursion(&t, kappa).unwrap();
        violations += report.violated;
        rows += report.rows.len();
        if m == 1 {
            let params = NseAuditParams {
                kappa_hat: kappa,
                m_hat,
                alpha_bar: None,
                nu: op.nu(),
            };
            nse_m1 = audit_nse_m1(&t, &params).unwrap().violated();
        }
    }
    (
        violations == 0 && nse_m1 == 0,
        format!(
            "kappa {kappa:.4}, M {m_hat:.4}: recursion violations {violations} over {rows} steps (m=0..3), \
             depth-1 residual audit violations {nse_m1}"
        ),
    )
}

fn dof_count() -> (bool, String) {
    let total = DofMap::taylor_hood(&build_cavity_mesh(N).unwrap()).total_dofs();
    (total == 37_507, format!("{total} total dofs at n={N}"))
}

fn timed(name: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    let seconds = start.elapsed().as_secs_f64();
    let outcome = Outcome {
        name,
        passed,
        detail,
        seconds,
    };
    println!(
        "[{}] {} ({:.1}s): {}",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.name,
        outcome.seconds,
        outcome.detail
    );
    outcome
}

#[test]
fn acceptance_criteria() {
    let mut outcomes = Vec::new();

    let mut re1000 = Vec::new();
    outcomes.push(timed("Re=1000 median rates", || {
        re1000 = cavity_runs(1000.0, &[0, 1, 2, 3, 4], 200).1;
        benchmark_rates(&re1000)
    }));

    let mut re5000 = Vec::new();
    outcomes.push(timed("Re=5000 only acceleration converges", || {
        let (passed, detail, traces) = high_reynolds();
        re5000 = traces;
        (passed, detail)
    }));

    outcomes.push(timed("Re=1000 gain statistics", || gain_statistics(&re1000)));
    outcomes.push(timed("threshold analytic values", threshold_values));

    let mut checks = Vec::new();
    let benchmark: Vec<&SolveTrace> = re1000.iter().chain(&re5000).collect();
    outcomes.push(timed("property suite", || {
        checks = run_checks(&VerifyOptions {
            level: VerifyLevel::Full,
            ..VerifyOptions::default()
        });
        property_suite(&checks, &benchmark)
    }));
    outcomes.push(timed("manufactured convergence orders", || manufactured_orders(&checks)));
    outcomes.push(timed("small-data theory audits", small_data_audits));
    outcomes.push(timed("cavity dof count", dof_count));

    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
