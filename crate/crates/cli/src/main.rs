//! `aanse`: solve, sweep, verify and audit accelerated Picard runs.

mod config;
mod runner;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use aanse::accel::{audit_recursion, theta_threshold, AuditReport, SolveTrace, TerminationStatus};
use aanse::fem2d::{build_cavity_mesh, ConvectionForm, Discretization};
use aanse::nse::{audit_nse_m1, estimate_trilinear_bound, NseAuditParams};
use aanse::report::{emit_gnuplot, emit_json, format_table, load_json, summarize, RunSummary};
use aanse::verify::{run_checks, VerifyLevel, VerifyOptions};
use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use config::{ConfigArgs, ExperimentConfig, ProblemKind};
use runner::{Extras, Method, RunSpec};

#[derive(Debug, Parser)]
#[command(name = "aanse", version, about = "Anderson-accelerated Picard iteration for steady Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one (problem, Re, m) combination; `--newton` runs Newton instead.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        /// Write the final velocity and pressure as legacy VTK.
        #[arg(long)]
        export_vtk: Option<PathBuf>,
        /// Write the Stokes system matrix in MatrixMarket format.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// Run every Re × m combination plus a paired m=0 run per Re.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Runs executed in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run the self-check suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Flip the sign of the convection form; the skew check must then fail.
        #[arg(long)]
        fault_injection: bool,
    },
    /// Audit recorded traces against the convergence bounds.
    Audit {
        /// Trace JSON files written by `solve` or `sweep`.
        traces: Vec<PathBuf>,
        /// Contraction ratio; the largest recorded residual ratio when absent.
        #[arg(long)]
        r: Option<f64>,
        /// Coefficient budget for the gain thresholds; the recorded maximum when absent.
        #[arg(long)]
        eta: Option<f64>,
        /// Bound on the newest depth-1 coefficient.
        #[arg(long)]
        alpha_bar: Option<f64>,
        /// Trilinear bound constant; sampled on the trace's mesh when absent.
        #[arg(long)]
        m_hat: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Level {
    Quick,
    Full,
}

fn status_code(status: TerminationStatus) -> u8 {
    match status {
        TerminationStatus::Converged => 0,
        TerminationStatus::MaxIters => 2,
        TerminationStatus::Diverged => 3,
        TerminationStatus::OperatorFailure => 1,
    }
}

fn cmd_solve(args: &ConfigArgs, extras: Extras) -> Result<u8> {
    let cfg = ExperimentConfig::resolve(args)?;
    if cfg.reynolds.len() != 1 || (cfg.depths.len() != 1 && !cfg.newton) {
        bail!("solve takes one Reynolds number and one depth; use sweep for lists");
    }
    let spec = RunSpec {
        re: cfg.reynolds[0],
        method: if cfg.newton { Method::Newton } else { Method::Anderson(cfg.depths[0]) },
    };
    let trace = runner::run(&cfg, spec, &extras)?;
    let dir = cfg.output_root().join(&trace.label);
    let summary = runner::write_run(&dir, &cfg, &trace, None)?;
    print!("{}", format_table(&[summary]));
    if let Some(f) = &trace.failure {
        eprintln!("{}: {f}", trace.label);
    }
    println!("outputs in {}", dir.display());
    Ok(status_code(trace.status))
}

fn sweep_specs(cfg: &ExperimentConfig) -> Vec<RunSpec> {
    let mut depths = cfg.depths.clone();
    depths.push(0);
    depths.sort_unstable();
    depths.dedup();
    // the synthetic map has no Reynolds number
    let reynolds = match cfg.problem {
        ProblemKind::LinearSynthetic => &cfg.reynolds[..1],
        _ => &cfg.reynolds[..],
    };
    let mut specs = Vec::new();
    for &re in reynolds {
        specs.extend(depths.iter().map(|&m| RunSpec { re, method: Method::Anderson(m) }));
        if cfg.newton {
            specs.push(RunSpec { re, method: Method::Newton });
        }
    }
    specs
}

fn cmd_sweep(args: &ConfigArgs, jobs: usize) -> Result<u8> {
    let cfg = ExperimentConfig::resolve(args)?;
    let specs = sweep_specs(&cfg);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let results: Vec<Result<SolveTrace>> =
        pool.install(|| specs.par_iter().map(|&s| runner::run(&cfg, s, &Extras::default())).collect());

    let root = cfg.output_root();
    let mut reference: BTreeMap<u64, f64> = BTreeMap::new();
    for (spec, res) in specs.iter().zip(&results) {
        if let (Method::Anderson(0), Ok(t)) = (spec.method, res) {
            if let Some(rate) = summarize(t)?.conv_rate_median {
                reference.insert(spec.re.to_bits(), rate);
            }
        }
    }
    let mut summaries: Vec<RunSummary> = Vec::new();
    let mut traces = Vec::new();
    let mut errored = false;
    for (spec, res) in specs.iter().zip(results) {
        match res {
            Ok(t) => {
                let dir = root.join(&t.label);
                summaries.push(runner::write_run(&dir, &cfg, &t, reference.get(&spec.re.to_bits()).copied())?);
                traces.push(t);
            }
            Err(e) => {
                errored = true;
                eprintln!("{} failed: {e:#}", spec.label(&cfg));
            }
        }
    }
    let table = format_table(&summaries);
    print!("{table}");
    fs::create_dir_all(&root)?;
    fs::write(root.join("table.txt"), &table)?;
    fs::write(root.join("summary.json"), serde_json::to_string_pretty(&summaries)?)?;
    fs::write(root.join("config.json"), serde_json::to_string_pretty(&cfg)?)?;
    emit_json(&traces, &root.join("traces.json"))?;
    emit_gnuplot(&traces, &root.join("plots"))?;
    println!("outputs in {}", root.display());
    Ok(u8::from(errored))
}

fn cmd_verify(level: Level, seed: u64, fault_injection: bool) -> u8 {
    let opts = VerifyOptions {
        level: match level {
            Level::Quick => VerifyLevel::Quick,
            Level::Full => VerifyLevel::Full,
        },
        seed,
        convection: if fault_injection { ConvectionForm::FaultInjected } else { ConvectionForm::Skew },
    };
    let results = run_checks(&opts);
    for c in &results {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {} ({:.2}s): {}", c.name, c.seconds, c.detail);
    }
    match results.iter().find(|c| !c.passed) {
        Some(c) => {
            eprintln!("first failing check: {}", c.name);
            1
        }
        None => 0,
    }
}

fn print_threshold_table(r: f64, eta: f64) {
    println!("gain thresholds for r = {r}, eta = {eta}");
    println!("{:>3} {:>3} {:>12}", "m", "k", "threshold");
    for m in 1..=4usize {
        for k in 1..=m + 1 {
            match theta_threshold(r, eta, m, k) {
                Ok(v) => println!("{m:>3} {k:>3} {v:>12.6}"),
                Err(e) => println!("{m:>3} {k:>3} {e}"),
            }
        }
    }
}

fn print_report(title: &str, report: &AuditReport) {
    println!("{title}: {} satisfied, {} violated", report.satisfied, report.violated);
    for row in report.rows.iter().filter(|r| !r.satisfied) {
        println!("  violated at k={}: lhs {:.6e} > rhs {:.6e}", row.k, row.lhs, row.rhs);
    }
}

fn audit_trace(t: &SolveTrace, r: Option<f64>, eta: Option<f64>, alpha_bar: Option<f64>, m_hat: Option<f64>) {
    let summary = summarize(t).ok();
    let r_hat = r.or_else(|| summary.as_ref().and_then(|s| s.kappa_hat));
    let m = t.config.depth_m;
    println!("== {} (m={m}, {:?}, {} records)", t.label, t.status, t.records.len());
    let Some(r_hat) = r_hat else {
        println!("no contraction ratio available");
        return;
    };
    if !(r_hat > 0.0 && r_hat < 1.0) {
        println!("contraction ratio {r_hat:.4} is not in (0, 1); bounds do not apply");
        return;
    }
    let eta = eta.unwrap_or_else(|| summary.as_ref().map_or(0.0, |s| s.eta_max));
    match audit_recursion(t, r_hat) {
        Ok(report) => {
            println!("step recursion with r = {r_hat:.6}, eta = {eta:.6}");
            println!("{:>4} {:>13} {:>13} {:>13} {:>3} {:>9} {:>9}", "k", "lhs", "rhs", "slack", "ok", "theta", "thresh");
            for row in &report.rows {
                let theta = t.records[row.k].theta;
                let thresh = theta_threshold(r_hat, eta, m, row.k)
                    .map_or_else(|_| "-".to_string(), |v| format!("{v:.4}"));
                println!(
                    "{:>4} {:>13.6e} {:>13.6e} {:>13.6e} {:>3} {:>9.4} {:>9}",
                    row.k,
                    row.lhs,
                    row.rhs,
                    row.slack,
                    if row.satisfied { "y" } else { "n" },
                    theta,
                    thresh
                );
            }
            println!("{} satisfied, {} violated", report.satisfied, report.violated);
        }
        Err(e) => println!("step recursion: {e}"),
    }
    let fem_params = (t.params.get("n"), t.params.get("nu"));
    if let (1, (Some(&n), Some(&nu))) = (m, fem_params) {
        let m_hat = m_hat.unwrap_or_else(|| match build_cavity_mesh(n as usize) {
            Ok(mesh) => estimate_trilinear_bound(&Discretization::new(mesh), 64, 7),
            Err(_) => f64::NAN,
        });
        let params = NseAuditParams { kappa_hat: r_hat, m_hat, alpha_bar, nu };
        match audit_nse_m1(t, &params) {
            Ok(rep) => {
                println!("depth-1 residual audit: M = {m_hat:.4}, C0 = {:.4e}, alpha bar = {:.4}", rep.c0, rep.alpha_bar);
                print_report("  residual contraction", &rep.residual_contraction);
                print_report("  map steps", &rep.map_steps);
                print_report("  steps by residual", &rep.steps_by_residual);
            }
            Err(e) => println!("depth-1 residual audit: {e}"),
        }
    }
}

fn cmd_audit(files: &[PathBuf], r: Option<f64>, eta: Option<f64>, alpha_bar: Option<f64>, m_hat: Option<f64>) -> Result<u8> {
    let mut loaded = Vec::new();
    for f in files {
        loaded.push((f, load_json(f).map_err(|e| anyhow::anyhow!("{}: {e}", f.display()))?));
    }
    if let (Some(r), Some(eta)) = (r, eta) {
        print_threshold_table(r, eta);
    }
    for (_, traces) in &loaded {
        for t in traces {
            audit_trace(t, r, eta, alpha_bar, m_hat);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config, export_vtk, dump_matrix } => {
            cmd_solve(&config, Extras { export_vtk, dump_matrix })
        }
        Command::Sweep { config, jobs } => cmd_sweep(&config, jobs),
        Command::Verify { level, seed, fault_injection } => Ok(cmd_verify(level, seed, fault_injection)),
        Command::Audit { traces, r, eta, alpha_bar, m_hat } => cmd_audit(&traces, r, eta, alpha_bar, m_hat),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
