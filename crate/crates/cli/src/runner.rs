//! One (problem, Re, method) run and the files it leaves behind.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use aanse::accel::{run_accelerated, AffineMap, AndersonConfig, SolveTrace};
use aanse::fem2d::{velocity_h1_error, write_vtk, ManufacturedFlow};
use aanse::nse::{cavity_problem, manufactured_problem, run_anderson_picard, run_newton, PicardOperator};
use aanse::report::{emit_csv, emit_json, summarize_with_reference, RunSummary};
use aanse::CoeffVector;
use anyhow::{bail, Context, Result};

use crate::config::{ExperimentConfig, ProblemKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Anderson(usize),
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub re: f64,
    pub method: Method,
}

impl RunSpec {
    pub fn label(&self, cfg: &ExperimentConfig) -> String {
        let prefix = match cfg.problem {
            ProblemKind::Cavity2d => format!("cavity2d_re{}", self.re),
            ProblemKind::Mms => format!("mms_re{}", self.re),
            ProblemKind::LinearSynthetic => format!("synthetic_r{}", cfg.contraction),
        };
        match self.method {
            Method::Anderson(m) => format!("{prefix}_m{m}"),
            Method::Newton => format!("{prefix}_newton"),
        }
    }
}

/// Optional debugging outputs of `solve`.
#[derive(Debug, Clone, Default)]
pub struct Extras {
    pub export_vtk: Option<PathBuf>,
    pub dump_matrix: Option<PathBuf>,
}

fn anderson_config(cfg: &ExperimentConfig, depth: usize) -> AndersonConfig {
    AndersonConfig {
        depth_m: depth,
        damping_beta: cfg.beta,
        max_iters: cfg.max_iters,
        tol_abs: cfg.tol_abs,
        tol_rel: cfg.tol_rel,
        record_timings: cfg.record_timings,
        ..AndersonConfig::default()
    }
}

fn run_fem(cfg: &ExperimentConfig, spec: RunSpec, extras: &Extras) -> Result<SolveTrace> {
    let flow = ManufacturedFlow {
        amplitude: 1.0,
        nu: 1.0 / spec.re,
        convective: true,
    };
    let problem = match cfg.problem {
        ProblemKind::Cavity2d => cavity_problem(cfg.n, spec.re, cfg.gamma_gd)?,
        _ => manufactured_problem(cfg.n, flow, cfg.gamma_gd)?,
    };
    if let Some(path) = &extras.dump_matrix {
        let (a, _) = problem.assemble_stokes_system();
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        a.write_matrix_market(BufWriter::new(file))?;
    }
    let op = PicardOperator::new(problem);
    let u0 = op.solve_stokes()?;
    let mut trace = match spec.method {
        Method::Anderson(m) => run_anderson_picard(&op, u0, &anderson_config(cfg, m))?,
        Method::Newton => run_newton(&op, u0, &anderson_config(cfg, 0))?,
    };
    trace.params.insert("n".into(), cfg.n as f64);
    trace.params.insert("nu".into(), op.nu());
    trace.params.insert("gamma_gd".into(), cfg.gamma_gd);
    if let Some(sol) = &trace.solution {
        if cfg.problem == ProblemKind::Mms {
            let err = velocity_h1_error(op.discretization(), sol, |x, y| flow.velocity_gradient(x, y));
            trace.params.insert("velocity_h1_error".into(), err);
        }
        if let Some(path) = &extras.export_vtk {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_vtk(op.discretization(), sol, BufWriter::new(file))?;
        }
    }
    Ok(trace)
}

fn run_synthetic(cfg: &ExperimentConfig, spec: RunSpec, extras: &Extras) -> Result<SolveTrace> {
    let depth = match spec.method {
        Method::Anderson(m) => m,
        Method::Newton => bail!("Newton is not defined for the linear-synthetic problem"),
    };
    if extras.export_vtk.is_some() || extras.dump_matrix.is_some() {
        bail!("--export-vtk and --dump-matrix need a finite element problem");
    }
    let map = AffineMap::random_contraction(cfg.n, cfg.contraction, cfg.seed);
    let mut trace = run_accelerated(&map, CoeffVector::zeros(cfg.n), &anderson_config(cfg, depth))?;
    trace.params.insert("n".into(), cfg.n as f64);
    trace.params.insert("r".into(), cfg.contraction);
    Ok(trace)
}

/// Runs one combination; the trace is labelled and carries its parameters.
pub fn run(cfg: &ExperimentConfig, spec: RunSpec, extras: &Extras) -> Result<SolveTrace> {
    let mut trace = match cfg.problem {
        ProblemKind::LinearSynthetic => run_synthetic(cfg, spec, extras)?,
        _ => {
            let mut t = run_fem(cfg, spec, extras)?;
            t.params.insert("re".into(), spec.re);
            t
        }
    };
    trace.label = spec.label(cfg);
    Ok(trace)
}

/// Writes `trace.json`, the CSV series, `summary.json` and the resolved
/// `config.json` into `dir`.
pub fn write_run(
    dir: &Path,
    cfg: &ExperimentConfig,
    trace: &SolveTrace,
    reference_rate: Option<f64>,
) -> Result<RunSummary> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    emit_json(std::slice::from_ref(trace), &dir.join("trace.json"))?;
    emit_csv(std::slice::from_ref(trace), dir)?;
    let summary = summarize_with_reference(trace, reference_rate)?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(cfg)?)?;
    Ok(summary)
}
