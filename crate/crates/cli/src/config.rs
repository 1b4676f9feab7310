//! Experiment configuration: optional JSON file, overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "AANSE_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Lid-driven cavity, `ν = 1/Re`.
    Cavity2d,
    /// No-slip box forced by a manufactured flow of unit amplitude, `ν = 1/Re`.
    Mms,
    /// Random affine contraction on `R^n` with spectral norm `contraction`.
    LinearSynthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Cells per side (dimension for the synthetic problem).
    pub n: usize,
    pub reynolds: Vec<f64>,
    pub depths: Vec<usize>,
    pub beta: f64,
    pub gamma_gd: f64,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_iters: usize,
    /// Seeds the synthetic map and the sampled estimates only.
    pub seed: u64,
    /// Spectral norm of the synthetic map.
    pub contraction: f64,
    /// Also run Newton from the same initial guess.
    pub newton: bool,
    pub record_timings: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Cavity2d,
            n: 16,
            reynolds: vec![100.0],
            depths: vec![0],
            beta: 1.0,
            gamma_gd: 0.0,
            tol_abs: 1e-8,
            tol_rel: 0.0,
            max_iters: 100,
            seed: 1,
            contraction: 0.9,
            newton: false,
            record_timings: true,
            output_dir: None,
        }
    }
}

/// Flags shared by `solve` and `sweep`; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON experiment config; flags take precedence over its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub problem: Option<ProblemKind>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Reynolds numbers, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub re: Option<Vec<f64>>,
    /// Anderson depths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_gd: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol_abs: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol_rel: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub contraction: Option<f64>,
    #[arg(long)]
    pub newton: bool,
    /// Record zero wall times so identical configs give identical bytes.
    #[arg(long)]
    pub no_timings: bool,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// File (or defaults), then flags, then validation.
    pub fn resolve(args: &ConfigArgs) -> Result<Self> {
        let mut c = match &args.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        macro_rules! take {
            ($($field:ident <- $flag:ident),*) => {
                $(if let Some(v) = args.$flag.clone() { c.$field = v; })*
            };
        }
        take!(problem <- problem, n <- n, reynolds <- re, depths <- m, beta <- beta,
              gamma_gd <- gamma_gd, tol_abs <- tol_abs, tol_rel <- tol_rel,
              max_iters <- max_iters, seed <- seed, contraction <- contraction);
        if args.output_dir.is_some() {
            c.output_dir = args.output_dir.clone();
        }
        c.newton |= args.newton;
        c.record_timings &= !args.no_timings;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            bail!("n must be at least 2, got {}", self.n);
        }
        if self.reynolds.is_empty() || self.depths.is_empty() {
            bail!("the Reynolds and depth lists must be nonempty");
        }
        if let Some(re) = self.reynolds.iter().find(|re| !(**re > 0.0 && re.is_finite())) {
            bail!("Reynolds numbers must be positive and finite, got {re}");
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            bail!("beta must lie in (0, 1], got {}", self.beta);
        }
        if !(self.gamma_gd >= 0.0) {
            bail!("gamma-gd must be nonnegative, got {}", self.gamma_gd);
        }
        if !(self.tol_abs > 0.0) || !(self.tol_rel >= 0.0) {
            bail!("tol-abs must be positive and tol-rel nonnegative");
        }
        if self.max_iters == 0 {
            bail!("max-iters must be at least 1");
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            bail!("contraction must lie in (0, 1), got {}", self.contraction);
        }
        Ok(())
    }

    /// Flag or file value, then `AANSE_OUTPUT_DIR`, then `aanse-out`.
    pub fn output_root(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("aanse-out"))
    }
}
