//! File output: versioned JSON, per-trace CSV series and gnuplot inputs.
//!
//! Reals are written as shortest round-trip decimals, so every file reads
//! back to the same bits. Non-finite values appear as `NaN`, `inf`, `-inf`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::accel::SolveTrace;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub schema: u32,
    pub traces: Vec<SolveTrace>,
}

pub fn emit_json(traces: &[SolveTrace], path: &Path) -> Result<(), ReportError> {
    let doc = TraceFile {
        schema: SCHEMA_VERSION,
        traces: traces.to_vec(),
    };
    let mut out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load_json(path: &Path) -> Result<Vec<SolveTrace>, ReportError> {
    let text = fs::read_to_string(path)?;
    let doc: TraceFile = serde_json::from_str(&text)?;
    if doc.schema != SCHEMA_VERSION {
        return Err(ReportError::Parse(format!(
            "unsupported schema {} (expected {SCHEMA_VERSION})",
            doc.schema
        )));
    }
    Ok(doc.traces)
}

/// Round-trip decimal; exponent form outside a readable range.
fn fmt_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "trace".into()
    } else {
        s
    }
}

fn series_name(i: usize, trace: &SolveTrace) -> String {
    format!("{i:03}_{}", slug(&trace.label))
}

pub const CSV_HEADER: &str = "k,residual_norm,step_ratio,theta,eta_partial,wall_ms";
const INDEX_HEADER: &str = "file,label,depth_m,status,iterations";

/// One CSV series per trace plus `series_index.csv` listing them; the
/// index is written even for an empty list. Returns the series paths.
pub fn emit_csv(traces: &[SolveTrace], dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir)?;
    let mut index = BufWriter::new(fs::File::create(dir.join("series_index.csv"))?);
    writeln!(index, "{INDEX_HEADER}")?;
    let mut paths = Vec::with_capacity(traces.len());
    for (i, t) in traces.iter().enumerate() {
        let name = format!("{}.csv", series_name(i, t));
        let path = dir.join(&name);
        let mut out = BufWriter::new(fs::File::create(&path)?);
        writeln!(out, "{CSV_HEADER}")?;
        for r in &t.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.k,
                fmt_real(r.residual_norm),
                fmt_opt(r.step_ratio),
                fmt_real(r.theta),
                fmt_real(r.eta_partial),
                fmt_real(r.wall_ms)
            )?;
        }
        out.flush()?;
        writeln!(
            index,
            "{name},{},{},{:?},{}",
            t.label.replace(',', ";"),
            t.config.depth_m,
            t.status,
            t.records.len()
        )?;
        paths.push(path);
    }
    index.flush()?;
    Ok(paths)
}

/// Parsed CSV series: the six columns, with empty cells as `None`.
pub type CsvRow = (usize, f64, Option<f64>, f64, f64, f64);

pub fn read_csv_series(path: &Path) -> Result<Vec<CsvRow>, ReportError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(ReportError::Parse(format!("{}: unexpected header", path.display())));
    }
    let bad = |l: &str| ReportError::Parse(format!("bad CSV row: {l}"));
    let mut rows = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(line));
        }
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
        rows.push((
            f[0].parse().map_err(|_| bad(line))?,
            real(f[1])?,
            if f[2].is_empty() { None } else { Some(real(f[2])?) },
            real(f[3])?,
            real(f[4])?,
            real(f[5])?,
        ));
    }
    Ok(rows)
}

fn group_key(t: &SolveTrace) -> String {
    match t.params.get("re") {
        Some(re) => format!("re{re}"),
        None => "all".into(),
    }
}

/// Whitespace-separated data (`k residual theta`) per trace, one gnuplot 5
/// script per Reynolds-number group with a log-residual panel and a θ
/// panel, and `plot_all.gp` loading every group script.
pub fn emit_gnuplot(traces: &[SolveTrace], dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir)?;
    let mut groups: BTreeMap<String, Vec<(String, &SolveTrace)>> = BTreeMap::new();
    for (i, t) in traces.iter().enumerate() {
        let name = format!("{}.dat", series_name(i, t));
        let mut out = BufWriter::new(fs::File::create(dir.join(&name))?);
        writeln!(out, "# k residual_norm theta")?;
        for r in &t.records {
            writeln!(out, "{} {} {}", r.k, fmt_real(r.residual_norm), fmt_real(r.theta))?;
        }
        out.flush()?;
        groups.entry(group_key(t)).or_default().push((name, t));
    }

    let mut scripts = Vec::new();
    let mut master = BufWriter::new(fs::File::create(dir.join("plot_all.gp"))?);
    writeln!(master, "# gnuplot 5: load every panel script")?;
    for (key, members) in &groups {
        let script = format!("panel_{key}.gp");
        let mut out = BufWriter::new(fs::File::create(dir.join(&script))?);
        writeln!(out, "set terminal pngcairo size 1200,480")?;
        writeln!(out, "set output 'panel_{key}.png'")?;
        writeln!(out, "set multiplot layout 1,2 title '{key}'")?;
        writeln!(out, "set xlabel 'k'")?;
        writeln!(out, "set ylabel 'residual'")?;
        writeln!(out, "set logscale y")?;
        let plots: Vec<String> = members
            .iter()
            .map(|(f, t)| format!("'{f}' using 1:2 with linespoints title 'm={}'", t.config.depth_m))
            .collect();
        writeln!(out, "plot {}", plots.join(", \\\n     "))?;
        writeln!(out, "unset logscale y")?;
        writeln!(out, "set ylabel 'theta'")?;
        let plots: Vec<String> = members
            .iter()
            .map(|(f, t)| format!("'{f}' using 1:3 with linespoints title 'm={}'", t.config.depth_m))
            .collect();
        writeln!(out, "plot {}", plots.join(", \\\n     "))?;
        writeln!(out, "unset multiplot")?;
        out.flush()?;
        writeln!(master, "load '{script}'")?;
        scripts.push(dir.join(script));
    }
    master.flush()?;
    Ok(scripts)
}
