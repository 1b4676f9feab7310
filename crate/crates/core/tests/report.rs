use std::collections::BTreeMap;
use std::fs;

use aanse::accel::{run_accelerated, AffineMap, AndersonConfig, IterationRecord, SolveTrace, TerminationStatus};
use aanse::report::{
    emit_csv, emit_gnuplot, emit_json, load_json, lower_median, read_csv_series, summarize, ReportError,
};
use aanse::CoeffVector;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn affine_trace(m: usize, re: f64, timings: bool) -> SolveTrace {
    let map = AffineMap::random_contraction(6, 0.8, 3);
    let cfg = AndersonConfig {
        tol_abs: 1e-12,
        record_timings: timings,
        ..AndersonConfig::with_depth(m)
    };
    let mut t = run_accelerated(&map, CoeffVector::zeros(6), &cfg).unwrap();
    t.label = format!("re{re}_m{m}");
    t.params.insert("re".into(), re);
    t
}

fn odd_trace() -> SolveTrace {
    let rec = |k, r: f64| IterationRecord {
        k,
        residual_norm: r,
        theta: 1.0 / 3.0,
        alphas: vec![0.1, f64::MIN_POSITIVE, 1e300],
        eta_partial: 5e-324,
        depth_used: 2,
        step_ratio: (k > 0).then_some(f64::INFINITY),
        step_norm: Some(f64::NAN),
        gtilde_step_norm: None,
        wall_ms: 0.0,
    };
    SolveTrace {
        label: "edge values".into(),
        params: BTreeMap::from([("re".to_string(), 1e-7)]),
        config: AndersonConfig::with_depth(2),
        status: TerminationStatus::Diverged,
        records: vec![rec(0, 0.1 + 0.2), rec(1, f64::NEG_INFINITY)],
        failure: Some("non-finite residual".into()),
        wall_ms: 1.25,
        solution: None,
    }
}

fn bits(t: &SolveTrace) -> Vec<u64> {
    let mut out = Vec::new();
    for r in &t.records {
        out.push(r.residual_norm.to_bits());
        out.push(r.theta.to_bits());
        out.extend(r.alphas.iter().map(|a| a.to_bits()));
        out.push(r.eta_partial.to_bits());
        out.push(r.step_ratio.map_or(1, f64::to_bits));
        out.push(r.step_norm.map_or(1, f64::to_bits));
        out.push(r.gtilde_step_norm.map_or(1, f64::to_bits));
        out.push(r.wall_ms.to_bits());
        out.push(r.k as u64);
        out.push(r.depth_used as u64);
    }
    out
}

#[test]
fn json_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.json");
    let traces = vec![affine_trace(2, 100.0, true), odd_trace()];
    emit_json(&traces, &path).unwrap();
    let back = load_json(&path).unwrap();
    assert_eq!(back.len(), 2);
    for (a, b) in traces.iter().zip(&back) {
        assert_eq!(bits(a), bits(b));
        assert_eq!(a.label, b.label);
        assert_eq!(a.status, b.status);
        assert_eq!(a.config, b.config);
        assert_eq!(a.params, b.params);
        assert_eq!(a.failure, b.failure);
    }
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"schema\": 1"));
}

#[test]
fn wrong_schema_and_garbage_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    fs::write(&p, r#"{"schema": 2, "traces": []}"#).unwrap();
    assert!(matches!(load_json(&p), Err(ReportError::Parse(_))));
    fs::write(&p, "not json").unwrap();
    assert!(matches!(load_json(&p), Err(ReportError::Parse(_))));
    assert!(matches!(load_json(&dir.path().join("missing.json")), Err(ReportError::IoFailure(_))));
}

#[test]
fn identical_runs_give_identical_json_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    emit_json(&[affine_trace(3, 10.0, false)], &a).unwrap();
    emit_json(&[affine_trace(3, 10.0, false)], &b).unwrap();
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn csv_series_round_trip_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let traces = vec![affine_trace(0, 1000.0, true), affine_trace(2, 1000.0, true)];
    let paths = emit_csv(&traces, dir.path()).unwrap();
    assert_eq!(paths.len(), 2);
    for (t, p) in traces.iter().zip(&paths) {
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(text.lines().next(), Some("k,residual_norm,step_ratio,theta,eta_partial,wall_ms"));
        let rows = read_csv_series(p).unwrap();
        assert_eq!(rows.len(), t.records.len());
        for (row, r) in rows.iter().zip(&t.records) {
            assert_eq!(row.0, r.k);
            assert_eq!(row.1.to_bits(), r.residual_norm.to_bits());
            assert_eq!(row.2.map(f64::to_bits), r.step_ratio.map(f64::to_bits));
            assert_eq!(row.3.to_bits(), r.theta.to_bits());
            assert_eq!(row.4.to_bits(), r.eta_partial.to_bits());
            assert_eq!(row.5.to_bits(), r.wall_ms.to_bits());
        }
    }
    let index = fs::read_to_string(dir.path().join("series_index.csv")).unwrap();
    assert_eq!(index.lines().count(), 3);
}

#[test]
fn empty_inputs_still_produce_headers() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_csv(&[], dir.path()).unwrap().is_empty());
    assert_eq!(
        fs::read_to_string(dir.path().join("series_index.csv")).unwrap().lines().count(),
        1
    );
    assert!(emit_gnuplot(&[], dir.path()).unwrap().is_empty());
    assert!(dir.path().join("plot_all.gp").exists());
    let p = dir.path().join("empty.json");
    emit_json(&[], &p).unwrap();
    assert!(load_json(&p).unwrap().is_empty());
}

#[test]
fn gnuplot_panels_group_by_reynolds_number() {
    let dir = tempfile::tempdir().unwrap();
    let traces = vec![
        affine_trace(0, 1000.0, true),
        affine_trace(3, 1000.0, true),
        affine_trace(0, 5000.0, true),
    ];
    let scripts = emit_gnuplot(&traces, dir.path()).unwrap();
    assert_eq!(scripts.len(), 2);
    let first = fs::read_to_string(&scripts[0]).unwrap();
    assert!(first.contains("000_re1000_m0.dat") && first.contains("001_re1000_m3.dat"));
    assert!(first.contains("logscale y"));
    let master = fs::read_to_string(dir.path().join("plot_all.gp")).unwrap();
    assert_eq!(master.lines().filter(|l| l.starts_with("load ")).count(), 2);
    for i in 0..3 {
        let name = format!("{i:03}_{}.dat", traces[i].label);
        let data = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(data.lines().count(), traces[i].records.len() + 1);
    }
}

#[test]
fn summary_of_a_short_trace() {
    let t = affine_trace(1, 1.0, false);
    let s = summarize(&t).unwrap();
    assert_eq!(s.iterations, t.records.len());
    let th = s.theta_median.unwrap();
    assert!((0.0..=1.0 + 1e-12).contains(&th));
    assert!(s.conv_rate_median.unwrap() < 1.0);
}

proptest! {
    #[test]
    fn median_ignores_order(mut v in proptest::collection::vec(-1e3f64..1e3, 1..40), seed in any::<u64>()) {
        let before = lower_median(v.clone());
        v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(before, lower_median(v));
    }
}
