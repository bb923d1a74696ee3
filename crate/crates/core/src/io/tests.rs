use proptest::prelude::*;

use super::*;
use crate::dynamics::{run_trajectory, Scheme, SolverConfig};
use crate::experiments::{ConvergenceRow, ConvergenceTable, RowStatus};
use crate::model::LesModel;
use crate::noise::NoiseCoefficients;
use crate::spectral::{Cutoff, GridSpec, Mode, Pad, Spectral};
use crate::testing::random_field;

const MINIMAL: &str = r#"{
    "grid": 64, "nu": 0.01, "dt": 1e-3, "T": 0.25,
    "scheme": "deterministic",
    "model": {"kind": "smagorinsky", "cs_delta": 0.1}
}"#;

fn run(text: &str) -> RunSpec {
    match parse_config(text).unwrap() {
        ParsedConfig::Run(r) => r,
        other => panic!("{other:?}"),
    }
}

fn error(text: &str) -> ConfigError {
    parse_config(text).unwrap_err()
}

fn with(key: &str, value: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
    v[key] = serde_json::from_str(value).unwrap();
    v.to_string()
}

#[test]
fn minimal_deterministic_config() {
    let r = run(MINIMAL);
    let want = SolverConfig::deterministic(GridSpec::with_n(64).unwrap(), 0.01, 1e-3, 0.25, LesModel::smagorinsky(0.1));
    assert_eq!(r.solver, want);
    assert_eq!(r.master_seed, 0);
    assert!(r.consistency.is_none());
}

#[test]
fn zero_dt_names_the_key() {
    let e = error(&with("dt", "0"));
    assert_eq!(e.path, "dt");
    assert!(e.message.contains("positive"), "{e}");
}

#[test]
fn theta_normalization_is_checked() {
    // three modes on |k| = 1 would break radial symmetry, so use all four at 0.9/4
    let t = (0.9f64 / 4.0).sqrt();
    let noise = format!(r#"{{"kind": "explicit", "entries": [[1,0,{t}],[0,1,{t}],[-1,0,{t}],[0,-1,{t}]]}}"#);
    let mut v: serde_json::Value = serde_json::from_str(&with("noise", &noise)).unwrap();
    v["scheme"] = "ito_em".into();
    let e = error(&v.to_string());
    assert_eq!(e.path, "noise");
    assert!(e.message.contains("normalization") && e.message.contains("0.89999"), "{e}");
}

#[test]
fn unknown_keys_are_rejected_with_their_path() {
    let e = error(&with("viscosity", "0.1"));
    assert!(e.message.contains("viscosity"), "{e}");
    let e = error(&with("model", r#"{"kind": "smagorinsky", "cs_delta": 0.1, "cs": 2}"#));
    assert_eq!(e.path, "model");
    assert!(e.message.contains("cs"), "{e}");
    let e = error(&with("nu", r#""fast""#));
    assert_eq!(e.path, "nu");
}

#[test]
fn schema_and_invariant_errors() {
    assert_eq!(error(&with("grid", "63")).path, "grid");
    assert_eq!(error(&with("nu", "-1")).path, "nu");
    assert_eq!(error(&with("scheme", r#""ito_em""#)).path, "noise");
    assert_eq!(error(&with("consistency", r#"{"dts": [1e-3, 2e-3], "paths": 2}"#)).path, "consistency.dts");
    assert_eq!(error("[1]").path, "");
    assert!(error("{").message.contains("malformed"));
}

#[test]
fn render_round_trips_run_specs() {
    let mut r = run(MINIMAL);
    r.solver.grid = GridSpec::new(48, 20, Pad::TWO, Cutoff::Square).unwrap();
    r.solver.scheme = Scheme::StratonovichHeun;
    r.solver.model = LesModel::power_law(0.3, 0.5).unwrap().with_growth(1.0, 2.0).unwrap();
    r.solver.noise = Some(NoiseCoefficients::annulus(3).unwrap());
    r.solver.record_stride = 7;
    r.master_seed = u64::MAX;
    r.initial = InitialSpec::Snapshot { path: "w0.w2ds".into() };
    r.consistency = Some(ConsistencySpec { dts: vec![2e-3, 1e-3], paths: 3 });
    let cfg = ParsedConfig::Run(r);
    assert_eq!(parse_config(&render(&cfg)).unwrap(), cfg);

    let explicit = NoiseCoefficients::from_entries([
        (Mode::new(1, 0), 0.5),
        (Mode::new(0, 1), 0.5),
        (Mode::new(-1, 0), 0.5),
        (Mode::new(0, -1), 0.5),
    ])
    .unwrap();
    let mut r = run(MINIMAL);
    r.solver.scheme = Scheme::ItoEm;
    r.solver.noise = Some(explicit);
    r.solver.model = LesModel::constant();
    let cfg = ParsedConfig::Run(r);
    assert_eq!(parse_config(&render(&cfg)).unwrap(), cfg);
}

#[test]
fn scaling_documents() {
    let text = r#"{
        "base": {"grid": 64, "nu": 0.01, "dt": 5e-4, "horizon": 0.25, "scheme": "ito_em",
                 "model": {"kind": "smagorinsky", "cs_delta": 0.04}, "record_stride": 10},
        "shells": [2, 4, 8], "paths_per_shell": 16, "master_seed": 3
    }"#;
    let cfg = parse_config(text).unwrap();
    let ParsedConfig::Scaling(s) = &cfg else { panic!() };
    assert_eq!(s.study.shells, vec![2, 4, 8]);
    assert_eq!(s.study.delta, 1.0);
    assert!(s.study.self_check);
    assert_eq!(parse_config(&render(&cfg)).unwrap(), cfg);

    let bad = text.replace("[2, 4, 8]", "[4, 2]");
    assert_eq!(error(&bad).path, "shells");
    let bad = text.replace("[2, 4, 8]", "[2, 20]");
    assert_eq!(error(&bad).path, "shells");
    let bad = text.replace(r#""record_stride": 10"#, r#""record_stride": 10, "master_seed": 1"#);
    assert_eq!(error(&bad).path, "base.master_seed");
    let bad = text.replace(r#""nu": 0.01"#, r#""nu": 0"#);
    assert_eq!(error(&bad).path, "base.nu");
}

#[test]
fn snapshot_of_zero_field_is_header_only() {
    let s = Spectral::new(GridSpec::with_n(16).unwrap());
    let bytes = encode_snapshot(&s.zeros());
    assert_eq!(bytes.len(), 24);
    assert_eq!(&bytes[..4], b"W2DS");
    assert_eq!(decode_snapshot(&bytes).unwrap(), s.zeros());
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let s = Spectral::new(GridSpec::with_n(32).unwrap());
    let mut w = random_field(&s, 12, 50, 9);
    w.set(Mode::new(3, 4), -0.0).unwrap();
    w.set(Mode::new(1, 1), f64::MIN_POSITIVE).unwrap();
    let back = decode_snapshot(&encode_snapshot(&w)).unwrap();
    assert!(w.coeffs().iter().zip(back.coeffs()).all(|(a, b)| a.to_bits() == b.to_bits()));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.w2ds");
    write_snapshot(&path, &w).unwrap();
    assert_eq!(read_snapshot(&path).unwrap(), w);
}

fn header(n: u32, max_mode: u32, count: u64) -> Vec<u8> {
    let mut b = b"W2DS".to_vec();
    b.extend_from_slice(&1u32.to_le_bytes());
    b.extend_from_slice(&n.to_le_bytes());
    b.extend_from_slice(&max_mode.to_le_bytes());
    b.extend_from_slice(&count.to_le_bytes());
    b
}

fn record(l1: i32, l2: i32, c: f64) -> Vec<u8> {
    [l1.to_le_bytes().to_vec(), l2.to_le_bytes().to_vec(), c.to_le_bytes().to_vec()].concat()
}

#[test]
fn malformed_snapshots_are_rejected() {
    let zero = [header(16, 7, 1), record(0, 0, 1.0)].concat();
    let e = decode_snapshot(&zero).unwrap_err();
    assert!(matches!(e, SnapshotError::ZeroMode(0)));
    assert!(e.to_string().contains("zero-mean"));

    let mut magic = header(16, 7, 0);
    magic[0] = b'X';
    assert!(matches!(decode_snapshot(&magic), Err(SnapshotError::Magic(_))));
    let mut version = header(16, 7, 0);
    version[4] = 2;
    assert!(matches!(decode_snapshot(&version), Err(SnapshotError::Version(2))));
    let short = [header(16, 7, 2), record(1, 0, 1.0)].concat();
    assert!(matches!(decode_snapshot(&short), Err(SnapshotError::Truncated { .. })));
    assert!(matches!(decode_snapshot(&short[..10]), Err(SnapshotError::Truncated { .. })));
    let long = [header(16, 7, 0), vec![0]].concat();
    assert!(matches!(decode_snapshot(&long), Err(SnapshotError::Trailing(1))));
    let dup = [header(16, 7, 2), record(1, 0, 1.0), record(1, 0, 2.0)].concat();
    assert!(matches!(decode_snapshot(&dup), Err(SnapshotError::Duplicate { index: 1, .. })));
    let far = [header(16, 7, 1), record(8, 0, 1.0)].concat();
    assert!(matches!(decode_snapshot(&far), Err(SnapshotError::OutsideCutoff { .. })));
    let bad_grid = header(15, 7, 0);
    assert!(matches!(decode_snapshot(&bad_grid), Err(SnapshotError::Grid(_))));
}

fn row(n: u32) -> ConvergenceRow {
    ConvergenceRow {
        n,
        linf_theta: 0.1 / n as f64,
        mean_dist_hm: 0.5,
        std_dist: 0.01,
        mean_dist_l2h: 0.25,
        paths: 16,
        seconds: 1.5,
        status: RowStatus::Ok,
        per_path: vec![],
    }
}

fn table(rows: Vec<ConvergenceRow>) -> ConvergenceTable {
    ConvergenceTable { delta: 1.0, record_stride: 10, master_seed: 0, reference_self_check: None, rows }
}

#[test]
fn convergence_csv_schema() {
    let empty = Report::Convergence(&table(vec![])).render(Format::Csv);
    assert_eq!(empty[0].1, format!("{CONVERGENCE_HEADER}\n"));
    let full = Report::Convergence(&table(vec![row(2), row(4), row(8)])).render(Format::Csv);
    let lines: Vec<&str> = full[0].1.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "N,linf_theta,mean_dist_Hm1,std_dist,mean_dist_L2H1m,paths,seconds");
    let cells: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(cells.len(), 7);
    assert_eq!(cells[0], "8");
    assert_eq!(cells[1].parse::<f64>().unwrap(), 0.1 / 8.0);
    assert_eq!(cells[5], "16");
}

#[test]
fn record_plotdata_follows_heat_decay() {
    let cfg = SolverConfig::deterministic(GridSpec::with_n(16).unwrap(), 0.01, 0.01, 1.0, LesModel::constant());
    let s = Spectral::new(cfg.grid);
    let k = Mode::new(1, 2);
    let rec = run_trajectory(&cfg, &s.field([(k, 2.0)]).unwrap(), None).unwrap();
    let files = Report::Record(&rec).render(Format::Plotdata);
    let (_, l2) = files.iter().find(|(n, _)| n == "l2_norm.dat").unwrap();
    let mut count = 0;
    for line in l2.lines().filter(|l| !l.starts_with('#')) {
        let v: Vec<f64> = line.split_whitespace().map(|x| x.parse().unwrap()).collect();
        let exact = 2.0 * (-4.0 * std::f64::consts::PI.powi(2) * 0.01 * 5.0 * v[0]).exp();
        assert!((v[1] - exact).abs() <= 1e-10 * exact);
        count += 1;
    }
    assert_eq!(count, 101);
    let csv = &Report::Record(&rec).render(Format::Csv)[0].1;
    assert!(csv.starts_with(RECORD_HEADER));
}

#[test]
fn manifest_lists_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut out = OutputDir::create(dir.path()).unwrap();
    emit_report(&mut out, Report::Convergence(&table(vec![row(2)])), Format::Csv).unwrap();
    emit_report(&mut out, Report::Convergence(&table(vec![row(2)])), Format::Plotdata).unwrap();
    out.write("nested/a.bin", &[1, 2, 3]).unwrap();
    let cfg = parse_config(MINIMAL).unwrap();
    let m = out.finish("test", cfg.to_value(), 5, vec![]).unwrap();
    assert_eq!(m.files.len(), 4);
    assert_eq!(verify_manifest(dir.path()).unwrap(), m);
    assert_eq!(m.files.iter().find(|f| f.name == "nested/a.bin").unwrap().sha256, sha256_hex(&[1, 2, 3]));

    // the config echo parses on its own, directly or through the manifest
    let (again, _) = load_config(&dir.path().join(MANIFEST_NAME)).unwrap();
    assert_eq!(again, cfg);

    std::fs::write(dir.path().join("table.csv"), "tampered").unwrap();
    assert!(matches!(verify_manifest(dir.path()), Err(IoError::Manifest(_))));
}

#[test]
fn snapshot_initial_state_is_resampled() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = Spectral::new(GridSpec::with_n(16).unwrap());
    let w = random_field(&coarse, 5, 10, 3);
    write_snapshot(&dir.path().join("w.w2ds"), &w).unwrap();
    let spec = InitialSpec::Snapshot { path: "w.w2ds".into() };
    let fine = Spectral::new(GridSpec::with_n(32).unwrap());
    let got = resolve_initial(&spec, &fine, dir.path()).unwrap();
    assert_eq!(got.grid(), fine.grid());
    assert_eq!(got.restrict_to(&w), w);
    let tiny = Spectral::new(GridSpec::with_n(4).unwrap());
    assert!(matches!(resolve_initial(&spec, &tiny, dir.path()), Err(IoError::Initial { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snapshot_round_trip(seed in any::<u64>(), count in 0usize..60) {
        let s = Spectral::new(GridSpec::with_n(24).unwrap());
        let w = random_field(&s, 11, count, seed);
        let back = decode_snapshot(&encode_snapshot(&w)).unwrap();
        prop_assert!(w.coeffs().iter().zip(back.coeffs()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn render_is_canonical(nu in 1e-4f64..1.0, stride in 1usize..50, seed in any::<u64>(), cs in 0.0f64..0.5) {
        let mut r = run(MINIMAL);
        r.solver.nu = nu;
        r.solver.record_stride = stride;
        r.solver.model = LesModel::smagorinsky(cs);
        r.master_seed = seed;
        let cfg = ParsedConfig::Run(r);
        let text = render(&cfg);
        prop_assert_eq!(parse_config(&text).unwrap(), cfg.clone());
        prop_assert_eq!(render(&parse_config(&text).unwrap()), text);
    }
}
