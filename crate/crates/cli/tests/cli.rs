use std::path::Path;
use std::process::Command;

use robust_submod_cli::records::{CSV_HEADER, TOP_TWO_TASKS, WALL_TIME};
use robust_submod_cli::{
    read_csv, run_suite, write_csv, Algorithm, CliError, ExperimentConfig, ExperimentRecord, Suite,
};
use robust_submod_core::imgsum::synthetic_embeddings;

fn small_satsel(out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::for_suite(Suite::Satsel);
    c.runs = 2;
    c.out_dir = out.to_path_buf();
    c.solver.k = 3;
    c.scenario.total = 24;
    c.scenario.planes = 6;
    c.scenario.steps = 3;
    c
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-submod"))
}

fn without_timing(records: &[ExperimentRecord]) -> Vec<ExperimentRecord> {
    records.iter().filter(|r| r.criterion != WALL_TIME).copied().collect()
}

#[test]
fn satsel_writes_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_satsel(dir.path());
    let out = run_suite(&config).unwrap();
    // runs x steps x algorithms x criteria
    assert_eq!(out.records.len(), 2 * 3 * 3 * 4);
    assert_eq!(out.files.len(), 7);
    assert_eq!(out.selections.len(), 2 * 3 * 3);
    let text = std::fs::read_to_string(dir.path().join("satsel_selections.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 3);
    for line in text.lines().skip(1) {
        let elements = line.rsplit(',').next().unwrap();
        // Saturation may stop below the bound.
        assert!((1..=3).contains(&elements.split(' ').count()), "{line}");
    }
    let local = read_csv(&dir.path().join("satsel_Local.csv")).unwrap();
    assert_eq!(local.len(), 2 * 3 * 3);
    let text = std::fs::read_to_string(dir.path().join("satsel_Local.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
}

#[test]
fn swp_records_top_two_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_satsel(dir.path());
    config.suite = Some(Suite::Swp);
    let out = run_suite(&config).unwrap();
    let top: Vec<_> = out.records.iter().filter(|r| r.criterion == TOP_TWO_TASKS).collect();
    assert_eq!(top.len(), 2 * 3 * 2);
    assert!(top.iter().all(|r| (0.0..=1.0 + 1e-12).contains(&r.value)));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_suite(&small_satsel(a.path())).unwrap();
    run_suite(&small_satsel(b.path())).unwrap();
    for name in ["satsel_Local.csv", "satsel_Saturate.csv", "satsel_Reference.csv", "satsel_selections.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn each_run_depends_only_on_its_own_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let both = run_suite(&small_satsel(a.path())).unwrap().records;
    let mut second = small_satsel(b.path());
    second.runs = 1;
    second.seed = 1;
    let alone = run_suite(&second).unwrap().records;
    let run1: Vec<_> = without_timing(&both)
        .into_iter()
        .filter(|r| r.run == 1)
        .map(|r| (r.step, r.algorithm, r.criterion, r.value))
        .collect();
    let solo: Vec<_> =
        without_timing(&alone).into_iter().map(|r| (r.step, r.algorithm, r.criterion, r.value)).collect();
    assert_eq!(run1, solo);
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let records = vec![
        ExperimentRecord { run: 0, step: 1, algorithm: Algorithm::Tr, criterion: 1, value: 0.1 + 0.2 },
        ExperimentRecord { run: 2, step: 0, algorithm: Algorithm::Local, criterion: 3, value: -1.0 / 3.0 },
        ExperimentRecord { run: 1, step: 5, algorithm: Algorithm::Preference, criterion: 5, value: 5e-324 },
    ];
    let path = dir.path().join("r.csv");
    write_csv(&records, &path).unwrap();
    let mut back = read_csv(&path).unwrap();
    let mut expected = records.clone();
    let key = |r: &ExperimentRecord| (r.run, r.step, r.algorithm, r.criterion);
    back.sort_by_key(key);
    expected.sort_by_key(key);
    assert_eq!(back.len(), 3);
    for (a, b) in back.iter().zip(&expected) {
        assert_eq!(key(a), key(b));
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}

#[test]
fn imgsum_reads_an_embedding_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.csv");
    synthetic_embeddings(30, 5, 2).unwrap().write_csv(&path).unwrap();
    let mut config = ExperimentConfig::for_suite(Suite::Imgsum);
    config.runs = 1;
    config.out_dir = dir.path().join("out");
    config.imgsum.embeddings = Some(path);
    config.imgsum.k_values = vec![2, 4];
    let out = run_suite(&config).unwrap();
    assert_eq!(out.records.len(), 2 * 2 * 4);
    assert!(out.records.iter().all(|r| r.step == 2 || r.step == 4));
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(matches!(ExperimentConfig::from_json(r#"{"suite":"satsel","bogus":1}"#), Err(CliError::Config(_))));
    assert!(matches!(ExperimentConfig::from_json(r#"{"suite":"nope"}"#), Err(CliError::Config(_))));
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_satsel(dir.path());
    c.solver.k = 100;
    assert!(matches!(run_suite(&c), Err(CliError::Config(_))));
    let mut c = small_satsel(dir.path());
    c.solver.lambda = 0.0;
    assert!(matches!(run_suite(&c), Err(CliError::Config(_))));
    let mut c = small_satsel(dir.path());
    c.solver.resolution = Some(0.0);
    assert!(matches!(run_suite(&c), Err(CliError::Config(_))));
}

#[test]
fn binary_runs_a_suite_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"suite":"online","runs":1,"solver":{"k":3,"window":2},"scenario":{"total":24,"planes":6,"steps":4}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = binary().args(["online", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(out.join("online_TR.csv").exists());
    assert!(out.join("online_Regular_time.csv").exists());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"suite":"swp"}"#).unwrap();
    let wrong_suite = binary().args(["satsel", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(wrong_suite.status.code(), Some(2));
    let missing = binary().args(["satsel", "--config", "/nonexistent/c.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let verify = binary().args(["verify", "--quick"]).output().unwrap();
    assert_eq!(verify.status.code(), Some(0), "{}", String::from_utf8_lossy(&verify.stdout));
    assert!(String::from_utf8_lossy(&verify.stdout).lines().all(|l| l.starts_with("PASS")));
}
