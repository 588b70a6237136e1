use std::collections::HashMap;
use std::fs;
use std::process::Command;

use bee_core::harness::{
    parse_config, run_experiment, run_lemma_validation, ConfigError, ExperimentConfig, Mode, Overrides, LEMMA_HEADER,
    SUMMARY_HEADER, TRACE_HEADER,
};
use bee_core::PolicyKind;

fn desk(mode: Mode, dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        mode,
        expert_count: 20,
        horizon: 20_000,
        replications: 5,
        m_values: vec![8],
        policies: vec![PolicyKind::KlUcb],
        output_directory: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn rows(path: &std::path::Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn desk_config_writes_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = desk(Mode::Bee, dir.path());
    let out = run_experiment(&config).unwrap();
    assert_eq!(out.summary.len(), 1);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next(), Some(SUMMARY_HEADER));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some(TRACE_HEADER));
    let echoed: ExperimentConfig = serde_json::from_str(&fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed, config);
}

#[test]
fn reruns_are_byte_identical() {
    for mode in [Mode::Bee, Mode::Swarm] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let mut config = desk(mode, a.path());
        config.horizon = 3_000;
        config.policies = vec![PolicyKind::Thompson, PolicyKind::Moss];
        run_experiment(&config).unwrap();
        config.output_directory = b.path().to_path_buf();
        config.workers = 1;
        run_experiment(&config).unwrap();
        for file in ["summary.csv", "trace.csv"] {
            assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
        }
    }
}

#[test]
fn summary_recomputes_from_traces() {
    for mode in [Mode::Bee, Mode::Swarm] {
        let dir = tempfile::tempdir().unwrap();
        let mut config = desk(mode, dir.path());
        config.horizon = 4_000;
        config.m_values = vec![4, 6];
        run_experiment(&config).unwrap();
        let horizon = config.horizon.to_string();
        let mut finals: HashMap<(String, String), Vec<(f64, f64)>> = HashMap::new();
        for r in rows(&dir.path().join("trace.csv")).into_iter().filter(|r| r[4] == horizon) {
            let t: f64 = r[4].parse().unwrap();
            finals
                .entry((r[1].clone(), r[2].clone()))
                .or_default()
                .push((r[7].parse::<f64>().unwrap() / t, r[8].parse::<f64>().unwrap() / t));
        }
        let summary = rows(&dir.path().join("summary.csv"));
        assert_eq!(summary.len(), 2);
        for s in summary {
            let runs = &finals[&(s[1].clone(), s[2].clone())];
            assert_eq!(runs.len(), 5);
            let realized = runs.iter().map(|r| r.0).sum::<f64>() / 5.0;
            let pseudo = runs.iter().map(|r| r.1).sum::<f64>() / 5.0;
            assert!((realized - s[6].parse::<f64>().unwrap()).abs() < 1e-8, "{mode:?} realized");
            assert!((pseudo - s[8].parse::<f64>().unwrap()).abs() < 1e-8, "{mode:?} pseudo");
        }
    }
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"horizon": 500, "m_values": [2, 4], "replications": 2}"#).unwrap();
    let c = parse_config(Some(&path), &Overrides { horizon: Some(700), ..Overrides::default() }).unwrap();
    assert_eq!((c.horizon, c.replications, c.expert_count), (700, 2, 100));

    fs::write(&path, r#"{"m_values": [130]}"#).unwrap();
    match parse_config(Some(&path), &Overrides::default()) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "m_values"),
        other => panic!("{other:?}"),
    }
    fs::write(&path, "{not json").unwrap();
    assert!(matches!(parse_config(Some(&path), &Overrides::default()), Err(ConfigError::Parse(_))));
    assert!(matches!(
        parse_config(Some(&dir.path().join("missing.json")), &Overrides::default()),
        Err(ConfigError::Io { .. })
    ));
}

#[test]
fn lemma_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        mode: Mode::FixedCommitteeLemma,
        horizon: 1_000,
        replications: 3,
        policies: vec![PolicyKind::Ucb1, PolicyKind::Imed],
        output_directory: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let out = run_lemma_validation(&config).unwrap();
    let text = fs::read_to_string(dir.path().join("lemma.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(LEMMA_HEADER));
    assert_eq!(text.lines().count(), out.rows.len() + 1);
    let last = out.final_row(PolicyKind::Ucb1).unwrap();
    assert_eq!(last.horizon, 1_000);
    assert!(last.bound > 0.0 && last.empirical_pseudo_regret >= 0.0);
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_bee");
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(bin).args(["validate", "--m", "130"]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
    let status = Command::new(bin).args(["lemma", "--horizon", "200", "--reps", "1", "--policy", "ucb1", "--out"]).arg(dir.path()).output().unwrap().status;
    assert_eq!(status.code(), Some(0));
    let cfg = dir.path().join("coin.json");
    fs::write(&cfg, r#"{"lemma": {"committee_competence": 0.5}}"#).unwrap();
    let out = Command::new(bin).args(["lemma", "--horizon", "200", "--reps", "1", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(bin)
        .args(["run", "--experts", "10", "--horizon", "300", "--reps", "1", "--m", "2", "--m", "4", "--policy", "ts", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("summary.csv")).unwrap().lines().count(), 3);
}
