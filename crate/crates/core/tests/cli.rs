use std::process::{Command, Output};

use trust_game::cli::{cmd_oracle, sweep_rows, Cli, Command as Sub};
use trust_game::output::{read_curves_csv, SimulationDocument};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trust-game"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn comment<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("# {key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no {key} comment"))
}

#[test]
fn oracle_no_trust() {
    let out = bin(&[
        "oracle", "--alpha0", "0.5", "--p0", "0.5", "--K", "3", "--m", "0", "--n", "0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(comment(&text, "classification"), "NoTrust");
    assert_eq!(comment(&text, "optimal_fractions"), "0.0");
    assert!(text.contains("arm,fraction,objective,optimal\n0,0.0,0,true\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 12);
}

#[test]
fn oracle_full_trust_quadratic() {
    let out = bin(&[
        "oracle", "--alpha0", "1", "--p0", "0.5", "--K", "3", "--m", "2", "--n", "2",
    ]);
    let text = stdout(&out);
    assert_eq!(comment(&text, "classification"), "FullTrust");
    assert_eq!(comment(&text, "optimal_fractions"), "1.0");
}

#[test]
fn oracle_json() {
    let out = bin(&[
        "oracle", "--alpha0", "1", "--p0", "1", "--K", "1", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["classification"], "Indifferent");
    assert_eq!(doc["optimal_fractions"].as_array().unwrap().len(), 11);
    assert_eq!(doc["config"]["K"], 1.0);
}

#[test]
fn oracle_rejects_out_of_range_alpha() {
    let out = bin(&["oracle", "--alpha0", "1.5", "--p0", "0.5", "--K", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha0 must lie in [0,1]"));
    let out = bin(&["oracle", "--K", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("K must be"));
}

#[test]
fn simulate_defaults_write_plot_ready_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let out = bin(&["simulate", "--out", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("match=true"));

    let text = std::fs::read_to_string(&path).unwrap();
    let config: serde_json::Value = serde_json::from_str(comment(&text, "config")).unwrap();
    assert_eq!(config["trials"], 20_000);
    assert_eq!(config["agents"], 10);
    assert_eq!(config["base_seed"], 42);
    assert_eq!(config["params"]["multiplier"], 3.0);
    let mut data = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(
        data.next().unwrap(),
        "trial,arm_0.0,arm_0.1,arm_0.2,arm_0.3,arm_0.4,arm_0.5,arm_0.6,arm_0.7,arm_0.8,arm_0.9,arm_1.0"
    );
    assert_eq!(data.count(), 2001);

    let curves = read_curves_csv(text.as_bytes()).unwrap();
    assert_eq!(*curves.checkpoints.last().unwrap(), 20_000);

    let report = std::fs::read_to_string(dir.path().join("run.report.csv")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("pooled,2000,10,1.0,")));
    assert!(report.starts_with("# config: "));
}

#[test]
fn simulate_single_trial() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let out = bin(&[
        "simulate",
        "--trials",
        "1",
        "--agents",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let curves = read_curves_csv(std::fs::read(&path).unwrap().as_slice()).unwrap();
    assert_eq!(curves.checkpoints, vec![1]);
    assert_eq!(curves.mean_freq[0].iter().filter(|&&x| x == 1.0).count(), 1);
}

#[test]
fn simulate_json_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let out = bin(&[
        "simulate",
        "--trials",
        "800",
        "--agents",
        "3",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let raw: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let keys: Vec<&String> = raw.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["config", "curves", "report"]);
    let doc: SimulationDocument = serde_json::from_value(raw).unwrap();
    assert_eq!(doc.config.experiment.trials, 800);
    assert_eq!(doc.report.per_agent.len(), 3);
    // JSON and CSV carry the same curves, bit for bit.
    let csv_path = dir.path().join("run.csv");
    bin(&[
        "simulate",
        "--trials",
        "800",
        "--agents",
        "3",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    let from_csv = read_curves_csv(std::fs::read(&csv_path).unwrap().as_slice()).unwrap();
    assert_eq!(from_csv, doc.curves);
}

#[test]
fn simulate_unwritable_path_is_an_io_error() {
    let out = bin(&[
        "simulate",
        "--trials",
        "10",
        "--out",
        "/nonexistent-dir/x/run.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_requires_out() {
    let out = bin(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_flips_between_point_six_and_point_eight() {
    let out = bin(&[
        "sweep",
        "--alpha0",
        "0.2,0.4,0.6,0.8,1.0",
        "--p0",
        "0.5",
        "--K",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let classes: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(6).unwrap())
        .collect();
    assert_eq!(
        classes,
        ["NoTrust", "NoTrust", "NoTrust", "FullTrust", "FullTrust"]
    );
}

#[test]
fn sweep_labels_exact_boundary_indifferent() {
    let out = bin(&[
        "sweep", "--alpha0", "0.5,1", "--p0", "1", "--K", "2", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows[0]["classification"], "Indifferent");
    assert_eq!(rows[1]["classification"], "FullTrust");
}

#[test]
fn sweep_rejects_empty_range() {
    let out = bin(&["sweep", "--alpha0", ""]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&["sweep", "--alpha0", "1:0.1:0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_point_sweep_equals_oracle() {
    for (a, p, k, m, n) in [
        ("0.5", "0.5", "3", "0", "0"),
        ("1", "0.5", "3", "2", "2"),
        ("0.3", "0.9", "5", "1", "3"),
    ] {
        let cli = <Cli as clap::Parser>::parse_from([
            "trust-game",
            "sweep",
            "--alpha0",
            a,
            "--p0",
            p,
            "--K",
            k,
            "--m",
            m,
            "--n",
            n,
        ]);
        let Sub::Sweep(args) = cli.command else {
            unreachable!()
        };
        let rows = sweep_rows(&args).unwrap();
        assert_eq!(rows.len(), 1);

        let cli = <Cli as clap::Parser>::parse_from([
            "trust-game",
            "oracle",
            "--alpha0",
            a,
            "--p0",
            p,
            "--K",
            k,
            "--m",
            m,
            "--n",
            n,
            "--format",
            "json",
        ]);
        let Sub::Oracle(args) = cli.command else {
            unreachable!()
        };
        let mut buf = Vec::new();
        cmd_oracle(&args, &mut buf).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc["classification"], rows[0].classification.to_string());
        let fractions: Vec<f64> = serde_json::from_value(doc["optimal_fractions"].clone()).unwrap();
        assert_eq!(fractions, rows[0].oracle_fractions);
    }
}

#[test]
fn sweep_with_simulation_reports_empirical_arm() {
    let out = bin(&[
        "sweep",
        "--alpha0",
        "0.5,1",
        "--simulate",
        "--trials",
        "5000",
        "--agents",
        "4",
        "--window",
        "1000",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].ends_with("modal_fraction,agents_matching,matches_oracle"));
    assert!(
        rows[1].ends_with(",0.0,4,true") || rows[1].contains(",0.0,3,true"),
        "{}",
        rows[1]
    );
    assert!(
        rows[2].contains(",1.0,") && rows[2].ends_with("true"),
        "{}",
        rows[2]
    );
}
