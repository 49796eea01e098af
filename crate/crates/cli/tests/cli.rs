use std::process::{Command, Output};

use overhang_core::config::RunConfig;

fn overhang(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overhang")).args(args).env_remove("OVERHANG_SEED").output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = overhang(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    overhang(args).status.code().unwrap()
}

/// Data rows of the first CSV block, header excluded.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let block: String = text
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .take_while(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    csv::Reader::from_reader(block.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn impact_table_reproduces_reference_rows() {
    let out = stdout(&["impact", "--table"]);
    for row in ["| 1.5 | -4.4% |", "| 0.7 | -9.2% |", "| 0.3 | -20.2% |"] {
        assert!(out.contains(row), "missing {row} in\n{out}");
    }
}

#[test]
fn zero_shift_has_zero_permanent_impact() {
    let rows = csv_rows(&stdout(&["impact", "--share", "0", "--epsilon", "0.7", "--csv"]));
    assert_eq!(rows[0][4], "0.0");
}

#[test]
fn validation_failures_exit_2() {
    assert_eq!(code(&["impact", "--epsilon", "-1"]), 2);
    assert_eq!(code(&["impact", "--epsilon", "abc"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["scenario", "B", "--volume", "-5"]), 2);
}

#[test]
fn unknown_entities_exit_3() {
    assert_eq!(code(&["scenario", "Z"]), 3);
    assert_eq!(code(&["mechanism", "simulate", "--terminal", "vanish"]), 3);
    assert_eq!(code(&["impact", "--quality", "dark-pool"]), 3);
}

#[test]
fn computation_errors_exit_4() {
    assert_eq!(code(&["mechanism", "reconstruct", "-k", "3", "1:00", "2:00"]), 4);
    assert_eq!(code(&["frontier", "--gamma", "1", "--eta", "0.1"]), 4);
    assert_eq!(code(&["mechanism", "dms", "--grace", "1", "--action", "destroy-shards", "e", "e", "e"]), 4);
}

#[test]
fn scenario_b_band() {
    let rows = csv_rows(&stdout(&["scenario", "B", "--csv"]));
    let (low, high): (f64, f64) = (rows[0][11].parse().unwrap(), rows[0][12].parse().unwrap());
    assert!((low + 12.0).abs() <= 0.6 && (high + 11.0).abs() <= 0.6, "{low} {high}");
}

#[test]
fn volume_override_changes_participation() {
    let rows = csv_rows(&stdout(&["scenario", "B", "--volume", "20e9", "--csv"]));
    assert_eq!(rows[0][8], "0.126");
}

#[test]
fn default_sweep_reports_bound() {
    let out = stdout(&["scenario", "sweep", "--default-grid", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let max = v["data"]["max_abs_total"].as_f64().unwrap();
    assert!((0.24..=0.26).contains(&max), "{max}");
    assert_eq!(v["data"]["cells"].as_array().unwrap().len(), 30);
}

#[test]
fn decision_map_starts_with_dormancy() {
    let rows = csv_rows(&stdout(&["decision-map", "--csv"]));
    assert_eq!(rows[0][0], "DormancyNonRecovery");
    assert_eq!(rows[1][0], "SilentBurn");
}

#[test]
fn dormancy_releases_nothing() {
    let out = stdout(&["mechanism", "simulate", "--terminal", "dormancy", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let entries = v["data"]["entries"].as_array().unwrap();
    assert!(entries.iter().all(|e| e["event"] != "release"));
    assert_eq!(v["data"]["final_state"], "unrecoverable");
}

#[test]
fn liquidation_releases_every_tranche() {
    let rows = csv_rows(&stdout(&["mechanism", "simulate", "--terminal", "liquidation", "--csv"]));
    assert_eq!(rows[0][3], "10");
    assert_eq!(rows[0][4], "1148000.00000000");
}

#[test]
fn zero_risk_aversion_is_linear() {
    let out = stdout(&["frontier", "--lambdas", "0", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let h: Vec<f64> = v["data"]["trajectories"][0]["trajectory"]["holdings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let n = h.len() - 1;
    for (j, x) in h.iter().enumerate() {
        assert!((x - 1e6 * (n - j) as f64 / n as f64).abs() < 1e-6);
    }
}

#[test]
fn split_and_reconstruct_through_the_cli() {
    let out = stdout(&["mechanism", "split", "--secret", "c0ffee", "-k", "2", "-n", "4", "--seed", "5", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let shares: Vec<&str> = v["data"]["shares"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    let back = stdout(&["mechanism", "reconstruct", "-k", "2", shares[3], shares[1], "--csv"]);
    assert_eq!(csv_rows(&back)[0][1], "c0ffee");
}

#[test]
fn seed_is_echoed_and_env_is_a_fallback() {
    assert!(stdout(&["anchors", "--seed", "42"]).starts_with("# overhang anchors (seed 42)"));
    let out = Command::new(env!("CARGO_BIN_EXE_overhang"))
        .args(["anchors", "--csv"])
        .env("OVERHANG_SEED", "17")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("# overhang anchors seed=17"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["scenario", "sweep", "--default-grid", "--csv"],
        vec!["mechanism", "split", "--secret", "00ff", "--seed", "3", "--json"],
        vec!["decision-map", "--json"],
        vec!["frontier"],
    ] {
        assert_eq!(stdout(&args), stdout(&args), "{args:?}");
    }
}

#[test]
fn json_config_round_trips_through_the_parser() {
    let out = stdout(&["scenario", "A", "--json", "--seed", "9", "--volume", "2e10"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let cfg = RunConfig::from_json(&v["config"].to_string()).unwrap();
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.volume, 2e10);
    assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
}

#[test]
fn config_file_defines_scenarios() {
    let dir = std::env::temp_dir().join(format!("overhang-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "seed = 11\nformat = csv\n\n[scenario.D]\nelasticity = 0.5\nquality = mixed\nhorizon = 8\n")
        .unwrap();
    let out = stdout(&["scenario", "D", "--config", path.to_str().unwrap()]);
    assert!(out.starts_with("# overhang scenario seed=11"));
    assert_eq!(csv_rows(&out)[0][0], "D");

    std::fs::write(&path, "bogus = 1\n").unwrap();
    assert_eq!(code(&["anchors", "--config", path.to_str().unwrap()]), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}
