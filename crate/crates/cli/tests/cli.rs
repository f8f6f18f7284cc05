use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relay_dof::Rational;
use tempfile::TempDir;

const TOY: &str = r#"{"antennas":{"n_s":2,"n_r_rx":2,"n_d":3},"coherence":{"t_sd":8,"t_sr":"inf","t_rd":8}}"#;
const EQUAL_T10: &str = r#"{"antennas":{"n_s":3,"n_r_rx":3,"n_d":5},"coherence":{"t_sd":10,"t_sr":"inf","t_rd":10}}"#;
const TSD_MULTIPLE: &str = r#"{"antennas":{"n_s":3,"n_r_rx":3,"n_d":5},"coherence":{"t_sd":12,"t_sr":"inf","t_rd":4}}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn relay_dof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relay-dof"))
        .args(args)
        .env("RELAY_DOF_THREADS", "2")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = relay_dof(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = relay_dof(args);
    assert!(!out.status.success(), "{args:?} should fail");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(!err.trim().is_empty());
    err
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dof_of_the_toy_example() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "toy.json", TOY);
    let json: serde_json::Value = serde_json::from_str(&ok(&["dof", "--config", arg(&cfg), "--scheme", "thm1-equal"])).unwrap();
    assert_eq!(json["total"], "7/4");
    assert_eq!(json["n_r_opt"], serde_json::json!([1]));
    assert_eq!(json["scenario_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn tsd_multiple_configuration_is_flagged() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "tsd-multiple.json", TSD_MULTIPLE);
    let json: serde_json::Value =
        serde_json::from_str(&ok(&["dof", "--config", arg(&cfg), "--scheme", "thm1-tsd-multiple"])).unwrap();
    assert_eq!(json["total"], "2");
    let notes: Vec<&str> = json["consistency_notes"].as_array().unwrap().iter().map(|n| n.as_str().unwrap()).collect();
    assert!(notes.iter().any(|n| n.contains("printed closed form")), "{notes:?}");
    assert!(notes.iter().any(|n| n.contains("constraint not met")), "{notes:?}");

    let report = ok(&["crosscheck", "--config", arg(&cfg), "--scheme", "thm1-tsd-multiple"]);
    assert!(report.contains("\n1,15/4,2,false\n"), "{report}");
}

#[test]
fn sweep_writes_ordered_rows_with_exact_fractions() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "equal-t10.json", EQUAL_T10);
    let out = dir.path().join("equal-t10.csv");
    ok(&["sweep", "--config", arg(&cfg), "--param", "T_SD", "--values", "10..60:2", "--out", arg(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# scenario_hash="));
    assert_eq!(
        lines.next().unwrap(),
        "swept_value,scheme,dof_numerator,dof_denominator,dof_float,n_r_opt,baseline_dof_float,notes"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 25);
    assert_eq!(&rows[0][..7], ["10", "thm1-equal", "12", "5", "2.4", "1", "2.1"]);
    let swept: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(swept, (10..60).step_by(2).collect::<Vec<_>>());
    for r in &rows {
        let exact = Rational::new(r[2].parse().unwrap(), r[3].parse().unwrap());
        assert_eq!(exact.to_f64(), r[4].parse::<f64>().unwrap());
        assert!(r[4].parse::<f64>().unwrap() >= r[6].parse::<f64>().unwrap());
    }
}

#[test]
fn sweep_over_k_with_several_schemes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "slow-sr.json", EQUAL_T10);
    let text = ok(&["sweep", "--config", arg(&cfg), "--param", "K", "--values", "1,3", "--schemes", "thm2-equal,direct"]);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("1,thm2-equal(K=1),21,10,"));
    assert!(rows[1].starts_with("1,direct,21,10,"));
    assert!(rows[2].starts_with("3,thm2-equal(K=3),12,5,"));
}

#[test]
fn plan_and_simulations_carry_the_header() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "toy.json", TOY);
    let plan = ok(&["plan", "--config", arg(&cfg), "--scheme", "thm1-equal"]);
    assert!(plan.starts_with("# scenario_hash="));
    assert!(plan.contains("slot,transmitter,role,block_sd,block_sr,block_rd\n"));
    assert_eq!(plan.lines().filter(|l| !l.starts_with('#')).count(), 1 + 16);

    let mc = ok(&["mc", "--config", arg(&cfg), "--scheme", "direct", "--snr-db", "10,20", "--trials", "20", "--seed", "4"]);
    assert!(mc.lines().next().unwrap().ends_with(" seed=4"));
    assert!(mc.contains("snr_db,rate,trials,std_err\n10,"));
    assert_eq!(mc, ok(&["mc", "--config", arg(&cfg), "--scheme", "direct", "--snr-db", "10,20", "--trials", "20", "--seed", "4"]));

    let sim = ok(&["simulate", "--config", arg(&cfg), "--scheme", "thm1-equal", "--snr-db", "20", "--intervals", "4"]);
    let row: Vec<&str> = sim.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[0], "20");
    assert_eq!(row[2], "3");
    assert!(row[1].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "toy.json", TOY);
    let bad = write(&dir, "bad.json", "{\"antennas\": ");
    fails(&["dof", "--config", arg(&cfg), "--scheme", "thm1-equal", "--bogus"]);
    fails(&["dof", "--config", arg(&cfg), "--scheme", "thm9"]);
    assert!(fails(&["dof", "--config", arg(&bad), "--scheme", "direct"]).contains("bad.json"));
    fails(&["dof", "--config", "/nonexistent/x.json", "--scheme", "direct"]);
    // T_SR is infinite, so there is no K to read off.
    fails(&["dof", "--config", arg(&cfg), "--scheme", "thm2-equal"]);
    fails(&["sweep", "--config", arg(&cfg), "--param", "T_SD", "--values", "3.5"]);
    fails(&["mc", "--config", arg(&cfg), "--scheme", "direct", "--snr-db", "10", "--trials", "0"]);
}

#[test]
fn shipped_scenarios_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            ok(&["dof", "--config", arg(&path), "--scheme", "direct"]);
            seen += 1;
        }
    }
    assert!(seen >= 5);
    let two = dir.join("two-relay.json");
    assert!(ok(&["dof", "--config", arg(&two), "--scheme", "two-relay"]).contains("\"total\": \"33/20\""));
}
