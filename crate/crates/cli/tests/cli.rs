use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn selfaction(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfaction"))
        .current_dir(cwd)
        .env_remove("SELFACTION_CONFIG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn electron_writes_three_panels_and_golden() {
    let tmp = TempDir::new().unwrap();
    let o = selfaction(tmp.path(), &["electron", "--output_dir", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for panel in ["fig1a", "fig1b", "fig1c"] {
        let text = std::fs::read_to_string(tmp.path().join("out").join(format!("{panel}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 401, "{panel}");
        assert!(text.starts_with("s,"));
    }
    let golden = std::fs::read_to_string(tmp.path().join("out/series.golden")).unwrap();
    let checked_in = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/golden/series.golden")).unwrap();
    assert_eq!(golden, checked_in);
    let join: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/join_report.json")).unwrap()).unwrap();
    assert!(join["joins"].as_array().unwrap().iter().all(|j| j["smooth"] == true));
}

#[test]
fn writes_only_into_output_dir() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&selfaction(tmp.path(), &["neutrino-mass", "--output_dir", "only"])), 0);
    let entries: Vec<_> = std::fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries, vec![std::ffi::OsString::from("only")]);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_execution_modes() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&selfaction(tmp.path(), &["electron", "--output_dir", "a"])), 0);
    assert_eq!(code(&selfaction(tmp.path(), &["electron", "--output_dir", "b", "--execution", "sequential"])), 0);
    assert_eq!(code(&selfaction(tmp.path(), &["neutrino-mass", "--output_dir", "a"])), 0);
    assert_eq!(code(&selfaction(tmp.path(), &["neutrino-mass", "--output_dir", "b", "--execution", "sequential"])), 0);
    for f in ["fig1a.csv", "fig1b.csv", "fig1c.csv", "condition_audit.csv", "neutrino_mass.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn closed_form_mass_in_window_and_alpha_override_lowers_it() {
    let tmp = TempDir::new().unwrap();
    let read = |dir: &str| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join(dir).join("neutrino_mass.json")).unwrap()).unwrap()
    };
    assert_eq!(code(&selfaction(tmp.path(), &["neutrino-mass", "--output_dir", "ref"])), 0);
    let o = selfaction(tmp.path(), &["neutrino-mass", "--output_dir", "small", "--alpha", "1e-4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let reference = read("ref")["closed_form"]["m_nu_ev"].as_f64().unwrap();
    assert!((1.75..=1.78).contains(&reference), "{reference}");
    let small = read("small");
    assert!(small["closed_form"]["m_nu_ev"].as_f64().unwrap() < reference);
    assert!(small["exact"]["m_nu_ev"].as_f64().unwrap() < read("ref")["exact"]["m_nu_ev"].as_f64().unwrap());
}

#[test]
fn invalid_constants_file_exits_2() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("bad.txt"), "m_e_eV = banana\n").unwrap();
    let o = selfaction(tmp.path(), &["electron", "--constants_file", "bad.txt", "--output_dir", "out"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("m_e_eV"), "{}", stderr(&o));
    let missing = selfaction(tmp.path(), &["electron", "--constants_file", "nope.txt"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn empty_scan_exits_2() {
    let tmp = TempDir::new().unwrap();
    let o = selfaction(tmp.path(), &["proton-scan", "--n_points", "0", "--output_dir", "out"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("empty proton scan"));
}

#[test]
fn missing_bracket_exits_3() {
    let tmp = TempDir::new().unwrap();
    let o = selfaction(tmp.path(), &["neutrino-mass", "--eta_lo", "0.5", "--eta_hi", "0.6", "--output_dir", "out"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("run.cfg"), "orderr = 2\n").unwrap();
    let o = selfaction(tmp.path(), &["config", "--config", "run.cfg"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("orderr"));
}

#[test]
fn flags_override_file_and_env_supplies_default_file() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("run.cfg"), "order = 2\ngrid_points = 50\n").unwrap();
    let o = selfaction(tmp.path(), &["config", "--config", "run.cfg", "--order", "1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("order = 1\n") && text.contains("grid_points = 50\n"), "{text}");

    let env = Command::new(env!("CARGO_BIN_EXE_selfaction"))
        .current_dir(tmp.path())
        .env("SELFACTION_CONFIG", "run.cfg")
        .arg("config")
        .output()
        .unwrap();
    assert_eq!(code(&env), 0);
    assert!(stdout(&env).contains("order = 2\n"));
}

#[test]
fn proton_scan_writes_table_and_report() {
    let tmp = TempDir::new().unwrap();
    let o = selfaction(
        tmp.path(),
        &["proton-scan", "--n_points", "2", "--coulomb_sign", "plus", "--output_dir", "out"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("out/proton_scan.csv")).unwrap();
    assert!(csv.starts_with("n,coulomb_sign,s0,condition_value,self_energy,eta_root,implied_mass_ratio,error\n"));
    // n = 0, 1/14, 1/11, 1/9, 1/7
    assert_eq!(csv.lines().count(), 6);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/proton_report.json")).unwrap()).unwrap();
    assert_eq!(report["label"], "exploratory");
}

#[test]
fn verify_list_runs_nothing() {
    let tmp = TempDir::new().unwrap();
    let o = selfaction(tmp.path(), &["verify", "--list"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 13);
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn verify_selected_criteria_pass() {
    let tmp = TempDir::new().unwrap();
    let o = selfaction(tmp.path(), &["verify", "--criterion", "1", "--criterion", "4", "--criterion", "10"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn corrupted_golden_fails_naming_the_criterion() {
    let tmp = TempDir::new().unwrap();
    let good = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/golden/series.golden")).unwrap();
    std::fs::write(tmp.path().join("bad.golden"), good.replace("G1 = -1/12", "G1 = -1/13")).unwrap();
    let o = selfaction(
        tmp.path(),
        &["verify", "--golden_file", "bad.golden", "--criterion", "1", "--criterion", "2"],
    );
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("FAIL  1") && l.contains("golden G1")), "{out}");
    assert!(out.lines().any(|l| l.starts_with("PASS  2")), "{out}");
}
