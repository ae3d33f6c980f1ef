//! End-to-end checks of the command-line surface: flows, flags, exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use suggestion_auctions::cli::document::ProfileDocument;
use suggestion_auctions::modular::StrategyProfile;
use suggestion_auctions::{analysis::gen_running_shoes, Rat, Scalar};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_suggestion-auctions"))
}

fn gen(dir: &tempfile::TempDir, family: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(format!("{family}.json"));
    let out = bin()
        .args(["gen", "--family", family, "--out"])
        .arg(&path)
        .args(extra)
        .output()
        .unwrap();
    assert!(out.status.success(), "gen {family}: {}", String::from_utf8_lossy(&out.stderr));
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn run_direct_rejects_bid_arity_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let shoes = gen(&dir, "running-shoes", &[]);
    let out = bin().arg("run-direct").arg(&shoes).args(["--bids", "50"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected 2 bids"));
}

#[test]
fn run_direct_structured_output_carries_exact_and_decimal() {
    let dir = tempfile::tempdir().unwrap();
    let shoes = gen(&dir, "running-shoes", &[]);
    let out = bin()
        .arg("run-direct")
        .arg(&shoes)
        .args(["--truthful", "--format", "structured"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["chosen_question"], "terrain");
    assert_eq!(body["expected_welfare"]["exact"], "24");
    assert_eq!(body["advertisers"][0]["expected_utility"]["exact"], "15");
}

#[test]
fn tie_flag_flips_indifferent_selection() {
    let dir = tempfile::tempdir().unwrap();
    let shoes = gen(&dir, "running-shoes", &[]);
    // advertiser 1 alone is indifferent between the two questions
    let run = |ties: &[&str]| {
        let mut cmd = bin();
        cmd.arg("run-direct").arg(&shoes).args(["--bids", "50,0", "--format", "structured"]);
        for t in ties {
            cmd.args(["--ties", t]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        body["chosen_question"].as_str().unwrap().to_string()
    };
    assert_eq!(run(&[]), "terrain");
    assert_eq!(run(&["targeted"]), "targeted");
}

#[test]
fn run_modular_accepts_profile_files_and_reports_missing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let shoes = gen(&dir, "running-shoes", &[]);
    let game = gen_running_shoes::<Rat>().reduce().unwrap();
    let values = game.base_values();
    let mut profile = StrategyProfile::constant_stage2(&game, &values).unwrap();
    profile.advertisers[0].stage1 = vec![Rat::from_int(21), Rat::from_int(20)];
    profile.advertisers[1].stage1 = vec![Rat::from_int(9), Rat::from_int(12)];
    let doc = ProfileDocument::from_profile(&game, &profile);
    let profile_path = dir.path().join("profile.json");
    std::fs::write(&profile_path, doc.to_json()).unwrap();

    let out = bin()
        .arg("run-modular")
        .arg(&shoes)
        .arg("--profile")
        .arg(&profile_path)
        .args(["--format", "structured"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["chosen_question"], "targeted");
    assert_eq!(body["stage1_payments"][0]["exact"], "0");
    assert_eq!(body["stage1_payments"][1]["exact"], "1");
    assert_eq!(body["per_signal"][1]["stage2_payment"]["exact"], "5");

    let mut broken = doc.clone();
    broken.advertisers[1].stage2.get_mut("targeted").unwrap().remove("no-click");
    std::fs::write(&profile_path, broken.to_json()).unwrap();
    let out = bin().arg("run-modular").arg(&shoes).arg("--profile").arg(&profile_path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("stage2[targeted][no-click]"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn run_modular_prescribed_picks_terrain_on_running_shoes() {
    let dir = tempfile::tempdir().unwrap();
    let shoes = gen(&dir, "running-shoes", &[]);
    let out = bin()
        .arg("run-modular")
        .arg(&shoes)
        .args(["--prescribed", "--format", "structured"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["chosen_question"], "terrain");
    assert_eq!(body["expected_welfare"]["exact"], "24");
    // stage-1 sums 24 vs 33/2
    assert_eq!(body["stage1_bids"][0]["bids"][0]["exact"], "15");
    assert_eq!(body["stage1_bids"][1]["bids"][0]["exact"], "45/4");
}

#[test]
fn proxy_flow_reproduces_the_manipulation() {
    let dir = tempfile::tempdir().unwrap();
    let prop1 = gen(&dir, "prop1", &[]);

    let out = bin().arg("validate").arg(&prop1).output().unwrap();
    assert_eq!(out.status.code(), Some(0));

    let out = bin()
        .arg("run-modular")
        .arg(&prop1)
        .args(["--proxy", "10,10", "--format", "structured"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["chosen_question"], "B");
    assert_eq!(body["expected_utility"][1]["exact"], "0");

    let out = bin()
        .arg("run-modular")
        .arg(&prop1)
        .args(["--proxy", "10,20", "--format", "structured"])
        .output()
        .unwrap();
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["chosen_question"], "A");
    assert_eq!(body["stage1_payments"][1]["exact"], "3");
    assert_eq!(body["expected_utility"][1]["exact"], "1");

    let out = bin()
        .arg("verify")
        .arg(&prop1)
        .args(["--mechanism", "modular", "--proxy-grid", "10,20"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("deviation-found"));
}

#[test]
fn verify_flows_exit_zero_on_verified_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let shoes = gen(&dir, "running-shoes", &[]);
    let out = bin().arg("verify").arg(&shoes).args(["--mechanism", "direct"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("no-profitable-deviation-found"));

    let poa3 = gen(&dir, "poa", &["--m", "3"]);
    let out = bin()
        .arg("verify")
        .arg(&poa3)
        .args(["--mechanism", "modular", "--prescribed"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("complete"));

    let out = bin()
        .arg("verify")
        .arg(&poa3)
        .args(["--mechanism", "direct", "--grid", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn poa_sweep_validates_parameters_and_emits_rows() {
    let out = bin().args(["poa-sweep", "--m-from", "2", "--m-to", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .args(["poa-sweep", "--m-from", "3", "--m-to", "5", "--format", "structured"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = body["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["ratio"]["exact"], "27/25");
    assert_eq!(rows[0]["optimal_welfare"]["exact"], "1");

    let out = bin()
        .args([
            "poa-sweep",
            "--m-from",
            "30",
            "--m-to",
            "30",
            "--rule",
            "all-pay",
            "--ties",
            "uninformative",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("13500/1349"));
}

#[test]
fn sample_is_seed_deterministic_and_needs_states() {
    let dir = tempfile::tempdir().unwrap();
    let shoes = gen(&dir, "running-shoes", &[]);
    let run = |seed: &str| {
        let out = bin()
            .arg("sample")
            .arg(&shoes)
            .args(["--seed", seed, "--format", "structured"])
            .output()
            .unwrap();
        assert!(out.status.success());
        stdout(&out)
    };
    assert_eq!(run("7"), run("7"));
    let body: serde_json::Value = serde_json::from_str(&run("7")).unwrap();
    assert_eq!(body["question"], "terrain");

    let prop1 = gen(&dir, "prop1", &[]);
    let out = bin().arg("sample").arg(&prop1).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("state-backed"));
}

#[test]
fn run_direct_picks_the_revealing_question_on_the_poa_instance() {
    let dir = tempfile::tempdir().unwrap();
    let poa3 = gen(&dir, "poa", &["--m", "3", "--delta", "1/9"]);
    let body: serde_json::Value = serde_json::from_str(&stdout(&bin()
        .arg("run-direct")
        .arg(&poa3)
        .args(["--truthful", "--format", "structured"])
        .output()
        .unwrap()))
    .unwrap();
    assert_eq!(body["chosen_question"], "revealing");
    assert_eq!(body["expected_welfare"]["exact"], "1");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&poa3).unwrap()).unwrap();
    assert_eq!(doc["states"].as_array().unwrap().len(), 3);
    assert_eq!(doc["questions"].as_array().unwrap().len(), 2);
    assert_eq!(doc["advertisers"].as_array().unwrap().len(), 3);
}

#[test]
fn gen_rejects_bad_family_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("poa.json");
    let out = bin()
        .args(["gen", "--family", "poa", "--m", "2", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .args(["gen", "--family", "poa", "--m", "3", "--delta", "9/8", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().args(["gen", "--family", "poa", "--out"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
