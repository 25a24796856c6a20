use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_negdep"))
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn out_path(name: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, Value, Output) {
    let out = bin().args(args).output().unwrap();
    let code = out.status.code().unwrap();
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, json, out)
}

const M2N2: &str = r#"{"balls": 2, "urns": 2, "probs": [["1/2", "1/2"], ["1/2", "1/2"]]}"#;

#[test]
fn scp_example_fails_with_half_and_zero() {
    let model = scratch("scp-example.json", M2N2);
    let (code, report, _) = run(&["check", &model, "--prop", "scp", "--d", "1"]);
    assert_eq!(code, 1);
    let r = &report["results"][0];
    assert_eq!(r["verdict"], "fail");
    assert_eq!(r["witness"]["kind"], "covering");
    assert_eq!(r["witness"]["given_a"], "1/2");
    assert_eq!(r["witness"]["given_b"], "0/1");
}

#[test]
fn cna_and_nmp_pass_on_uniform_two_by_two() {
    let model = scratch("m2n2.json", M2N2);
    assert_eq!(run(&["check", &model, "--prop", "cna-occ"]).0, 0);
    assert_eq!(run(&["check", &model, "--prop", "nmp", "--d", "1"]).0, 0);
    assert_eq!(run(&["check", &model, "--prop", "cna-enum,nc,cnc,fm,cfm,nmp-ball", "--a", "1"]).0, 0);
}

#[test]
fn witnesses_replay_and_tampering_is_caught() {
    let model = scratch("replay-model.json", M2N2);
    let report = out_path("replay-report.json");
    let (code, _, _) = run(&["check", &model, "--prop", "scp", "--d", "1", "--out", &report]);
    assert_eq!(code, 1);
    let witness = out_path("replay-report.scp-ball-set-occ.witness.json");
    let (code, summary, _) = run(&["check", "--replay", &witness]);
    assert_eq!(code, 0);
    assert_eq!(summary["all_confirmed"], true);
    assert_eq!(run(&["check", "--replay", &report]).0, 0);

    // Swap the conditioning values: b = {} is not a superset of a = {1}.
    let mut w: Value = serde_json::from_str(&fs::read_to_string(&witness).unwrap()).unwrap();
    w["witness"]["a"] = serde_json::json!([1]);
    w["witness"]["b"] = serde_json::json!([]);
    let tampered = scratch("tampered.json", &w.to_string());
    let (code, summary, _) = run(&["check", "--replay", &tampered]);
    assert_eq!(code, 1);
    assert_eq!(summary["all_confirmed"], false);
}

#[test]
fn input_errors_exit_two() {
    let junk = scratch("junk.json", "not json");
    assert_eq!(run(&["check", &junk]).0, 2);
    let bad_rows = scratch("bad-rows.json", r#"{"probs": [["1/2", "1/3"]]}"#);
    assert_eq!(run(&["check", &bad_rows]).0, 2);
    let model = scratch("m2n2-errors.json", M2N2);
    assert_eq!(run(&["check", &model, "--prop", "nmp"]).0, 2);
    assert_eq!(run(&["check", &model, "--prop", "bogus"]).0, 2);
    assert_eq!(run(&["check", &model, "--prop", "ulc-enum"]).0, 2);
    assert_eq!(run(&["refine", &model, "--d", "2"]).0, 2);
    let config = scratch("bad-sweep.json", r#"{"balls": [3, 1]}"#);
    assert_eq!(run(&["sweep", &config]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
}

#[test]
fn ulc_and_rayleigh_on_the_occupation_measure() {
    // Ordinary model whose occupation measure is not Rayleigh.
    let model = scratch(
        "rayleigh.json",
        r#"{"balls": 3, "urns": 3, "probs": [["1/5","1/5","3/5"],["1/5","1/5","3/5"],["1/5","1/5","3/5"]]}"#,
    );
    let (code, report, _) = run(&["check", &model, "--prop", "ulc,rayleigh"]);
    assert_eq!(code, 1);
    assert_eq!(report["results"][0]["verdict"], "pass");
    assert_eq!(report["results"][1]["verdict"], "fail");
    assert_eq!(report["results"][1]["witness"]["kind"], "thresholds");
}

#[test]
fn interval_and_refined_targets() {
    let model = scratch("m2n2-targets.json", M2N2);
    let (code, report, _) = run(&["check", &model, "--prop", "cna-interval", "--cutpoints", "0,1,3;0,2,3"]);
    assert_eq!(code, 0);
    assert_eq!(report["results"][0]["target"]["kind"], "interval");
    let (code, _, _) = run(&["check", &model, "--prop", "cnc-refined,cfm-refined,cna-refined", "--d", "1"]);
    assert_eq!(code, 0);
    assert_eq!(run(&["check", &model, "--prop", "cna-interval", "--cutpoints", "0,1;0,3"]).0, 2);
}

#[test]
fn orient_triple_edge_both_modes_agree() {
    let g = scratch("triple.json", r#"{"vertices": 2, "edges": [[1, 2], [1, 2], [1, 2]]}"#);
    let (code, report, _) = run(&["orient", &g, "--d", "1", "--mode", "both"]);
    assert_eq!(code, 0);
    assert_eq!(report["agree"], true);
    let table = report["table"].as_array().unwrap();
    assert_eq!(table.len(), 8);
    for row in table {
        assert_eq!(row["brute"], row["rec"]);
    }
}

#[test]
fn orient_loop_at_last_vertex_is_all_zero() {
    let g = scratch("loop-last.json", r#"{"vertices": 2, "edges": [[1, 2], [2, 2], [1, 2]]}"#);
    for mode in ["brute", "rec"] {
        let (code, report, _) = run(&["orient", &g, "--d", "1", "--mode", mode]);
        assert_eq!(code, 0);
        assert!(report["table"].as_array().unwrap().iter().all(|r| r["count"] == 0));
    }
}

#[test]
fn orient_degree_mismatch_is_zero_with_note() {
    let g = scratch("triangle.json", r#"{"vertices": 3, "edges": [[1, 2], [1, 3], [2, 3]]}"#);
    let (code, report, _) = run(&["orient", &g, "--a", "2", "--mode", "both"]);
    assert_eq!(code, 0);
    assert!(report["note"].as_str().unwrap().contains("deg"));
    assert!(report["table"].as_array().unwrap().iter().all(|r| r["brute"] == 0 && r["rec"] == 0));
}

#[test]
fn orient_rejects_bad_graphs_and_budgets() {
    let g = scratch("bad-edge.json", r#"{"vertices": 2, "edges": [[2, 1]]}"#);
    assert_eq!(run(&["orient", &g, "--d", "1"]).0, 2);
    let g = scratch("five-edges.json", r#"{"vertices": 3, "edges": [[1,2],[1,2],[1,3],[2,3],[1,3]]}"#);
    assert_eq!(run(&["orient", &g, "--d", "1", "--mode", "brute", "--cap", "4"]).0, 2);
    assert_eq!(run(&["orient", &g, "--d", "3"]).0, 2);
}

#[test]
fn refine_two_by_two() {
    let model = scratch("refine.json", M2N2);
    let (code, report, _) = run(&["refine", &model, "--d", "1"]);
    assert_eq!(code, 0);
    assert_eq!(report["refined_urns"], 3);
    assert_eq!(report["consistent"], true);
    assert_eq!(report["blocks"], serde_json::json!([[1], [2, 3]]));
    assert_eq!(report["model"]["urns"], 3);
    let (_, report, _) = run(&["refine", &model, "--d", "0"]);
    assert_eq!(report["refined_urns"], 4);
}

#[test]
fn sweep_is_clean_and_deterministic() {
    let config = scratch(
        "sweep.json",
        r#"{"balls": [1, 3], "urns": [1, 3], "random": 3, "seed": 5,
            "properties": ["cna-occ", "nmp-occ", "nmp-ball", "cert", "orient-nmp"],
            "graphs": {"count": 30, "max_vertices": 4, "max_edges": 5}}"#,
    );
    let (code, summary, first) = run(&["sweep", &config]);
    assert_eq!(code, 0);
    assert_eq!(summary["violations"], serde_json::json!([]));
    assert_eq!(summary["models"], 180);
    assert!(summary["checks"].as_u64().unwrap() > 1000);
    let (_, _, second) = run(&["sweep", &config]);
    assert_eq!(first.stdout, second.stdout);
    let (_, other, _) = run(&["sweep", &config, "--seed", "6"]);
    assert_eq!(other["seed"], 6);
}

#[test]
fn showcase_examples_reproduce() {
    let (code, report, first) = run(&["paper-examples"]);
    assert_eq!(code, 0);
    assert_eq!(report["scp"]["given_ball1_absent"], "1/2");
    assert_eq!(report["scp"]["given_ball1_present"], "0/1");
    assert_eq!(report["scp"]["check"]["verdict"], "fail");
    assert_eq!(report["refinement"]["refined_urns"], 3);
    assert_eq!(report["refinement"]["consistent"], true);
    assert_eq!(report["rayleigh_ordinary"]["found"], true);
    assert_eq!(report["rayleigh_ordinary"]["reverified"], true);
    assert_eq!(report["ulc_generalized"]["found"], true);
    assert_eq!(report["ulc_generalized"]["reverified"], true);
    let (_, _, second) = run(&["paper-examples"]);
    assert_eq!(first.stdout, second.stdout);
}
