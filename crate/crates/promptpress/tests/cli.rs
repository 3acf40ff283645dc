//! Black-box tests of the `promptpress` binary: JSONL in, JSONL out, exit codes by error
//! class (1 configuration, 2 I/O and malformed input, 3 scorer backends).

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_promptpress"))
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn promptpress");
    // a write error here means the process exited before draining stdin (e.g. config
    // errors), which is exactly what some tests provoke
    let _ = child.stdin.as_mut().unwrap().write_all(stdin.as_bytes());
    child.wait_with_output().unwrap()
}

fn record(documents: &[&str], question: &str) -> String {
    serde_json::json!({
        "instruction": "Answer from the passages.",
        "documents": documents,
        "question": question,
    })
    .to_string()
}

const DOCS: [&str; 3] = [
    "The annual eclipse festival drew crowds to the northern valley every August without fail.",
    "Vendors sold smoked trout and paper lanterns along the river road during the festival.",
    "The valley floods in spring, so the festival has always been held in late summer instead.",
];

#[test]
fn compress_emits_one_json_line_per_record() {
    let input = format!(
        "{}\n{}\n",
        record(&DOCS, "when is the festival held"),
        record(&DOCS, "what do the vendors sell")
    );
    let out = run_with_stdin(&["compress", "--ratio", "2"], &input);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let report = &v["report"];
        assert!(v["compressed"].is_string());
        assert!(report["compressed_tokens"].as_u64().unwrap() <= report["target_tokens"].as_u64().unwrap());
        let origin_map = v["origin_map"].as_array().unwrap();
        assert_eq!(origin_map.len() as u64, report["compressed_tokens"].as_u64().unwrap());
        // each origin entry is a ["section", index] pair
        assert!(origin_map.iter().all(|o| o[0].is_string() && o[1].is_u64()));
    }

    let table = String::from_utf8(out.stderr).unwrap();
    assert!(table.contains("tokens"), "human summary goes to stderr, got: {table}");
}

#[test]
fn malformed_record_reports_its_line_number_and_exits_2() {
    let input = format!("{}\nnot json\n", record(&DOCS, "when"));
    let out = run_with_stdin(&["compress", "--ratio", "2"], &input);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn unknown_record_field_is_rejected() {
    let input = r#"{"documents":["a"],"question":"q","bogus":1}"#;
    let out = run_with_stdin(&["compress", "--ratio", "2"], input);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 1"), "stderr: {stderr}");
}

#[test]
fn target_and_ratio_together_exit_1() {
    let out = run_with_stdin(&["compress", "--target", "50", "--ratio", "2"], "");
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("--target") && stderr.contains("--ratio"), "stderr: {stderr}");
}

#[test]
fn no_budget_at_all_exits_1() {
    let out = run_with_stdin(&["compress"], &record(&DOCS, "when"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_file_exits_2() {
    let out = bin()
        .args(["compress", "--ratio", "2", "/nonexistent/input.jsonl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_supplies_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"ratio": 2.0, "reorder": false}"#).unwrap();

    let out = run_with_stdin(
        &["--config", path.to_str().unwrap(), "compress"],
        &record(&DOCS, "when is the festival held"),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"ratio": 2.0, "not_a_key": true}"#).unwrap();

    let out = run_with_stdin(
        &["--config", path.to_str().unwrap(), "compress"],
        &record(&DOCS, "when"),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn inline_scorer_override_is_validated() {
    let ok = run_with_stdin(
        &["--scorer", r#"{"kind":"builtin"}"#, "compress", "--ratio", "2"],
        &record(&DOCS, "when is the festival held"),
    );
    assert!(ok.status.success(), "stderr: {}", String::from_utf8_lossy(&ok.stderr));

    let bad = run_with_stdin(
        &["--scorer", r#"{"kind":"segfault"}"#, "compress", "--ratio", "2"],
        &record(&DOCS, "when"),
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn rank_reports_hits_when_gold_is_known() {
    let mut rec: serde_json::Value = serde_json::from_str(&record(&DOCS, "what do vendors sell along the river road")).unwrap();
    rec["gold_doc_index"] = serde_json::json!(1);
    let out = run_with_stdin(&["rank"], &rec.to_string());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap())
            .unwrap();
    let ranking = v["ranking"].as_array().unwrap();
    assert_eq!(ranking.len(), DOCS.len());
    assert!(ranking[0]["importance"].is_f64());
    assert_eq!(v["gold_doc_index"], 1);
    assert!(v["hit_at_1"].is_boolean());
}

#[test]
fn recover_maps_a_response_back_through_the_origin_map() {
    // compress first to obtain a real origin map
    let out = run_with_stdin(
        &["compress", "--ratio", "2"],
        &record(&DOCS, "when is the festival held"),
    );
    assert!(out.status.success());
    let compressed: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap())
            .unwrap();

    // the short instruction survives whole at its keep rate, so replaying it as the
    // response must recover verbatim with provenance attached
    let recover_input = serde_json::json!({
        "instruction": "Answer from the passages.",
        "documents": DOCS,
        "question": "when is the festival held",
        "origin_map": compressed["origin_map"],
        "response": "Answer from the passages.",
    })
    .to_string();
    let out = run_with_stdin(&["recover"], &recover_input);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap())
            .unwrap();
    assert_eq!(v["recovered"], "Answer from the passages.");
    assert!(v["segments"].as_array().unwrap().iter().any(|s| !s["origin"].is_null()));
}

#[test]
fn bench_output_is_byte_deterministic() {
    let args = ["bench", "--synthetic", "4", "--seed", "9", "--ratio", "3"];
    let first = run_with_stdin(&args, "");
    let second = run_with_stdin(&args, "");
    assert!(first.status.success(), "stderr: {}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout, "bench rows must not vary run to run");

    let stdout = String::from_utf8(first.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 4);
    for line in stdout.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["compressed_tokens"].as_u64().unwrap() <= v["target_tokens"].as_u64().unwrap());
        assert!(v.get("answered").is_none(), "no llm configured, no answer column");
    }
}
