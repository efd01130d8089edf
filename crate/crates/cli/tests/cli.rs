use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn eidoku(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eidoku"))
        .args(args)
        .env_remove("EIDOKU_PROVIDER")
        .output()
        .expect("spawn eidoku")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(eidoku(&["--help"]).status.code(), Some(0));
    assert_eq!(eidoku(&["--version"]).status.code(), Some(0));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(eidoku(&["verify", "--bogus"]).status.code(), Some(1));
}

#[test]
fn defaults_round_trip_as_config() {
    let dir = TempDir::new().unwrap();
    let out = eidoku(&["defaults"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("percentile_p = 95"));
    let cfg = write(dir.path(), "gate.conf", &text);
    let ctx = write(dir.path(), "ctx.txt", "A is B.\nB is C.\n");
    let cand = write(dir.path(), "cand.txt", "Therefore A is C\n");
    let o = eidoku(&[
        "verify",
        "--context",
        s(&ctx),
        "--candidates",
        s(&cand),
        "--config",
        s(&cfg),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn bad_config_line_is_reported() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "gate.conf", "window_w = 10\nno_such_key = 1\n");
    let ctx = write(dir.path(), "ctx.txt", "A is B.\n");
    let cand = write(dir.path(), "cand.txt", "A is B\n");
    let o = eidoku(&[
        "verify",
        "--context",
        s(&ctx),
        "--candidates",
        s(&cand),
        "--config",
        s(&cfg),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":2"), "{}", stderr(&o));
}

#[test]
fn verify_demo_selects_first_and_writes_trace() {
    let dir = TempDir::new().unwrap();
    let ctx = write(dir.path(), "ctx.txt", "A is B.\nB is C.\n");
    let cand = write(
        dir.path(),
        "cand.txt",
        "Therefore A is C\nTherefore A is a fish\n",
    );
    let out = dir.path().join("verdict.json");
    let trace = dir.path().join("trace.tsv");
    let o = eidoku(&[
        "verify",
        "--context",
        s(&ctx),
        "--candidates",
        s(&cand),
        "--out",
        s(&out),
        "--trace-out",
        s(&trace),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["selected"], 0);
    assert_eq!(v["candidates"][1]["reject_reason"], "barrier");
    assert!(dir.path().join("verdict.json.manifest.json").exists());
    let t = fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("candidate\tstep\tT_k\ttau_c\n"));
    assert!(t.contains("\ninf\t") || t.contains("\tinf\t"));
}

#[test]
fn refusal_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ctx = write(dir.path(), "ctx.txt", "A is B.\nB is C.\n");
    let cand = write(dir.path(), "cand.txt", "Therefore A is a fish\nC is A\n");
    let args = ["verify", "--context", s(&ctx), "--candidates", s(&cand)];
    let o = eidoku(&args);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["selected"], "refused");
    let mut strict = args.to_vec();
    strict.push("--strict-exit");
    assert_eq!(eidoku(&strict).status.code(), Some(2));
}

#[test]
fn multi_step_candidates_use_separator() {
    let dir = TempDir::new().unwrap();
    let ctx = write(dir.path(), "ctx.txt", "A is B.\nB is C.\nC is D.\n");
    let cand = write(
        dir.path(),
        "cand.txt",
        "A is C || C is D || Therefore, A is D.\n",
    );
    let o = eidoku(&["verify", "--context", s(&ctx), "--candidates", s(&cand)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        v["candidates"][0]["junction_costs"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
}

#[test]
fn parse_errors_name_lines() {
    let dir = TempDir::new().unwrap();
    let ctx = write(
        dir.path(),
        "ctx.txt",
        "A is B.\n\nnonsense here\nB is C.\nalso bad\n",
    );
    let cand = write(dir.path(), "cand.txt", "A is C\n");
    let o = eidoku(&["verify", "--context", s(&ctx), "--candidates", s(&cand)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line(s) 3, 5"), "{}", stderr(&o));
}

#[test]
fn empty_candidates_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let ctx = write(dir.path(), "ctx.txt", "A is B.\n");
    let cand = write(dir.path(), "cand.txt", "\n\n");
    let o = eidoku(&["verify", "--context", s(&ctx), "--candidates", s(&cand)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_rgd_zero_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("d.jsonl");
    assert_eq!(
        eidoku(&["gen-rgd", "--n", "0", "--out", s(&out)])
            .status
            .code(),
        Some(1)
    );
    assert!(!out.exists());
}

#[test]
fn gen_rgd_then_bench_sweep_correlate() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("d.jsonl");
    let o = eidoku(&["gen-rgd", "--n", "30", "--seed", "3", "--out", s(&data)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&data).unwrap().lines().count(), 30);
    assert!(dir.path().join("d.jsonl.report.json").exists());
    assert!(dir.path().join("d.jsonl.manifest.json").exists());

    let report = dir.path().join("bench.json");
    let o = eidoku(&[
        "bench",
        "--dataset",
        s(&data),
        "--methods",
        "eidoku,prob",
        "--b-resamples",
        "50",
        "--out",
        s(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["methods"][0]["ftar"], 0.0);
    assert_eq!(r["methods"][0]["ttar"], 1.0);

    let grid = dir.path().join("sweep.tsv");
    let o = eidoku(&[
        "sweep",
        "--dataset",
        s(&data),
        "--p-range",
        "90:92:1",
        "--delta-range",
        "0.1:0.2:0.1",
        "--out",
        s(&grid),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(&grid).unwrap().lines().count(),
        1 + 3 * 2
    );

    let corr = dir.path().join("corr.json");
    let o = eidoku(&["correlate", "--dataset", s(&data), "--out", s(&corr)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c: serde_json::Value = serde_json::from_str(&fs::read_to_string(&corr).unwrap()).unwrap();
    assert!(c["split_count"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_method_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("d.jsonl");
    assert_eq!(
        eidoku(&["gen-rgd", "--n", "2", "--out", s(&data)])
            .status
            .code(),
        Some(0)
    );
    let o = eidoku(&[
        "bench",
        "--dataset",
        s(&data),
        "--methods",
        "eidoku,magic",
        "--out",
        "x.json",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unreachable_provider_exits_three() {
    let dir = TempDir::new().unwrap();
    let ctx = write(dir.path(), "ctx.txt", "A is B.\n");
    let cand = write(dir.path(), "cand.txt", "A is B\n");
    let o = Command::new(env!("CARGO_BIN_EXE_eidoku"))
        .args(["verify", "--context", s(&ctx), "--candidates", s(&cand)])
        .env("EIDOKU_PROVIDER", "tcp:127.0.0.1:1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn command_provider_matches_builtin() {
    let dir = TempDir::new().unwrap();
    let ctx = write(dir.path(), "ctx.txt", "A is B.\nB is C.\n");
    let cand = write(
        dir.path(),
        "cand.txt",
        "Therefore A is C\nTherefore A is a fish\n",
    );
    let args = ["verify", "--context", s(&ctx), "--candidates", s(&cand)];
    let builtin = eidoku(&args);
    let external = Command::new(env!("CARGO_BIN_EXE_eidoku"))
        .args(args)
        .env(
            "EIDOKU_PROVIDER",
            format!("command:{} provider-stdio", env!("CARGO_BIN_EXE_eidoku")),
        )
        .output()
        .unwrap();
    assert_eq!(external.status.code(), Some(0), "{}", stderr(&external));
    let a: serde_json::Value = serde_json::from_slice(&builtin.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&external.stdout).unwrap();
    assert_eq!(a, b);
}
