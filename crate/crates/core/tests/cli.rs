use std::path::Path;
use std::process::{Command, Output};

fn trihex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trihex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn build(dir: &Path) -> String {
    let path = dir.join("t82.lines");
    let p = path.to_str().unwrap().to_string();
    assert_eq!(code(&trihex(&["build", "--q", "2", "--out", &p])), 0);
    p
}

#[test]
fn build_writes_819_records_that_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let p = build(dir.path());
    let text = std::fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("field p=2 k=3 poly=1,1,0,1"));
    assert_eq!(lines.next(), Some("ambient dim=7 mode=twisted"));
    assert_eq!(lines.count(), 819);
    let parsed = trihex::io::parse_line_set(&text).unwrap();
    assert_eq!(
        trihex::io::write_line_set(&parsed.field, &parsed.lines),
        text
    );
}

#[test]
fn verify_passes_and_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = build(dir.path());
    let run = |out: &str| {
        let o = trihex(&[
            "verify",
            "--input",
            &p,
            "--properties",
            "pt,pl,sd,to",
            "--seed",
            "9",
            "--out",
            out,
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run(dir.path().join("a.json").to_str().unwrap());
    let b = run(dir.path().join("b.json").to_str().unwrap());
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["metadata"]["seed"], 9);
    assert_eq!(v["properties"][0]["histogram"]["3"], 2457);
    assert_eq!(v["classes"]["3"]["regulus-solid"], 69888);
}

#[test]
fn verify_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = build(dir.path());
    let o = trihex(&[
        "verify",
        "--input",
        &p,
        "--properties",
        "pt,to",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "property,count,multiplicity\npt,3,2457\nto,819,1\n"
    );
}

#[test]
fn deficient_files_fail_with_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let p = build(dir.path());
    let text = std::fs::read_to_string(&p).unwrap();
    let short: Vec<&str> = text.lines().take(2 + 818).collect();
    let q = dir.path().join("t818.lines");
    std::fs::write(&q, short.join("\n") + "\n").unwrap();
    let q = q.to_str().unwrap();

    let o = trihex(&["verify", "--input", q, "--properties", "pt"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["properties"][0]["verdict"], "fail");
    assert!(!v["properties"][0]["witnesses"]
        .as_array()
        .unwrap()
        .is_empty());

    let o = trihex(&["characterize", "--input", q]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["label"], "rejected-at-(Pt)");

    let e = dir.path().join("empty.lines");
    std::fs::write(
        &e,
        "field p=2 k=3 poly=1,1,0,1\nambient dim=7 mode=twisted\n",
    )
    .unwrap();
    let o = trihex(&[
        "characterize",
        "--input",
        e.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 1);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("1,to,true\n"));
    assert!(out.contains("3,count,false\n"));
}

#[test]
fn exit_codes_for_usage_and_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = build(dir.path());
    assert_eq!(
        code(&trihex(&["verify", "--input", &p, "--properties", "7d"])),
        2
    );
    assert_eq!(code(&trihex(&["build", "--q", "7"])), 2);
    assert_eq!(code(&trihex(&["frobnicate"])), 2);
    assert_eq!(code(&trihex(&["verify", "--input", &p, "--q", "3"])), 2);

    let bad = dir.path().join("bad.lines");
    std::fs::write(
        &bad,
        "field p=2 k=3 poly=1,1,0,1\nambient dim=7\n1 0 0 0 0 0 0 0 1 0 0 0 0 0 0 0\n",
    )
    .unwrap();
    let o = trihex(&["characterize", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(
        code(&trihex(&["verify", "--input", "/nonexistent/x.lines"])),
        3
    );
}

#[test]
fn classify_subspaces_csv_through_planes() {
    let dir = tempfile::tempdir().unwrap();
    let p = build(dir.path());
    let o = trihex(&[
        "classify-subspaces",
        "--input",
        &p,
        "--max-dim",
        "3",
        "--format",
        "csv",
        "--threads",
        "1",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "dim,lines,class,records\n2,3,pencil-plane,2457\n3,3,regulus-solid,69888\n3,5,bipencil-solid,29484\n"
    );
}

#[test]
fn q3_runs_are_budgeted_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t273.lines");
    let p = p.to_str().unwrap();
    assert_eq!(code(&trihex(&["build", "--q", "3", "--out", p])), 0);
    let o = trihex(&["verify", "--input", p, "--properties", "pt,to"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["q"], 3);
    assert_eq!(v["metadata"]["lines"], 26572);
    assert_eq!(v["metadata"]["budget"], trihex::cli::DEFAULT_BUDGET as u64);
    assert_eq!(v["metadata"]["classified"], false);
}
