//! End-to-end tests of the `physarum` binary: exit codes, output shapes,
//! and byte-identical reruns.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_physarum")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn fmt_prints_canonical_form_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "t.phy",
        "X := ((a.0))\n# comment\n(a.0 + (b.0 & c.0))\n",
    );
    let out = run(&["fmt", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "X := a.0\na.0 + b.0 & c.0\n");
    let again = write(dir.path(), "t2.phy", &stdout(&out));
    let out2 = run(&["fmt", again.to_str().unwrap()]);
    assert_eq!(stdout(&out), stdout(&out2));
}

#[test]
fn lts_text_output_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.phy", "a.b.0\n");
    let out = run(&["lts", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "states 3 transitions 2 root 0\n\
         state 0 a.b.0\n\
         state 1 b.0\n\
         state 2 0\n\
         trans 0 a 1 Prefix\n\
         trans 1 b 2 Prefix\n"
    );
}

#[test]
fn lts_dot_output_is_a_digraph() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.phy", "a.0\n");
    let out = run(&["lts", file.to_str().unwrap(), "--dot"]);
    let text = stdout(&out);
    assert!(text.starts_with("digraph lts {"));
    assert!(text.contains("n0 -> n1 [label=\"a (Prefix)\"];"));
}

#[test]
fn lts_respects_scene_and_diffusion_flag() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "s.scene", "universe a b\nC: a := b.0\n");
    let file = write(dir.path(), "t.phy", "C(a)\n");
    let out = run(&[
        "lts",
        file.to_str().unwrap(),
        "--scene",
        scene.to_str().unwrap(),
    ]);
    assert!(stdout(&out).contains("trans 0 b 1 Diffusion"));
}

#[test]
fn bisim_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let l = write(dir.path(), "l.phy", "a.0 + a.0\n");
    let r = write(dir.path(), "r.phy", "a.0\n");
    let out = run(&["bisim", l.to_str().unwrap(), r.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "bisimilar\n");

    let r2 = write(dir.path(), "r2.phy", "b.0\n");
    let out = run(&["bisim", l.to_str().unwrap(), r2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("not bisimilar\n"));
    assert!(text.contains("distinguished by: "));
}

#[test]
fn normalize_applies_the_laws() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.phy", "b.0 + a.0 + 0 + b.0\n");
    let out = run(&["normalize", file.to_str().unwrap()]);
    assert_eq!(stdout(&out), "a.0 + b.0\n");
    let fused = write(dir.path(), "f.phy", "a.b.0 & ~a.~b.0\n");
    let out = run(&["normalize", fused.to_str().unwrap()]);
    assert_eq!(stdout(&out), "0\n");
}

#[test]
fn eval_reports_truth_stream_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    // X = a.X is a one-state loop; the path is the constant stream of
    // state 0, where p holds
    let scene = write(dir.path(), "s.scene", "universe a\nprop p 0 T\n");
    let term = write(dir.path(), "t.phy", "X := a.X\nX\n");
    let formula = write(dir.path(), "f.phi", "p -> p\n");
    let out = run(&[
        "eval",
        formula.to_str().unwrap(),
        term.to_str().unwrap(),
        "--scene",
        scene.to_str().unwrap(),
        "--depth",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("first 4: T T T T"));
    assert!(text.ends_with("verdict: true\n"));

    let falsum = write(dir.path(), "g.phi", "p & !p\n");
    let out = run(&[
        "eval",
        falsum.to_str().unwrap(),
        term.to_str().unwrap(),
        "--scene",
        scene.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).ends_with("verdict: false\n"));
}

#[test]
fn laws_report_is_byte_identical_across_reruns() {
    let a = run(&["laws", "--seed", "0", "--samples", "10"]);
    let b = run(&["laws", "--seed", "0", "--samples", "10"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
    let text = stdout(&a);
    assert_eq!(text.lines().filter(|l| l.starts_with("law ")).count(), 14);
}

#[test]
fn trace_lists_bounded_traces() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.phy", "a.b.0\n");
    let out = run(&["trace", file.to_str().unwrap(), "--max-len", "2"]);
    assert_eq!(stdout(&out), "trace a\ntrace a b\n");
}

#[test]
fn usage_error_exits_2() {
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_input_exits_3() {
    let out = run(&["fmt", "/definitely/not/here.phy"]);
    assert_eq!(out.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "bad.phy", "a. + b\n");
    let out = run(&["fmt", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
