#![allow(clippy::needless_range_loop)]

use matlang_testkit::oracles::warshall;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn matlang(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matlang"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MATLANG_EPS")
        .env_remove("MATLANG_DELTA")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn closure_of_a_path_matches_warshall() {
    let out = matlang(
        &["eval", "-p", "programs/transitive_closure.mtl", "-i", "programs/samples/closure.inst"],
        &repo(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut adj = vec![vec![false; 4]; 4];
    for k in 0..3 {
        adj[k][k + 1] = true;
    }
    let expected = warshall(&adj, false);
    let rows = csv_rows(&stdout(&out));
    assert_eq!(stdout(&out).lines().next(), Some("4,4"));
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(rows[i][j] == "1", expected[i][j], "({i},{j})");
        }
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.mtl", "A . B\n");
    write(dir.path(), "bad.mts", "A : a x b\nB : a x b\n");
    let out = matlang(&["typecheck", "-p", "bad.mtl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MulDimMismatch"));

    write(dir.path(), "ok.mtl", "A^* . B\n");
    write(dir.path(), "ok.mts", "A : a x b\nB : a x b\n");
    let out = matlang(&["typecheck", "-p", "ok.mtl"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "b x b");
}

#[test]
fn smt_script_for_the_identity_query() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "id.mtl", "A\n");
    write(dir.path(), "id.mts", "A : a x a\n");
    let out = matlang(&["emit-smt", "-p", "id.mtl", "--sigma", "a=1"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("(set-logic NRA)\n"));
    assert_eq!(text.matches("(declare-const").count(), 4);
    assert!(text.contains("(assert (= y_1_1_re x_A_1_1_re))"));
    assert!(text.trim_end().ends_with("(check-sat)"));

    let out = matlang(&["emit-smt", "-p", "id.mtl", "--sigma", "a=zero"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(matlang(&["eval", "-p", "missing.mtl"], dir.path()).status.code(), Some(2));
    assert_eq!(matlang(&["typecheck"], dir.path()).status.code(), Some(2));
    assert_eq!(matlang(&["no-such-command"], dir.path()).status.code(), Some(2));
    assert_eq!(matlang(&["compile-binrel"], dir.path()).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let root = repo();
    let inst = root.join("programs/samples/spd.inst");
    let prog = root.join("programs/inv_via_eigen.mtl");
    let args = |o: &str| {
        vec![
            "eval".to_string(),
            "-p".into(),
            prog.display().to_string(),
            "-i".into(),
            inst.display().to_string(),
            "-o".into(),
            o.to_string(),
        ]
    };
    for o in ["one.csv", "two.csv"] {
        let a = args(o);
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        assert!(matlang(&a, dir.path()).status.success());
    }
    let one = std::fs::read(dir.path().join("one.csv")).unwrap();
    assert!(!one.is_empty());
    assert_eq!(one, std::fs::read(dir.path().join("two.csv")).unwrap());
}

#[test]
fn parse_prints_a_tree() {
    let out = matlang(&["parse", "-p", "programs/vector_min.mtl"], &repo());
    assert!(out.status.success());
    assert!(stdout(&out).contains("Let"));
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "broken.mtl", "A . (\n");
    assert_eq!(matlang(&["parse", "-p", "broken.mtl"], dir.path()).status.code(), Some(1));
}

#[test]
fn relational_plan_agrees_with_eval() {
    let root = repo();
    let common = ["-p", "programs/google_matrix.mtl", "-i", "programs/samples/web.inst"];
    let plan = matlang(&["translate-rel", "-p", "programs/google_matrix.mtl"], &root);
    assert!(plan.status.success());
    assert!(stdout(&plan).contains("Sum["));

    let direct = matlang(&[&["eval"][..], &common].concat(), &root);
    let decoded = matlang(&[&["eval-rel", "--decode"][..], &common].concat(), &root);
    assert!(direct.status.success() && decoded.status.success());
    assert_eq!(stdout(&direct), stdout(&decoded));

    let raw = matlang(&[&["eval-rel"][..], &common].concat(), &root);
    assert_eq!(stdout(&raw).lines().count(), 1 + 16);

    let inv = matlang(&["translate-rel", "-p", "programs/inv_via_eigen.mtl"], &root);
    assert_eq!(inv.status.code(), Some(1));
}

#[test]
fn compiled_relation_expression_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = matlang(
        &["compile-binrel", "--expr", "R ; R + id", "--schema-out", "g.mts", "-o", "g.mtl"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let schema = std::fs::read_to_string(dir.path().join("g.mts")).unwrap();
    assert!(schema.contains("R : a x a"));

    std::fs::copy(repo().join("programs/samples/path4.csv"), dir.path().join("r.csv")).unwrap();
    write(dir.path(), "g.inst", "R = r.csv\n");
    let out = matlang(&["eval", "-p", "g.mtl", "-i", "g.inst"], dir.path());
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    for i in 0..4 {
        for j in 0..4 {
            let expected = i == j || j == i + 2;
            assert_eq!(rows[i][j] == "1", expected, "({i},{j})");
        }
    }
}

#[test]
fn verify_eigen_accepts_computed_bases_only() {
    let dir = tempfile::tempdir().unwrap();
    let spd = repo().join("programs/samples/spd3.csv");
    std::fs::copy(&spd, dir.path().join("a.csv")).unwrap();
    write(dir.path(), "e.mtl", "eigen(A)\n");
    write(dir.path(), "e.mts", "A : a x a\n");
    write(dir.path(), "a.inst", "A = a.csv\n");
    assert!(matlang(&["eval", "-p", "e.mtl", "-i", "a.inst", "-o", "b.csv"], dir.path()).status.success());

    let ok = matlang(&["verify-eigen", "--matrix", "a.csv", "--basis", "b.csv"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).trim(), "valid");

    write(dir.path(), "id.csv", "3,3\n1,0,0\n0,1,0\n0,0,1\n");
    let bad = matlang(&["verify-eigen", "--matrix", "a.csv", "--basis", "id.csv"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(stdout(&bad).trim(), "invalid");
}

#[test]
fn corpus_runner_reports_every_program() {
    let dir = tempfile::tempdir().unwrap();
    let out = matlang(&["run-corpus", "--cases", "2", "--seed", "9"], dir.path());
    assert!(out.status.success(), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("ok ")).count(), matlang::corpus::all().len());

    let one = matlang(&["run-corpus", "--cases", "3", "--name", "pagerank"], dir.path());
    assert_eq!(stdout(&one).lines().count(), 1);
    assert_eq!(matlang(&["run-corpus", "--name", "nothing"], dir.path()).status.code(), Some(2));
}
