use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use testgen_core::corpus::default_corpus_dir;

fn testgen(args: &[&str], danger: bool) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_testgen"));
    cmd.args(args).env_remove("TESTGEN_DANGER_AWARE").env_remove("RUST_LOG");
    if danger {
        cmd.env("TESTGEN_DANGER_AWARE", "1");
    }
    cmd.output().unwrap()
}

fn corpus() -> String {
    default_corpus_dir().to_string_lossy().into_owned()
}

fn base<'a>(project: &'a str, module: &'a str, out: &'a str) -> Vec<&'a str> {
    vec!["--project-path", project, "--module-name", module, "--output-path", out]
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn three_flags_write_tests_with_dynamosa() {
    let out = tempfile::tempdir().unwrap();
    let out_s = path_str(out.path());
    let c = corpus();
    let mut args = base(&c, "triangle", &out_s);
    args.extend(["--seed", "1", "--logical-clock", "-v"]);
    let o = testgen(&args, true);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.path().join("test_triangle.mdyn")).unwrap();
    assert!(text.starts_with("use triangle as module0\n"));
    assert!(text.contains("def test_case_0():"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("running DYNAMOSA"));
}

#[test]
fn silent_without_verbosity() {
    let out = tempfile::tempdir().unwrap();
    let out_s = path_str(out.path());
    let c = corpus();
    let mut args = base(&c, "triangle", &out_s);
    args.extend(["--seed", "1", "--logical-clock"]);
    let o = testgen(&args, true);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(o.stderr.is_empty(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn algorithm_flag_selects_mio() {
    let out = tempfile::tempdir().unwrap();
    let out_s = path_str(out.path());
    let c = corpus();
    let mut args = base(&c, "triangle", &out_s);
    args.extend(["--algorithm", "MIO", "--seed", "2", "--logical-clock", "-v"]);
    let o = testgen(&args, true);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("running MIO"));
}

#[test]
fn per_execution_detail_at_two_vs() {
    let out = tempfile::tempdir().unwrap();
    let out_s = path_str(out.path());
    let c = corpus();
    let mut args = base(&c, "triangle", &out_s);
    args.extend(["--seed", "1", "--logical-clock", "-vv"]);
    let o = testgen(&args, true);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("execution 1:"), "{err}");
    assert!(err.contains("iteration 1 at"));
}

#[test]
fn missing_danger_variable_runs_nothing() {
    let out = tempfile::tempdir().unwrap();
    let target = out.path().join("nested");
    let out_s = path_str(&target);
    let c = corpus();
    let o = testgen(&base(&c, "triangle", &out_s), false);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("TESTGEN_DANGER_AWARE"));
    assert!(!target.exists());
}

#[test]
fn unknown_algorithm_is_a_usage_error_listing_choices() {
    let c = corpus();
    let mut args = base(&c, "triangle", "unused");
    args.extend(["--algorithm", "HILL_CLIMB"]);
    let o = testgen(&args, true);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    for name in ["RANDOM", "RANDOM_TEST_CASE_SEARCH", "MOSA", "DYNAMOSA", "MIO", "WHOLE_SUITE", "WHOLE_SUITE_ARCHIVE"] {
        assert!(err.contains(name), "{name} missing from {err}");
    }
}

#[test]
fn missing_mandatory_flag_is_a_usage_error() {
    let o = testgen(&["--module-name", "triangle", "--output-path", "x"], true);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let o = testgen(&["--help"], false);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in [
        "--project-path",
        "--module-name",
        "--output-path",
        "--algorithm",
        "--seed",
        "--maximum-search-time",
        "--maximum-iterations",
        "--coverage",
        "--no-type-annotations",
        "--no-assertions",
        "--stats-path",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
}

#[test]
fn missing_module_is_an_io_error() {
    let out = tempfile::tempdir().unwrap();
    let out_s = path_str(out.path());
    let c = corpus();
    let o = testgen(&base(&c, "no_such_module", &out_s), true);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn syntax_error_exits_with_four() {
    let project = tempfile::tempdir().unwrap();
    let src = default_corpus_dir().join("negative/unclosed_paren.mdyn");
    fs::copy(src, project.path().join("broken.mdyn")).unwrap();
    let out = tempfile::tempdir().unwrap();
    let (p, o_s) = (path_str(project.path()), path_str(out.path()));
    let o = testgen(&base(&p, "broken", &o_s), true);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at 2:"));
}

#[test]
fn unwritable_stats_path_exits_with_three() {
    let out = tempfile::tempdir().unwrap();
    let out_s = path_str(out.path());
    let stats = path_str(&out.path().join("no/such/dir/stats.csv"));
    let c = corpus();
    let mut args = base(&c, "triangle", &out_s);
    args.extend(["--seed", "1", "--logical-clock", "--stats-path", &stats]);
    assert_eq!(testgen(&args, true).status.code(), Some(3));
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["elapsed_s", "iteration", "branch_coverage", "line_coverage"]
    );
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn statistics_rows_and_final_summary() {
    let out = tempfile::tempdir().unwrap();
    let out_s = path_str(out.path());
    let stats = out.path().join("stats.csv");
    let stats_s = path_str(&stats);
    let c = corpus();
    let mut args = base(&c, "stack", &out_s);
    args.extend(["--seed", "4", "--logical-clock", "--stats-path", &stats_s, "--algorithm", "MOSA"]);
    let o = testgen(&args, true);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&stats);
    let (last, body) = rows.split_last().unwrap();
    assert_eq!(last[1], "final");
    assert!(!body.is_empty());
    let mut prev = 0.0;
    for (i, r) in body.iter().enumerate() {
        assert_eq!(r[1], (i + 1).to_string());
        let b: f64 = r[2].parse().unwrap();
        assert!(b >= prev);
        prev = b;
    }
    assert_eq!(last[2], body.last().unwrap()[2]);
    assert_eq!(last[3], body.last().unwrap()[3]);

    let kills = csv::Reader::from_path(out.path().join("stats.kills.csv")).unwrap().headers().unwrap().clone();
    assert_eq!(kills.iter().collect::<Vec<_>>(), ["mutant_id", "operator", "killed_by"]);
}

#[test]
fn no_assertions_means_no_assert_statements_or_kill_report() {
    let out = tempfile::tempdir().unwrap();
    let out_s = path_str(out.path());
    let stats = out.path().join("s.csv");
    let stats_s = path_str(&stats);
    let c = corpus();
    let mut args = base(&c, "triangle", &out_s);
    args.extend(["--seed", "1", "--logical-clock", "--no-assertions", "--stats-path", &stats_s]);
    assert_eq!(testgen(&args, true).status.code(), Some(0));
    let text = fs::read_to_string(out.path().join("test_triangle.mdyn")).unwrap();
    assert!(!text.contains("assert "));
    assert!(!out.path().join("s.kills.csv").exists());
}

#[test]
fn iteration_limit_is_respected() {
    let out = tempfile::tempdir().unwrap();
    let out_s = path_str(out.path());
    let stats = out.path().join("s.csv");
    let stats_s = path_str(&stats);
    let c = corpus();
    let mut args = base(&c, "unreachable", &out_s);
    args.extend(["--seed", "1", "--maximum-iterations", "3", "--algorithm", "WHOLE_SUITE", "--stats-path", &stats_s]);
    assert_eq!(testgen(&args, true).status.code(), Some(0));
    assert_eq!(rows(&stats).len(), 4);
}

fn run_into(dir: &Path, module: &str, seed: &str) -> (String, String) {
    let out_s = path_str(dir);
    let stats = dir.join("stats.csv");
    let stats_s = path_str(&stats);
    let c = corpus();
    let mut args = base(&c, module, &out_s);
    args.extend(["--seed", seed, "--logical-clock", "--maximum-search-time", "2", "--stats-path", &stats_s]);
    let o = testgen(&args, true);
    assert_eq!(o.status.code(), Some(0));
    let test: PathBuf = dir.join(format!("test_{module}.mdyn"));
    (fs::read_to_string(test).unwrap(), fs::read_to_string(stats).unwrap())
}

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run_into(a.path(), "magic", "11"), run_into(b.path(), "magic", "11"));
}

#[test]
fn coverage_criterion_line_runs() {
    for cov in ["line", "both"] {
        let out = tempfile::tempdir().unwrap();
        let out_s = path_str(out.path());
        let c = corpus();
        let mut args = base(&c, "mathutils", &out_s);
        args.extend(["--seed", "1", "--logical-clock", "--coverage", cov]);
        assert_eq!(testgen(&args, true).status.code(), Some(0));
    }
    let o = testgen(&["--project-path", "p", "--module-name", "m", "--output-path", "o", "--coverage", "path"], true);
    assert_eq!(o.status.code(), Some(1));
}
