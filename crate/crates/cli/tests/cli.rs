use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use ctxlab::machines::{builtin, machine_run, parse_machine, Caps};
use ctxlab::managers::{lag_run, parse_lag_rule, LagOutcome};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn ctxlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxlab"))
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

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn compile_fn_reports_d_model_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.w");
    let b = dir.path().join("b.w");
    let o = ctxlab(&["compile-fn", path_str(&data("xor.fn")), "--out", path_str(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("d_model 10"));
    assert!(stdout(&o).contains("failures=0"));
    ctxlab(&["compile-fn", path_str(&data("xor.fn")), "--out", path_str(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn compile_fn_pair_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("swap.w");
    let o = ctxlab(&["compile-fn", path_str(&data("swap.fn")), "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn compile_fn_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fn");
    fs::write(&bad, "K 2\ntokens a b\na a -> b\na b ->\n").unwrap();
    let o = ctxlab(&["compile-fn", path_str(&bad), "--out", path_str(&dir.path().join("x"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let clash = dir.path().join("clash.fn");
    fs::write(&clash, "K 2\ntokens a <1>\na a -> a a\na <1> -> a a\n<1> a -> a a\n<1> <1> -> a a\n").unwrap();
    let o = ctxlab(&["compile-fn", path_str(&clash), "--out", path_str(&dir.path().join("y"))]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn run_palindrome_pipeline_exit_codes() {
    let tm = data("palindrome.tm");
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.txt");
    let o = ctxlab(&["run", "--machine", path_str(&tm), "--input", "abba", "--trace", path_str(&trace)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.lines().last().unwrap().starts_with("halt reason=token:accept"));
    let o = ctxlab(&["run", "--machine", path_str(&tm), "--input", "abab", "--trace", path_str(&trace)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn run_cap_exits_3_and_bad_config_exits_2() {
    let o = ctxlab(&[
        "run",
        "--config",
        path_str(&data("loop.toml")),
        "--input",
        "a b",
        "--mode",
        "transduce",
        "--cap",
        "5",
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "style = \"appending\"\nwidth = 2\n").unwrap();
    let o = ctxlab(&["run", "--config", path_str(&cfg), "--mock", path_str(&data("eos.mock")), "--input", "a"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compile_tm_rule_matches_machine() {
    let dir = tempfile::tempdir().unwrap();
    let rule_path = dir.path().join("anbn.lag");
    let o = ctxlab(&["compile-tm", path_str(&data("anbn.tm")), "--out", path_str(&rule_path)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rule = parse_lag_rule(&fs::read_to_string(&rule_path).unwrap()).unwrap();
    let m = builtin::anbn();
    let lag = ctxlab::machines::lba_to_lag(&m).unwrap();
    assert_eq!(&rule, lag.rule());
    for word in ["ab", "aabb", "aab", "ba", "abab"] {
        let x = m.parse_input(word).unwrap();
        let run = lag_run(&rule, lag.encode(&x).unwrap(), 1_000_000);
        assert_eq!(lag.verdict(&run), machine_run(&m, &x, Caps::default()).unwrap().verdict, "{word}");
    }
}

#[test]
fn compile_tm_accept_all_halts_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let rule_path = dir.path().join("acc.lag");
    let o = ctxlab(&["compile-tm", path_str(&data("accept_all.tm")), "--out", path_str(&rule_path)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rule = parse_lag_rule(&fs::read_to_string(&rule_path).unwrap()).unwrap();
    let m = parse_machine(&fs::read_to_string(data("accept_all.tm")).unwrap()).unwrap();
    let lag = ctxlab::machines::lba_to_lag(&m).unwrap();
    for word in ["a", "ab", "bbab"] {
        let x = m.parse_input(word).unwrap();
        let run = lag_run(&rule, lag.encode(&x).unwrap(), 1_000);
        assert!(matches!(run.outcome, LagOutcome::Halted(_)));
        assert!(run.steps as usize <= x.len() + 2, "{word}: {} steps", run.steps);
    }
}

#[test]
fn compile_tm_rejects_bad_machines() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(data("accept_all.tm")).unwrap();
    let not_lba = dir.path().join("tm.tm");
    fs::write(&not_lba, text.replace("lba true", "lba false")).unwrap();
    let o = ctxlab(&["compile-tm", path_str(&not_lba), "--out", path_str(&dir.path().join("r"))]);
    assert_eq!(code(&o), 2);
    let no_reject = dir.path().join("nr.tm");
    let stripped: String = text.lines().filter(|l| !l.starts_with("reject")).map(|l| format!("{l}\n")).collect();
    fs::write(&no_reject, stripped).unwrap();
    let o = ctxlab(&["compile-tm", path_str(&no_reject), "--out", path_str(&dir.path().join("r"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn extract_dfa_outputs_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("d.dot");
    let cfg = data("summarize.toml");
    let o = ctxlab(&["extract-dfa", "--config", path_str(&cfg), "--mock", path_str(&data("eos.mock")), "--out", path_str(&dot)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let states: usize = stdout(&o).split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(states <= 2, "{}", stdout(&o));
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    let o = ctxlab(&[
        "extract-dfa",
        "--config",
        path_str(&cfg),
        "--mock",
        path_str(&data("random.mock")),
        "--out",
        path_str(&dot),
        "--dfa-bound",
        "3",
    ]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains('3'));
}

#[test]
fn verify_exit_codes() {
    let o = ctxlab(&["verify", "lemma1", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 3);
    let o = ctxlab(&["verify", "prop1", "--fault", "broken-shift"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL [4]"));
    assert!(stdout(&o).contains("counterexample"));
    let o = ctxlab(&["verify", "nope"]);
    assert_eq!(code(&o), 2);
}
