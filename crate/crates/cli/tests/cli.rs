use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    format!("{}/../../corpus/{name}.dspec", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laxgeom")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn lax_verify_dkp() {
    let o = run(&["lax", "verify", &corpus("dkp")]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("pair.dkp.verdict: LaxPair"));
    assert!(s.contains("pair.dkp.characteristic: true"));
    assert!(s.contains("pair.dkp.normal: true"));
}

#[test]
fn flat_example_is_trivial() {
    let o = run(&["ew", "check", &corpus("flat-counterexample"), "--solve-omega"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("classification: IdenticallyZero"));
    assert!(s.contains("warning: trivial corollary"));
}

#[test]
fn second_heavenly_orientations() {
    let plus = run(&["sd", "check", &corpus("second-heavenly"), "--orientation", "+"]);
    assert_eq!(plus.status.code(), Some(0));
    assert!(stdout(&plus).contains("classification: ZeroModIdeal"));
    let minus = run(&["sd", "check", &corpus("second-heavenly"), "--orientation", "-"]);
    assert_eq!(minus.status.code(), Some(1));
    assert!(stdout(&minus).contains("classification: Nonzero"));
}

#[test]
fn broken_pair_exits_one() {
    let o = run(&["lax", "verify", &corpus("dkp-broken")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NotIntegrable"));
}

#[test]
fn parse_error_exits_two_with_position() {
    let path = std::env::temp_dir().join(format!("laxgeom-bad-{}.dspec", std::process::id()));
    std::fs::write(&path, "[coords]\nbase = x, y, t\nunknowns = u\n\n[equation F]\nsolve u_xt = u_xxx\n").unwrap();
    let o = run(&["lax", "verify", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(":6:") && err.contains("NotSolvedForm"), "{err}");
}

#[test]
fn usage_error_exits_two() {
    assert_eq!(run(&["sd", "check", &corpus("dkp"), "--orientation", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["corpus", "verify", "nope"]).status.code(), Some(2));
}

#[test]
fn json_and_text_agree() {
    let file = corpus("manakov-santini");
    let text = stdout(&run(&["lax", "verify", &file]));
    let json: serde_json::Value = serde_json::from_str(&stdout(&run(&["lax", "verify", &file, "--format", "json"]))).unwrap();
    let obj = json.as_object().unwrap();
    let mut n = 0;
    for line in text.lines().filter(|l| l.starts_with("pair.")) {
        let (k, v) = line.split_once(": ").unwrap();
        let j = match &obj[k] {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        assert_eq!(j, v, "{k}");
        n += 1;
    }
    assert_eq!(n, 6);
}

#[test]
fn corpus_verify_all_passes() {
    let o = run(&["corpus", "verify", "--all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("pass: false"));
}
