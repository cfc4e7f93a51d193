use std::process::{Command, Output};

fn eqrw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqrw")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const PROG_A: &str = "( d *s ( ( ( ns e ) /s a ) -s c ) )";
const PROG_B: &str = "( ( d *s ( ( ns e ) /s a ) ) -s ( c *s d ) )";

#[test]
fn check_accepts_program_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    std::fs::write(&a, format!("{PROG_A}\n")).unwrap();
    std::fs::write(&b, PROG_B).unwrap();
    let ok = eqrw(&[
        "check",
        a.to_str().unwrap(),
        "DistributeRight right Commute",
        b.to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = eqrw(&[
        "check",
        a.to_str().unwrap(),
        "DistributeRight Commute",
        b.to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn malformed_input_is_an_error() {
    let o = eqrw(&["check", "( a +s A )", "Commute", "( A +s a )"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn prove_prints_a_sequence_or_not_equal() {
    let o = eqrw(&["prove", PROG_A, PROG_B]);
    assert_eq!(o.status.code(), Some(0));
    let seq = stdout(&o).trim().to_string();
    assert_eq!(
        seq.split_whitespace().filter(|t| *t != "left" && *t != "right").count(),
        2
    );
    let recheck = eqrw(&["check", PROG_A, &seq, PROG_B]);
    assert_eq!(recheck.status.code(), Some(0));

    let o = eqrw(&["prove", "( a -s b )", "( b -s a )", "--max-steps", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "Not_equal");
}

#[test]
fn generate_stats_split() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus.tsv");
    let out_s = out.to_str().unwrap();
    let o = eqrw(&["generate", "--seed", "3", "--count", "1000", "--out", out_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1000);

    let again = dir.path().join("again.tsv");
    assert!(eqrw(&[
        "generate",
        "--seed",
        "3",
        "--count",
        "1000",
        "--out",
        again.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(std::fs::read(&again).unwrap(), text.as_bytes());

    let o = eqrw(&["stats", out_s]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Commute"));

    let o = eqrw(&["split", out_s, "--train", "0.8", "--val", "0.1", "--test", "0.1"]);
    assert!(o.status.success());
    let lines = |suffix: &str| {
        std::fs::read_to_string(format!("{out_s}.{suffix}"))
            .unwrap()
            .lines()
            .count()
    };
    assert_eq!((lines("train"), lines("val"), lines("test")), (800, 100, 100));
}

#[test]
fn catalog_lists_every_rule() {
    let o = eqrw(&["catalog"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 103);
}
