use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn latstd(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latstd"))
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn convert_writes_corpus_audit_and_trailer() {
    let dir = tempfile::tempdir().unwrap();
    let ud = fixture("ud_sample.conllu");
    let out = latstd(dir.path(), &["convert", "--in", path(&ud), "--flavor", "ud"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let converted = read(&dir.path().join("ud_sample.conllu"));
    assert!(!converted.contains("VerbForm="));
    assert!(!converted.contains("\tINTJ\t"));
    let audit = read(&dir.path().join("ud_sample.audit.tsv"));
    assert!(audit.lines().last().unwrap().starts_with("# latstd 0.1.0 seed=0 config="));
}

#[test]
fn dedup_and_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (ud, lasla) = (fixture("ud_sample.conllu"), fixture("lasla_sample.tsv"));
    let out = latstd(dir.path(), &["dedup", "--a", path(&ud), "--b", path(&lasla)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dups = read(&dir.path().join("dups.tsv"));
    assert_eq!(dups.lines().filter(|l| !l.starts_with('#')).count(), 5, "{dups}");

    let manifest = dir.path().join("dups.tsv");
    let out = latstd(
        dir.path(),
        &["agree", "--a", path(&ud), "--b", path(&lasla), "--dups", path(&manifest)],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(&dir.path().join("agreement.tsv"));
    assert!(report.starts_with("stage\tfeature\tpercent_same\tcount_same\tcount_total\n"));
    assert!(report.contains("\nbefore\tCase\t"));
    assert!(report.contains("\nafter\tGender (loose)\t"));
}

#[test]
fn eval_and_permutation_test() {
    let dir = tempfile::tempdir().unwrap();
    let gold_raw = fixture("ud_sample.conllu");
    assert!(latstd(dir.path(), &["convert", "--in", path(&gold_raw)]).status.success());
    let gold = dir.path().join("ud_sample.conllu");
    let pred = dir.path().join("pred.conllu");
    let out = latstd(dir.path(), &["dummy-predict", "--in", path(&gold), "--out", path(&pred)]);
    assert!(out.status.success());

    let out = latstd(dir.path(), &["eval", "--gold", path(&gold), "--pred", path(&pred)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&dir.path().join("eval.json"))).unwrap();
    let acc = report["morph_accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));

    let run = |jobs: &str| {
        let out = latstd(
            dir.path(),
            &["--jobs", jobs, "--seed", "5", "perm-test", "--gold", path(&gold), "--a", path(&gold), "--b", path(&pred), "--n", "2000"],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (String::from_utf8(out.stdout).unwrap(), read(&dir.path().join("perm_test.tsv")))
    };
    let one = run("1");
    let eight = run("8");
    assert_eq!(one, eight);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ud, lasla) = (fixture("ud_sample.conllu"), fixture("lasla_sample.tsv"));
    for dir in [&a, &b] {
        let out = latstd(dir.path(), &["agree", "--a", path(&ud), "--b", path(&lasla)]);
        assert!(out.status.success());
    }
    assert_eq!(read(&a.path().join("agreement.tsv")), read(&b.path().join("agreement.tsv")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ud = fixture("ud_sample.conllu");

    assert_eq!(latstd(dir.path(), &["metadata-validate", "--metadata", path(&fixture("metadata.tsv"))]).status.code(), Some(0));

    let bad_meta = dir.path().join("bad.tsv");
    std::fs::write(&bad_meta, "treebank\twork_id\n").unwrap();
    assert_eq!(latstd(dir.path(), &["metadata-validate", "--metadata", path(&bad_meta)]).status.code(), Some(1));

    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "[eval]\nbogus = 1\n").unwrap();
    let out = latstd(dir.path(), &["--config", path(&config), "convert", "--in", path(&ud)]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(latstd(dir.path(), &["frobnicate"]).status.code(), Some(2));

    let missing = dir.path().join("missing.conllu");
    assert_eq!(latstd(dir.path(), &["convert", "--in", path(&missing)]).status.code(), Some(1));
}

#[test]
fn split_reports_audit_failures() {
    let dir = tempfile::tempdir().unwrap();
    let ud = fixture("ud_sample.conllu");
    let lasla = fixture("lasla_sample.tsv");
    let meta = fixture("metadata.tsv");
    let out = latstd(dir.path(), &["split", "--ud", path(&ud), "--lasla", path(&lasla), "--metadata", path(&meta)]);
    // The fixture is far too small for a 1000-sentence test set.
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("split_sizes.tsv").exists());
}
