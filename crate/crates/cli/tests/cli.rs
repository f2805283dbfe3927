use std::path::Path;
use std::process::{Command, Output};

fn synthfall(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synthfall")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn make_fixture(dir: &Path) {
    let o = synthfall(&["make-fixture", "--out", "fx"], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

const QUICK: [&str; 14] = [
    "--window", "32", "--stride", "16", "--iterations", "2", "--hidden", "8", "--dense", "4", "--max-epochs", "2", "--patience", "1",
];

#[test]
fn prompts_default_to_350_variants() {
    let dir = tempfile::tempdir().unwrap();
    let o = synthfall(&["prompts"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: std::collections::HashSet<&str> = text.lines().collect();
    assert_eq!(text.lines().count(), 350);
    assert_eq!(lines.len(), 350);

    let o = synthfall(&["prompts", "--tags", "female,nonsense"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_writes_a_fingerprinted_report_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    make_fixture(dir.path());
    let mut args = vec!["experiment", "--seed", "4", "--manifest", "fx/real.json"];
    for s in ["fx/t2m.json", "fx/parco.json", "fx/sato.json"] {
        args.extend(["--synthetic", s]);
    }
    args.extend(QUICK);
    args.extend(["--baseline", "--out", "a"]);
    let first = synthfall(&args, dir.path());
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(stdout(&first).contains("baseline mean F1"));
    *args.last_mut().unwrap() = "b";
    assert!(synthfall(&args, dir.path()).status.success());

    let only = |d: &str| {
        let entries: Vec<_> = std::fs::read_dir(dir.path().join(d)).unwrap().map(|e| e.unwrap().path()).collect();
        assert_eq!(entries.len(), 1);
        entries[0].clone()
    };
    let (a, b) = (only("a"), only("b"));
    assert_eq!(a.file_name(), b.file_name());
    assert!(a.file_name().unwrap().to_str().unwrap().starts_with("experiment-"));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = synthfall(&["report", "-i", a.to_str().unwrap(), "--format", "csv", "--out", "c"], dir.path());
    assert!(o.status.success());
    assert_eq!(only("c").extension().unwrap(), "csv");
}

#[test]
fn align_writes_density_curves() {
    let dir = tempfile::tempdir().unwrap();
    make_fixture(dir.path());
    let o = synthfall(
        &[
            "align", "--real", "fx/real.json", "--synthetic", "fx/sato.json", "--window", "32", "--stride", "16", "--plot-dir", "plots",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("coverage"));
    assert_eq!(std::fs::read_dir(dir.path().join("plots")).unwrap().count(), 2);
}

#[test]
fn train_saves_checkpoint_and_history() {
    let dir = tempfile::tempdir().unwrap();
    make_fixture(dir.path());
    let mut args = vec!["train", "--seed", "1", "--manifest", "fx/real.json", "--synthetic", "fx/t2m.json"];
    args.extend(QUICK);
    args.extend(["--checkpoint", "model.bin", "--history", "history.csv"]);
    let o = synthfall(&args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(dir.path().join("model.bin")).unwrap();
    assert!(bytes.starts_with(b"SFMODEL\0"));
    let history = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert_eq!(history.lines().next(), Some("epoch;train_loss;val_loss;val_f1"));
    assert_eq!(history.lines().count(), 3);
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    make_fixture(dir.path());
    // Missing seed is a usage error.
    assert_eq!(synthfall(&["experiment", "--manifest", "fx/real.json"], dir.path()).status.code(), Some(2));
    // Fractions that do not sum to one.
    let bad_mix = synthfall(&["experiment", "--seed", "1", "--manifest", "fx/real.json", "--mix", "0.5,0.5,0.5"], dir.path());
    assert_eq!(bad_mix.status.code(), Some(2));
    // Missing manifest file.
    assert_eq!(synthfall(&["experiment", "--seed", "1", "--manifest", "nope.json"], dir.path()).status.code(), Some(2));
    // Twelve subjects cannot fill a 9/2/2 split.
    let mut args = vec!["experiment", "--seed", "1", "--manifest", "fx/real.json", "--synthetic", "fx/t2m.json", "--split", "9,2,2"];
    args.extend(QUICK);
    assert_eq!(synthfall(&args, dir.path()).status.code(), Some(3));
    // A corrupt series file.
    std::fs::write(dir.path().join("fx/data/s01_adl0.csv"), "x;y;z\n1;2\n").unwrap();
    assert_eq!(synthfall(&["ingest", "--load", "fx/real.json"], dir.path()).status.code(), Some(3));
    assert!(synthfall(&["ingest", "fx/real.json"], dir.path()).status.success());
}
