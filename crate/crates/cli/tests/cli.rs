use std::fs;
use std::path::Path;
use std::process::Command;

fn run(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sinai-idla"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("sinai-idla-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn simulate_writes_csv_and_json() {
    let dir = scratch("simulate");
    let out = run(
        &dir,
        &[
            "simulate",
            "--n",
            "64,128",
            "--replicas",
            "5",
            "--seed",
            "1",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("simulate.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "replica,n,g_n,d_n,d_over_n");
    assert_eq!(csv.lines().count(), 1 + 5 * 2);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("simulate.json")).unwrap()).unwrap();
    let pools = report["pools"].as_array().unwrap();
    assert_eq!(pools.len(), 2);
    for key in [
        "pool_label",
        "n",
        "mean",
        "var",
        "ks_vs_arcsine",
        "pairwise_ks",
    ] {
        assert!(pools[0].get(key).is_some(), "missing {key}");
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_is_identical_across_worker_counts() {
    let (a, b) = (scratch("w1"), scratch("w3"));
    let args = [
        "good-events",
        "--n",
        "500",
        "--replicas",
        "40",
        "--seed",
        "9",
        "--eps",
        "0.1",
    ];
    assert!(run(&a, &[&args[..], &["--workers", "1"]].concat())
        .status
        .success());
    assert!(run(&b, &[&args[..], &["--workers", "3"]].concat())
        .status
        .success());
    assert_eq!(
        fs::read(a.join("good-events.csv")).unwrap(),
        fs::read(b.join("good-events.csv")).unwrap()
    );
    fs::remove_dir_all(&a).unwrap();
    fs::remove_dir_all(&b).unwrap();
}

#[test]
fn functionals_schema() {
    let dir = scratch("functionals");
    let out = run(
        &dir,
        &[
            "functionals",
            "--law",
            "two-point",
            "--p",
            "0.3",
            "--n",
            "300",
            "--replicas",
            "3",
            "--seed",
            "2",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("functionals.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "replica,ybar,Tplus,Tminus,alpha,beta,dstar,B+,B-,C+,C-,resolved"
    );
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_configs_exit_nonzero() {
    let dir = scratch("bad");
    assert!(!run(&dir, &["simulate", "--n", "10", "--replicas", "2"])
        .status
        .success());
    assert!(!run(
        &dir,
        &["simulate", "--n", "10", "--seed", "1", "--law", "cauchy"]
    )
    .status
    .success());
    assert!(!run(
        &dir,
        &["simulate", "--n", "10", "--seed", "1", "--law", "two-point"]
    )
    .status
    .success());
    assert!(!run(&dir, &["simulate", "--seed", "1"]).status.success());
    assert!(!run(
        &dir,
        &["localization", "--n", "10", "--seed", "1", "--eps", "2"]
    )
    .status
    .success());
    let _ = fs::remove_dir_all(&dir);
}
