use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn dutir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dutir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn synth(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.path().join(name);
    let mut full = vec!["synth", "--output", path_str(&out)];
    full.extend_from_slice(args);
    let res = dutir(&full);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    out
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn numbers(row: &[String], range: std::ops::Range<usize>) -> Vec<f64> {
    row[range].iter().map(|v| v.parse().unwrap()).collect()
}

#[test]
fn golden_decomposition_is_reproduced() {
    let dir = TempDir::new().unwrap();
    let input = synth(
        &dir,
        "in.csv",
        &["--archetype", "random", "--duration", "0.1", "--step", "0.01", "--seed", "7"],
    );
    assert_eq!(
        fs::read(&input).unwrap(),
        fs::read(golden("random_seed7.csv")).unwrap()
    );
    let out = dir.path().join("out.csv");
    let res = dutir(&[
        "decompose",
        "--input",
        path_str(&golden("random_seed7.csv")),
        "--format",
        "twist",
        "--L",
        "0.5",
        "--emit-S",
        "--output",
        path_str(&out),
    ]);
    assert!(res.status.success());
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        fs::read_to_string(golden("random_seed7_decomposed.csv")).unwrap()
    );
}

#[test]
fn constant_screw_rows_are_identical() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "c.csv", &["--archetype", "constant-screw", "--format", "pose"]);
    let out = dir.path().join("u.csv");
    let res = dutir(&["decompose", "--input", path_str(&input), "--format", "pose", "--output", path_str(&out)]);
    assert!(res.status.success());
    let rows = rows(&out);
    assert!(rows.len() > 100);
    let first = numbers(&rows[0], 1..16);
    for r in &rows {
        for (a, b) in numbers(r, 1..16).iter().zip(&first) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn three_samples_give_one_row() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("three.csv");
    fs::write(
        &input,
        "# three twists\nx,a1,a2,a3,b1,b2,b3\n0,1,0,0,0,0.1,0\n1,0,1,0,0.2,0,0\n2,0,0,1,0,0,0.3\n",
    )
    .unwrap();
    let out = dir.path().join("u.csv");
    let res = dutir(&["decompose", "--input", path_str(&input), "--format", "twist", "--output", path_str(&out)]);
    assert!(res.status.success());
    let rows = rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn unregularized_regular_trajectory_has_zero_residuals() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "t.csv", &["--archetype", "tumble", "--duration", "2"]);
    let out = dir.path().join("u.csv");
    let res = dutir(&[
        "decompose", "--input", path_str(&input), "--format", "twist", "--no-regularization", "--output", path_str(&out),
    ]);
    assert!(res.status.success());
    for r in rows(&out) {
        assert_eq!(r[18], "regular");
        for col in [10, 13, 14] {
            assert_eq!(r[col].parse::<f64>().unwrap(), 0.0);
        }
        assert_eq!((r[16].as_str(), r[17].as_str()), ("0", "0"));
    }
}

#[test]
fn irregular_windows_are_flagged_not_fatal() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "p.csv", &["--archetype", "pure-translation", "--duration", "0.2"]);
    let out = dir.path().join("u.csv");
    let res = dutir(&[
        "decompose", "--input", path_str(&input), "--format", "twist", "--no-regularization", "--emit-S", "--output", path_str(&out),
    ]);
    assert!(res.status.success());
    let rows = rows(&out);
    assert_eq!(rows.len(), 18);
    assert!(rows.iter().all(|r| r[18] == "irregular" && r.len() == 31));

    let regularized = dir.path().join("r.csv");
    assert!(dutir(&["decompose", "--input", path_str(&input), "--format", "twist", "--output", path_str(&regularized)])
        .status
        .success());
    assert!(rows_status(&regularized, "alpha_zero"));
}

fn rows_status(path: &Path, status: &str) -> bool {
    rows(path).iter().all(|r| r[18] == status)
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let random = synth(&dir, "r.csv", &["--archetype", "random", "--seed", "3"]);
    let res = dutir(&["check", "--input", path_str(&random), "--format", "twist"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&res.stdout).contains("279 passed, 0 failed"));

    let trans = synth(&dir, "t.csv", &["--archetype", "pure-translation"]);
    let res = dutir(&["check", "--input", path_str(&trans), "--format", "twist", "--no-regularization"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&res.stdout).contains("0 passed, 0 failed, 278 not applicable"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,a1,a2,a3,b1,b2,b3\n0,1,0,0,0,0,0\n1,oops,0,0,0,0,0\n2,0,0,1,0,0,0\n").unwrap();
    let res = dutir(&["check", "--input", path_str(&bad), "--format", "twist"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));

    let res = dutir(&["check", "--input", path_str(&dir.path().join("missing.csv")), "--format", "pose"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let random = synth(&dir, "r.csv", &["--archetype", "random"]);
    for extra in [["--L", "0"], ["--w", "-1"], ["--L", "nan"]] {
        let mut args = vec!["decompose", "--input", path_str(&random), "--format", "twist"];
        args.extend_from_slice(&extra);
        assert_eq!(dutir(&args).status.code(), Some(1));
    }
    assert_eq!(dutir(&["decompose", "--unknown"]).status.code(), Some(1));
    assert_eq!(dutir(&["--help"]).status.code(), Some(0));
}

#[test]
fn synth_behaviour() {
    let dir = TempDir::new().unwrap();
    let a = synth(&dir, "a.csv", &["--archetype", "slide-lift-pour", "--noise", "0.01", "--seed", "11"]);
    let b = synth(&dir, "b.csv", &["--archetype", "slide-lift-pour", "--noise", "0.01", "--seed", "11"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let clean = synth(&dir, "c.csv", &["--archetype", "slide-lift-pour"]);
    let slide: Vec<Vec<f64>> = rows(&clean)
        .iter()
        .map(|r| numbers(r, 0..7))
        .filter(|r| r[0] < 0.7)
        .collect();
    assert!(slide.len() > 60);
    for r in &slide {
        let alpha = (r[1] * r[1] + r[2] * r[2] + r[3] * r[3]).sqrt();
        let beta = (r[4] * r[4] + r[5] * r[5] + r[6] * r[6]).sqrt();
        assert!(alpha <= 1e-9 * beta);
    }

    let res = dutir(&["synth", "--archetype", "tumble", "--duration", "0", "--output", path_str(&dir.path().join("z.csv"))]);
    assert_eq!(res.status.code(), Some(1));
    let res = dutir(&["synth", "--archetype", "random", "--format", "pose"]);
    assert_eq!(res.status.code(), Some(1));
}
