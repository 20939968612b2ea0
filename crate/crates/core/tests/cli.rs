use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn tvadmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvadmm")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn read_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mean_two_point_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "0\n2\n");
    let (out, res) = (dir.path().join("x.csv"), dir.path().join("r.csv"));
    let o = tvadmm(&[
        "mean",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--residuals",
        s(&res),
        "--lambda",
        "0.5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let x = read_rows(&out);
    assert!((x[0][0] - 0.5).abs() < 1e-3 && (x[1][0] - 1.5).abs() < 1e-3);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("# lambda="));
    assert!(stdout.contains("start,end,level\n1,1,"));
}

#[test]
fn constant_input_is_reproduced() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "3.25,-1\n3.25,-1\n3.25,-1\n3.25,-1\n");
    let (out, res) = (dir.path().join("x.csv"), dir.path().join("r.csv"));
    let o = tvadmm(&[
        "mean",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--residuals",
        s(&res),
        "--lambda",
        "1",
        "--eps-abs",
        "1e-9",
        "--eps-rel",
        "1e-9",
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("start,end,level\n1,4,"));
    for row in read_rows(&out) {
        assert!((row[0] - 3.25).abs() < 1e-6 && (row[1] + 1.0).abs() < 1e-6);
    }
}

#[test]
fn lambda_max_of_two_points() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "0\n2\n");
    let o = tvadmm(&["lambda-max", "--input", s(&input)]);
    assert_eq!(code(&o), 0);
    let v: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert_eq!(v, 1.0);
}

#[test]
fn synth_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| {
        let (y, t) = (
            dir.path().join(format!("y{tag}.csv")),
            dir.path().join(format!("t{tag}.csv")),
        );
        let o = tvadmm(&[
            "synth",
            "--output",
            s(&y),
            "--truth",
            s(&t),
            "--seed",
            "17",
            "--dim",
            "2",
        ]);
        assert_eq!(code(&o), 0);
        (fs::read(&y).unwrap(), fs::read(&t).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn synth_then_unpenalized_mean_round_trips() {
    let dir = TempDir::new().unwrap();
    let (y, t) = (dir.path().join("y.csv"), dir.path().join("t.csv"));
    assert_eq!(
        code(&tvadmm(&[
            "synth",
            "--output",
            s(&y),
            "--truth",
            s(&t),
            "--n-samples",
            "50"
        ])),
        0
    );
    let (out, res) = (dir.path().join("x.csv"), dir.path().join("r.csv"));
    let o = tvadmm(&[
        "mean",
        "--input",
        s(&y),
        "--output",
        s(&out),
        "--residuals",
        s(&res),
        "--lambda",
        "0",
        "--eps-abs",
        "1e-10",
        "--eps-rel",
        "1e-10",
    ]);
    assert_eq!(code(&o), 0);
    for (a, b) in read_rows(&y).iter().zip(read_rows(&out)) {
        assert!((a[0] - b[0]).abs() < 1e-6);
    }
}

#[test]
fn protocol_run_converges() {
    let dir = TempDir::new().unwrap();
    let (y, t) = (dir.path().join("y.csv"), dir.path().join("t.csv"));
    assert_eq!(
        code(&tvadmm(&["synth", "--output", s(&y), "--truth", s(&t), "--seed", "3"])),
        0
    );
    let (out, res) = (dir.path().join("x.csv"), dir.path().join("r.csv"));
    let o = tvadmm(&[
        "mean",
        "--input",
        s(&y),
        "--output",
        s(&out),
        "--residuals",
        s(&res),
        "--lambda-frac",
        "0.1",
        "--penalty",
        "elementwise",
    ]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&res).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,primal,dual,eps_pri,eps_dual"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!(last[1] <= last[3] && last[2] <= last[4]);
}

#[test]
fn iteration_cap_exits_two_and_still_writes() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "0\n2\n5\n1\n");
    let (out, res) = (dir.path().join("x.csv"), dir.path().join("r.csv"));
    let o = tvadmm(&[
        "mean",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--residuals",
        s(&res),
        "--lambda",
        "1",
        "--max-iter",
        "2",
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(read_rows(&out).len(), 4);
}

#[test]
fn variance_single_row() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "2\n");
    let (out, res) = (dir.path().join("c.csv"), dir.path().join("r.csv"));
    let o = tvadmm(&[
        "var",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--residuals",
        s(&res),
        "--lambda",
        "1",
        "--eps-abs",
        "1e-9",
        "--eps-rel",
        "1e-9",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!((read_rows(&out)[0][0] - 4.0).abs() < 1e-3);
    let precision = read_rows(&dir.path().join("c.precision.csv"));
    assert!((precision[0][0] - 0.25).abs() < 1e-4);
}

#[test]
fn variance_unbounded_exits_three() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "1\n0\n");
    let (out, res) = (dir.path().join("c.csv"), dir.path().join("r.csv"));
    let o = tvadmm(&[
        "var",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--residuals",
        s(&res),
        "--lambda",
        "0",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.csv", "1\nx\n");
    let ragged = write(&dir, "ragged.csv", "1,2\n3\n");
    let (out, res) = (dir.path().join("x.csv"), dir.path().join("r.csv"));
    for input in [&bad, &ragged, &dir.path().join("missing.csv")] {
        let o = tvadmm(&[
            "mean",
            "--input",
            s(input),
            "--output",
            s(&out),
            "--residuals",
            s(&res),
            "--lambda",
            "1",
        ]);
        assert_eq!(code(&o), 1);
    }
    let o = tvadmm(&[
        "mean",
        "--input",
        s(&bad),
        "--output",
        s(&out),
        "--residuals",
        s(&res),
        "--lambda",
        "1",
    ]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column 1"));
    assert_eq!(code(&tvadmm(&["mean", "--frobnicate"])), 1);
    let good = write(&dir, "y.csv", "0\n2\n");
    assert_eq!(
        code(&tvadmm(&[
            "mean",
            "--input",
            s(&good),
            "--output",
            s(&out),
            "--residuals",
            s(&res)
        ])),
        1
    );
    assert_eq!(
        code(&tvadmm(&[
            "mean",
            "--input",
            s(&good),
            "--output",
            s(&out),
            "--residuals",
            s(&res),
            "--lambda",
            "-1"
        ])),
        1
    );
}
