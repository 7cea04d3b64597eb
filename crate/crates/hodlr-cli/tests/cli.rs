//! End-to-end tests of the `hodlr` binary: argument handling, file formats,
//! exit codes, and output shapes.

use hodlr::{setup, DenseMatrix, HMatrix};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hodlr_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hodlr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn column(entries: &[f64]) -> DenseMatrix {
    DenseMatrix::from_rows(&entries.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
}

/// 4x4 tridiagonal with diagonal 4 and all off-diagonal entries 1.
fn tridiag4() -> HMatrix {
    let leaf = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 4.0]]).unwrap();
    HMatrix::new_node(
        HMatrix::new_leaf(leaf.clone()).unwrap(),
        HMatrix::new_leaf(leaf).unwrap(),
        column(&[0.0, 1.0]),
        column(&[1.0, 0.0]),
        column(&[0.0, 1.0]),
        column(&[1.0, 0.0]),
    )
    .unwrap()
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

#[test]
fn solve_tridiagonal_system() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("a.json");
    let rhs = dir.path().join("z.txt");
    write(&matrix, &tridiag4().to_json());
    write(&rhs, "5\n6\n6\n5\n");
    let out = hodlr_bin(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let values: Vec<f64> = stdout(&out)
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 4);
    for v in values {
        assert!((v - 1.0).abs() < 1e-13);
    }
}

#[test]
fn solve_identity_returns_rhs() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("id.json");
    let rhs = dir.path().join("z.txt");
    write(
        &matrix,
        &HMatrix::new_leaf(DenseMatrix::identity(3)).unwrap().to_json(),
    );
    write(&rhs, "1.5\n-2.25\n0.125\n");
    let out = hodlr_bin(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1.5\n-2.25\n0.125\n");
}

#[test]
fn solve_adjoint_flag_transposes_the_system() {
    // Lower-triangular-ish nonsymmetric leaf so adjoint differs from solve.
    let block = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap();
    let a = HMatrix::new_leaf(block).unwrap();
    let f = setup(a.clone()).unwrap();
    let expected = f.solve_adjoint(&[2.0, 3.0]).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("a.json");
    let rhs = dir.path().join("z.txt");
    write(&matrix, &a.to_json());
    write(&rhs, "2\n3\n");
    let out = hodlr_bin(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
        "--adjoint",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let values: Vec<f64> = stdout(&out)
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values, expected);
}

#[test]
fn solve_missing_matrix_file_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let rhs = dir.path().join("z.txt");
    write(&rhs, "1\n");
    let out = hodlr_bin(&[
        "solve",
        "--matrix",
        dir.path().join("nope.json").to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nope.json"));
}

#[test]
fn solve_garbage_matrix_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("a.json");
    let rhs = dir.path().join("z.txt");
    write(&matrix, "not a document");
    write(&rhs, "1\n");
    let out = hodlr_bin(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_dimension_mismatch_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("a.json");
    let rhs = dir.path().join("z.txt");
    write(&matrix, &tridiag4().to_json());
    write(&rhs, "1\n2\n3\n");
    let out = hodlr_bin(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains('3') && err.contains('4'), "{err}");
}

#[test]
fn solve_bad_rhs_line_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("a.json");
    let rhs = dir.path().join("z.txt");
    write(&matrix, &tridiag4().to_json());
    write(&rhs, "1\ntwo\n3\n4\n");
    let out = hodlr_bin(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"));
}

#[test]
fn solve_singular_matrix_exits_with_singularity_code() {
    let bad = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let good = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 4.0]]).unwrap();
    let a = HMatrix::new_node(
        HMatrix::new_leaf(bad).unwrap(),
        HMatrix::new_leaf(good).unwrap(),
        column(&[0.0, 1.0]),
        column(&[1.0, 0.0]),
        column(&[0.0, 1.0]),
        column(&[1.0, 0.0]),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("a.json");
    let rhs = dir.path().join("z.txt");
    write(&matrix, &a.to_json());
    write(&rhs, "1\n1\n1\n1\n");
    let out = hodlr_bin(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("'0'"), "{}", stderr(&out));
}

#[test]
fn verify_small_run_passes() {
    let out = hodlr_bin(&["verify", "--levels", "2", "--seeds", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("CHECK ").count(), 6);
    assert!(text.contains("CHECK oracle-equivalence pass"));
    assert!(text.contains("CHECK adjoint-duality pass"));
    assert!(text.contains("CHECK smw-identity pass"));
    assert!(text.contains("CHECK storage-formula pass"));
    assert!(text.contains("CHECK op-counts pass"));
    assert!(text.contains("CHECK error-paths pass"));
    assert!(text.contains("verify: all 6 checks passed"));
}

#[test]
fn verify_rejects_oversized_levels() {
    let out = hodlr_bin(&["verify", "--levels", "21"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv1 = dir.path().join("run1.csv");
    let csv2 = dir.path().join("run2.csv");
    for csv in [&csv1, &csv2] {
        let out = hodlr_bin(&[
            "bench", "--n0", "2", "--levels", "4", "--rank", "1", "--seed", "7", "--repeats",
            "2", "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let parse = |path: &Path| -> Vec<Vec<String>> {
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "level,n,setup_seconds,setup_seconds_per_dof,solve_seconds,solve_seconds_per_dof,setup_ops,solve_ops,residual_inf"
        );
        lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    };
    let rows1 = parse(&csv1);
    let rows2 = parse(&csv2);
    assert_eq!(rows1.len(), 4);
    assert_eq!(rows1.last().unwrap()[1], "32");
    // Non-timing columns are identical across runs with the same seed.
    for (r1, r2) in rows1.iter().zip(&rows2) {
        for idx in [0, 1, 6, 7, 8] {
            assert_eq!(r1[idx], r2[idx]);
        }
        assert!(r1[8].parse::<f64>().unwrap() <= 1e-10);
    }
}

#[test]
fn bench_with_threads_flag_agrees_on_counts() {
    let dir = tempfile::tempdir().unwrap();
    let csv1 = dir.path().join("seq.csv");
    let csv2 = dir.path().join("par.csv");
    for (csv, threads) in [(&csv1, "1"), (&csv2, "2")] {
        let out = hodlr_bin(&[
            "bench", "--n0", "2", "--levels", "3", "--rank", "2", "--seed", "1", "--repeats",
            "1", "--csv",
            csv.to_str().unwrap(),
            "--threads", threads,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let strip_timing = |path: &Path| -> Vec<String> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{},{},{},{},{}", f[0], f[1], f[6], f[7], f[8])
            })
            .collect()
    };
    assert_eq!(strip_timing(&csv1), strip_timing(&csv2));
}

#[test]
fn bench_rejects_zero_levels() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodlr_bin(&[
        "bench", "--n0", "2", "--levels", "0", "--rank", "1", "--seed", "1", "--repeats", "1",
        "--csv",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
