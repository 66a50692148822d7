use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lipreg::model::ModelFile;

fn lipreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipreg")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const THREE: &str = "id,x,label\na,0,0.1\nb,0.5,0.9\nc,1,0.4\n";

#[test]
fn fit_three_points_writes_values_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", THREE);
    let model = dir.path().join("m.toml");
    let o = lipreg(&["fit", "--input", s(&input), "--q", "1", "--eta", "0.1", "--output", s(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = ModelFile::read(&model).unwrap();
    assert_eq!(m.points.len(), 3);
    assert!(m.points.iter().all(|p| (0.0..=1.0).contains(&p.value)));
    assert_eq!(m.q, 1);
    assert_eq!(m.metric, "l2");
    assert!(stdout(&o).contains("risk_bound"));
}

#[test]
fn predict_on_training_points_stays_within_eta() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("id,x,y,label\n");
    for i in 0..12 {
        let (x, y) = ((i % 4) as f64 / 3.0, (i / 4) as f64 / 2.0);
        text.push_str(&format!("p{i},{x},{y},{}\n", (0.2 + 0.5 * x * y).min(1.0)));
    }
    let input = write(dir.path(), "p.csv", &text);
    let model = dir.path().join("m.toml");
    let o = lipreg(&["fit", "--input", s(&input), "--q", "2", "--eta", "0.1", "--output", s(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let preds = dir.path().join("pred.csv");
    let o = lipreg(&["predict", "--model", s(&model), "--queries", s(&input), "--output", s(&preds)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = ModelFile::read(&model).unwrap();
    let out = std::fs::read_to_string(&preds).unwrap();
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("id,prediction"));
    let rows: Vec<(String, f64)> = lines
        .map(|l| {
            let (id, v) = l.split_once(',').unwrap();
            (id.to_string(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 12);
    for ((id, p), point) in rows.iter().zip(&m.points) {
        assert_eq!(id, &point.id);
        assert!((p - point.value).abs() <= m.eta + 1e-12, "{id}: {p} vs {}", point.value);
    }
}

#[test]
fn out_of_range_label_is_a_data_error_citing_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "id,x,label\na,0,0.2\nb,1,1.5\n");
    let o = lipreg(&["fit", "--input", s(&input), "--output", s(&dir.path().join("m.toml"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("1.5"), "{err}");
}

#[test]
fn unparsable_number_cites_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "id,x,label\na,0,0.2\nb,zero,0.5\n");
    let o = lipreg(&["fit", "--input", s(&input), "--output", s(&dir.path().join("m.toml"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_with_usage() {
    let o = lipreg(&["fit", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    let o = lipreg(&["bound", "--n", "10", "--lipschitz", "1", "--ddim", "1", "--q", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", THREE);
    let o = lipreg(&["fit", "--input", s(&input), "--eta", "0.5", "--output", s(&dir.path().join("m.toml"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_exhaustion_exits_with_budget_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", THREE);
    let model = dir.path().join("m.toml");
    let o = lipreg(&["fit", "--input", s(&input), "--max-iterations", "1", "--output", s(&model)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!model.exists());
}

#[test]
fn matrix_metric_fit_and_predict() {
    let dir = tempfile::tempdir().unwrap();
    // Four points on a line at 0, 1, 2, 4.
    let xs = [0.0f64, 1.0, 2.0, 4.0];
    let mut m = String::new();
    for a in xs {
        let row: Vec<String> = xs.iter().map(|b| (a - b).abs().to_string()).collect();
        m.push_str(&row.join(","));
        m.push('\n');
    }
    let matrix = write(dir.path(), "d.csv", &m);
    let labels = write(dir.path(), "y.csv", "id,label\nw,0.1\nx,0.2\ny,0.3\nz,0.5\n");
    let model = dir.path().join("m.toml");
    let o = lipreg(&[
        "fit", "--input", s(&matrix), "--metric", "matrix", "--labels", s(&labels), "--eta", "0.1", "--output", s(&model),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fitted = ModelFile::read(&model).unwrap();
    assert_eq!(fitted.metric, "matrix");
    assert_eq!(fitted.scale, 0.25);
    let queries = write(dir.path(), "q.csv", "id,d1,d2,d3,d4\nx,1,0,1,3\nfar,10,9,8,6\n");
    let o = lipreg(&["--format", "csv", "predict", "--model", s(&model), "--queries", s(&queries)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let x: f64 = out.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((x - fitted.points[1].value).abs() <= 0.1 + 1e-12);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn matrix_triangle_violation_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "d.csv", "0,1,5\n1,0,1\n5,1,0\n");
    let labels = write(dir.path(), "y.csv", "id,label\na,0\nb,0\nc,1\n");
    let o = lipreg(&[
        "fit", "--input", s(&matrix), "--metric", "matrix", "--labels", s(&labels), "--output", s(&dir.path().join("m.toml")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("triangle"), "{}", stderr(&o));
}

#[test]
fn asymmetric_matrix_cites_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "d.csv", "0,1,2\n1,0,1\n2,1.5,0\n");
    let o = lipreg(&["spanner-stats", "--input", s(&matrix), "--metric", "matrix"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn model_version_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", THREE);
    let model = dir.path().join("m.toml");
    assert!(lipreg(&["fit", "--input", s(&input), "--eta", "0.1", "--output", s(&model)]).status.success());
    let text = std::fs::read_to_string(&model).unwrap().replacen("version = 1", "version = 7", 1);
    std::fs::write(&model, text).unwrap();
    let o = lipreg(&["predict", "--model", s(&model), "--queries", s(&input)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("version 7"), "{}", stderr(&o));
}

#[test]
fn bound_reports_csv_columns() {
    let o = lipreg(&["--format", "csv", "bound", "--n", "1000", "--lipschitz", "2", "--ddim", "1", "--eta", "0.01"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("n,lipschitz,empirical_risk,stratum,penalty,perturbation,risk_bound")
    );
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[3], "200");
    assert_eq!(fields[4], "1");
}

#[test]
fn spanner_stats_reports_stretch() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("id,x,y\n");
    for i in 0..40 {
        let t = i as f64 * 0.7;
        text.push_str(&format!("{i},{},{}\n", t.cos() * (1.0 + i as f64 / 40.0), t.sin()));
    }
    let input = write(dir.path(), "p.csv", &text);
    let o = lipreg(&["--format", "csv", "spanner-stats", "--input", s(&input), "--delta", "0.2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let header: Vec<&str> = out.lines().next().unwrap().split(',').collect();
    let values: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let stretch: f64 = values[header.iter().position(|h| *h == "stretch").unwrap()].parse().unwrap();
    assert!(stretch <= 1.2 + 1e-9);
}

fn experiment(seed: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "--seed", seed, "--format", "csv", "experiment", "--generator", "cycle", "--n", "30,60", "--replicas", "2",
        "--eta-rule", "fixed", "--eta", "0.1", "--test-draws", "200",
    ];
    args.extend_from_slice(extra);
    lipreg(&args)
}

#[test]
fn experiment_is_byte_identical_for_equal_seeds() {
    let a = experiment("11", &["--threads", "1"]);
    let b = experiment("11", &["--threads", "4"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let c = experiment("12", &["--threads", "1"]);
    assert_ne!(a.stdout, c.stdout);
    let out = stdout(&a);
    assert_eq!(out.lines().next(), Some("n,replica,seed,eta,lipschitz,empirical_risk,risk_bound,test_risk"));
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn experiment_single_size_gives_single_row() {
    let o = lipreg(&[
        "--format", "csv", "experiment", "--generator", "uniform", "--size", "6", "--n", "25", "--replicas", "1",
        "--eta-rule", "fixed", "--eta", "0.1", "--test-draws", "100",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn experiment_rejects_decreasing_schedule() {
    let o = lipreg(&["experiment", "--n", "100,50"]);
    assert_eq!(o.status.code(), Some(2));
}
