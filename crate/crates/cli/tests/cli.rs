use std::path::Path;
use std::process::{Command, Output};

use gue_gap_core::precision::{agreement_digits, erfc};
use gue_gap_core::weight::{seed_r1, GapWeight};
use gue_gap_core::Real;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gue-gap-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn table_starts_from_the_seeds() {
    let o = lab(&["table", "--n-max", "2", "--a-list", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# gue-gap-lab v1 config="));
    assert!(text.lines().nth(1).unwrap() == "n,a,beta,h,Pn_at_a,p,R,r,sigma,prob,status");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][7], "0");
    let w = GapWeight::new(&Real::one(512), 512).unwrap();
    let r1 = Real::parse(&rows[1][7], 512).unwrap();
    assert!(agreement_digits(&r1, &seed_r1(&w).unwrap()) >= 38);
    let p1 = Real::parse(&rows[1][9], 512).unwrap();
    assert!(agreement_digits(&p1, &erfc(&Real::one(512), 512).unwrap()) >= 38);
}

#[test]
fn zero_gap_rows() {
    let o = lab(&["table", "--n-max", "3", "--a-list", "0"]);
    assert!(o.status.success());
    for row in csv_rows(&stdout(&o)) {
        assert_eq!(row[10], "ok");
        assert!(row[9].starts_with("1.0000000000"));
        assert_eq!(row[7], "0");
        if row[0] == "0" {
            assert_eq!(row[8], "0");
        }
    }
}

#[test]
fn csv_numbers_round_trip_at_printed_precision() {
    let o = lab(&["table", "--n-max", "6", "--a-list", "0.7,2.5"]);
    for row in csv_rows(&stdout(&o)) {
        for cell in &row[2..10] {
            if cell == "0" {
                continue;
            }
            let sig = cell
                .split('e')
                .next()
                .unwrap()
                .replace(['-', '.'], "")
                .len();
            let back = Real::parse(cell, 1024).unwrap().to_sci(sig);
            assert_eq!(&back, cell);
        }
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = [
        "table",
        "--n-max",
        "5",
        "--a-min",
        "0.5",
        "--a-max",
        "2",
        "--a-steps",
        "4",
    ];
    let a = lab(&args);
    let b = lab(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = [
        "verify",
        "--n-max",
        "3",
        "--a-list",
        "1",
        "--suite",
        "identities",
    ];
    assert_eq!(lab(&v).stdout, lab(&v).stdout);
    let other = lab(&[
        "table",
        "--n-max",
        "5",
        "--a-list",
        "0.5,1,1.5,2",
        "--digits",
        "30",
    ]);
    let header = |o: &Output| stdout(o).lines().next().unwrap().to_string();
    assert_ne!(header(&a), header(&other));
}

#[test]
fn default_forms_report_the_printed_failures() {
    let o = lab(&[
        "verify",
        "--n-max",
        "4",
        "--a-list",
        "1.5",
        "--suite",
        "identities",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report = json(&o);
    let entries = report.as_array().unwrap();
    let failing: std::collections::BTreeSet<&str> = entries
        .iter()
        .filter(|e| e["pass"] == false)
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        failing.into_iter().collect::<Vec<_>>(),
        ["p_closed", "sum_R"]
    );
    assert!(entries
        .iter()
        .all(|e| e["residual"].is_string() && e["tolerance"].is_string()));
}

#[test]
fn corrected_forms_pass_every_suite() {
    let o = lab(&[
        "verify",
        "--n-max",
        "5",
        "--a-list",
        "0.7,2",
        "--forms",
        "corrected",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report = json(&o);
    let names: std::collections::BTreeSet<&str> = report
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    for expected in [
        "r_ladder",
        "s2_prime",
        "mdp2",
        "chazy.corrected",
        "prob_routes",
        "prob_erfc",
    ] {
        assert!(names.contains(expected), "{expected}");
    }
    assert!(!names.contains("sum_R"));
}

#[test]
fn tightened_tolerance_fails_and_lists_every_residual() {
    let base = [
        "verify", "--n-max", "3", "--a-list", "1", "--suite", "discrete",
    ];
    let default_count = json(&lab(&base)).as_array().unwrap().len();
    let tight = lab(&[&base[..], &["--tol", "*=1e-99"]].concat());
    assert_eq!(tight.status.code(), Some(1));
    assert_eq!(json(&tight).as_array().unwrap().len(), default_count);
    let zero = lab(&[&base[..], &["--tol", "*=0"]].concat());
    assert_eq!(zero.status.code(), Some(1));
    let report = json(&zero);
    let entries = report.as_array().unwrap();
    assert_eq!(entries.len(), default_count);
    assert!(entries.iter().all(|e| e["pass"] == (e["residual"] == "0")));
}

#[test]
fn named_tolerance_override() {
    let o = lab(&[
        "verify",
        "--n-max",
        "3",
        "--a-list",
        "1",
        "--suite",
        "identities",
        "--forms",
        "printed",
        "--tol",
        "sum_R=1",
        "--tol",
        "p_closed=1",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn oracle_suite_discrepancies() {
    let o = lab(&[
        "verify",
        "--n-max",
        "10",
        "--a-list",
        "0.1,0.5,1,2",
        "--suite",
        "oracle",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = json(&o);
    let routes: Vec<f64> = report
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["name"] == "prob_routes")
        .map(|e| e["residual"].as_str().unwrap().parse().unwrap())
        .collect();
    assert_eq!(routes.len(), 40);
    assert!(routes.iter().all(|d| *d < 1e-12));
}

#[test]
fn verify_rejects_zero_gap() {
    let o = lab(&["verify", "--a-list", "0,1", "--suite", "identities"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("a > 0"));
}

#[test]
fn probability_records() {
    let o = lab(&["prob", "--n", "1", "--a", "1"]);
    let rec = json(&o);
    let exact = erfc(&Real::one(512), 512).unwrap();
    for key in ["p_hankel", "p_fredholm"] {
        let v = Real::parse(rec[key].as_str().unwrap(), 512).unwrap();
        assert!(agreement_digits(&v, &exact) >= 38, "{key}");
    }
    let zero = json(&lab(&["prob", "--n", "5", "--a", "0"]));
    assert!(zero["p_hankel"]
        .as_str()
        .unwrap()
        .starts_with("1.000000000"));
    assert!(zero["p_fredholm"].is_null());
    assert!(zero["notice"].is_string());
    let mid = json(&lab(&["prob", "--n", "4", "--a", "0.8"]));
    let d: f64 = mid["discrepancy"].as_str().unwrap().parse().unwrap();
    assert!(d < 1e-12);
}

fn write_table(dir: &Path, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.join("table.csv");
    let mut args = vec![
        "table",
        "--n-max",
        "5",
        "--a-min",
        "0.2",
        "--a-max",
        "2.2",
        "--a-steps",
        "6",
    ];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", path.to_str().unwrap()]);
    assert!(lab(&args).status.success());
    path
}

#[test]
fn sigma_plot_has_one_negative_line_per_n() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_table(dir.path(), &[]);
    let svg_path = dir.path().join("sigma.svg");
    let o = lab(&[
        "plot",
        "--input",
        table.to_str().unwrap(),
        "--quantity",
        "sigma",
        "--n-list",
        "1,2,3,4,5",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 5);
    assert!(svg.contains(r#"version="1.1""#) && !svg.contains("script"));
    let rows = csv_rows(&std::fs::read_to_string(&table).unwrap());
    for row in rows.iter().filter(|r| r[0] != "0") {
        assert!(
            row[8].starts_with('-'),
            "sigma at n={} a={}",
            row[0],
            row[1]
        );
    }
}

#[test]
fn probability_decreases_along_each_line() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("prob.svg");
    let table = write_table(dir.path(), &["--plot", svg_path.to_str().unwrap()]);
    assert_eq!(
        std::fs::read_to_string(&svg_path)
            .unwrap()
            .matches("<polyline")
            .count(),
        6
    );
    let rows = csv_rows(&std::fs::read_to_string(&table).unwrap());
    for n in 1..=5 {
        let probs: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == n.to_string())
            .map(|r| r[9].parse().unwrap())
            .collect();
        assert!(probs[0] < 1.0);
        assert!(probs.windows(2).all(|w| w[1] < w[0]), "n={n}");
    }
}

#[test]
fn empty_selection_and_unknown_column() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(
        &empty,
        "# gue-gap-lab v1 config=0\nn,a,beta,h,Pn_at_a,p,R,r,sigma,prob,status\n",
    )
    .unwrap();
    let out = dir.path().join("x.svg");
    let o = lab(&[
        "plot",
        "--input",
        empty.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty selection"));
    let table = write_table(dir.path(), &[]);
    let o = lab(&[
        "plot",
        "--input",
        table.to_str().unwrap(),
        "--quantity",
        "zeta",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown column"));
}
