use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ratapprox(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratapprox"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RATAPPROX_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> Output {
    let o = ratapprox(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path).unwrap()
}

/// Data rows of a CSV file with a header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn gen_points_linspace() {
    let dir = TempDir::new().unwrap();
    ok(
        &[
            "gen-points",
            "--points",
            "linspace",
            "--n",
            "4",
            "--a",
            "0.25",
            "--b",
            "1",
        ],
        dir.path(),
    );
    let text = read(dir.path().join("points.csv"));
    assert!(text.starts_with("x\n"));
    assert!(!text.contains('\r'));
    let xs: Vec<f64> = rows(&text).iter().map(|r| num(&r[0])).collect();
    assert_eq!(xs, vec![0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn gen_points_newman_and_symmetric() {
    let dir = TempDir::new().unwrap();
    ok(
        &["gen-points", "--points", "newman", "--n", "1024"],
        dir.path(),
    );
    let r = rows(&read(dir.path().join("points.csv")));
    assert_eq!(r.len(), 1024);
    let first = num(&r[0][0]);
    assert!((first - 1.2664e-14).abs() <= 1e-18, "{first}");
    assert!((num(&r[1023][0]) - 0.9692).abs() <= 1e-4);

    ok(
        &[
            "gen-points",
            "--points",
            "chebyshev",
            "--n",
            "10",
            "--symmetric",
        ],
        dir.path(),
    );
    let xs: Vec<f64> = rows(&read(dir.path().join("points.csv")))
        .iter()
        .map(|r| num(&r[0]))
        .collect();
    assert_eq!(xs.len(), 20);
    for i in 0..10 {
        assert_eq!(xs[i], -xs[19 - i]);
    }
}

#[test]
fn gen_points_zolotarev_within_interval() {
    let dir = TempDir::new().unwrap();
    ok(
        &[
            "gen-points",
            "--points",
            "zolotarev",
            "--n",
            "300",
            "--a",
            "0.001",
            "--b",
            "0.9",
        ],
        dir.path(),
    );
    for r in rows(&read(dir.path().join("points.csv"))) {
        let x = num(&r[0]);
        assert!((0.001..=0.9).contains(&x), "{x}");
    }
}

#[test]
fn invalid_config_exits_nonzero() {
    let dir = TempDir::new().unwrap();
    let o = ratapprox(&["gen-points", "--a", "0.5", "--b", "0.25"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 < a < b <= 1"));
    let o = ratapprox(&["fit", "--n", "50"], dir.path());
    assert!(!o.status.success(), "fit without order or delta");
    let o = ratapprox(&["reproduce-table", "7"], dir.path());
    assert!(!o.status.success());
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"unknown_field": 3}"#).unwrap();
    let o = ratapprox(&["fit", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"points": "linspace", "n": 3, "a": 0.5, "b": 1.0}"#,
    )
    .unwrap();
    ok(
        &["gen-points", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(rows(&read(dir.path().join("points.csv"))).len(), 3);
    ok(
        &["gen-points", "--config", cfg.to_str().unwrap(), "--n", "5"],
        dir.path(),
    );
    assert_eq!(rows(&read(dir.path().join("points.csv"))).len(), 5);
}

#[test]
fn fit_writes_model_report_and_curve() {
    let dir = TempDir::new().unwrap();
    ok(
        &["fit", "--n", "100", "--order", "12", "--add-zero"],
        dir.path(),
    );
    let model: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("model.json"))).unwrap();
    assert_eq!(model["order"]["den_degree"], 12);
    assert_eq!(model["order"]["num_degree"], 11);
    let report: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    let eps = report["eps_total"].as_f64().unwrap();
    assert!(eps > 0.0 && eps < 1e-2);
    let curve = read(dir.path().join("error_curve.csv"));
    assert!(curve.starts_with("x,abs_error\n"));
    let r = rows(&curve);
    assert_eq!(r.len(), 100_000);
    assert_eq!(num(&r[0][0]), -1.0);
    assert_eq!(num(&r[99_999][0]), 1.0);
    let curve_max = r.iter().map(|v| num(&v[1])).fold(0.0, f64::max);
    assert!(curve_max <= eps * (1.0 + 1e-9));
    assert!(curve_max >= 0.5 * eps);
}

#[test]
fn fit_newman_matches_module_bound() {
    let dir = TempDir::new().unwrap();
    ok(&["fit", "--method", "newman", "--n", "25"], dir.path());
    let report: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    let eps = report["eps_total"].as_f64().unwrap();
    assert!(report["valid"].as_bool().unwrap());
    assert!(eps <= 3.0 * (-5.0f64).exp(), "{eps}");
}

fn fit_reference(points: &str) -> f64 {
    let dir = TempDir::new().unwrap();
    ok(
        &[
            "fit",
            "--points",
            points,
            "--partition",
            "same",
            "--order",
            "28",
            "--add-zero",
        ],
        dir.path(),
    );
    let report: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    report["eps_total"].as_f64().unwrap()
}

#[test]
fn fit_reference_chebyshev_same() {
    let eps = fit_reference("chebyshev");
    let ratio = eps / 6.1489e-05;
    assert!((0.5..=2.0).contains(&ratio), "{eps:e}");
}

#[test]
fn fit_reference_zolotarev_same() {
    let eps = fit_reference("zolotarev");
    let ratio = eps / 5.5785e-05;
    assert!((0.5..=2.0).contains(&ratio), "{eps:e}");
}

#[test]
fn sweep_rows_and_bounds() {
    let dir = TempDir::new().unwrap();
    ok(
        &[
            "sweep",
            "--n",
            "128",
            "--order-min",
            "6",
            "--order-max",
            "40",
        ],
        dir.path(),
    );
    let text = read(dir.path().join("sweep.csv"));
    assert!(text.starts_with("order,method,eps_total,NewmanUpper,BulanovLower,StahlEstimate\n"));
    let r = rows(&text);
    let methods = [
        "loewner-split",
        "loewner-alternating",
        "loewner-same",
        "aaa",
        "newman",
    ];
    for m in methods {
        let mine: Vec<_> = r.iter().filter(|v| v[1] == m).collect();
        assert_eq!(mine.len(), 35, "{m}");
        let orders: Vec<usize> = mine.iter().map(|v| v[0].parse().unwrap()).collect();
        assert_eq!(orders, (6..=40).collect::<Vec<_>>());
        for col in 3..6 {
            let vals: Vec<f64> = mine.iter().map(|v| num(&v[col])).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "{m} column {col}");
        }
    }
}

#[test]
fn sweep_stahl_column() {
    let dir = TempDir::new().unwrap();
    ok(
        &[
            "sweep",
            "--n",
            "64",
            "--order-min",
            "46",
            "--order-max",
            "48",
        ],
        dir.path(),
    );
    let r = rows(&read(dir.path().join("sweep.csv")));
    let row = r.iter().find(|v| v[0] == "48").unwrap();
    let stahl = num(&row[5]);
    assert!((stahl - 2.8211e-09).abs() <= 0.00005e-09, "{stahl:e}");
}

#[test]
fn sweep_independent_of_thread_count() {
    let run = |threads: &str| {
        let dir = TempDir::new().unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_ratapprox"))
            .args([
                "sweep",
                "--n",
                "64",
                "--order-min",
                "4",
                "--order-max",
                "16",
                "--out",
            ])
            .arg(dir.path())
            .env("RATAPPROX_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        read(dir.path().join("sweep.csv"))
    };
    assert_eq!(run("1"), run("3"));
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ratapprox"))
        .args(["bounds", "--out"])
        .arg(dir.path())
        .env("RATAPPROX_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!o.status.success());
}

#[test]
fn reproduce_table_four() {
    let dir = TempDir::new().unwrap();
    let o = ok(&["reproduce-table", "4"], dir.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains("Table 4"));
    let text = read(dir.path().join("table4.csv"));
    assert!(text.starts_with("row,column,published,computed,ratio,valid\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 12);
    let split = r
        .iter()
        .find(|v| v[0] == "delta=1e-9" && v[1] == "loewner-split")
        .unwrap();
    assert_eq!(num(&split[2]), 28.0);
    assert!((num(&split[3]) - 28.0).abs() <= 3.0);
}

#[test]
fn iterate_trace_and_determinism() {
    let run = || {
        let dir = TempDir::new().unwrap();
        ok(
            &[
                "iterate",
                "--n",
                "100",
                "--order",
                "10",
                "--xi",
                "1e-300",
                "--max-steps",
                "5",
            ],
            dir.path(),
        );
        (
            read(dir.path().join("trace.csv")),
            read(dir.path().join("model.json")),
        )
    };
    let (trace, model) = run();
    let r = rows(&trace);
    assert_eq!(r.len(), 6);
    for (m, row) in r.iter().enumerate() {
        assert_eq!(row[0], m.to_string());
    }
    assert_eq!(run(), (trace, model));
}

#[test]
fn bounds_table() {
    let dir = TempDir::new().unwrap();
    ok(
        &["bounds", "--order-min", "1", "--order-max", "10"],
        dir.path(),
    );
    let text = read(dir.path().join("bounds.csv"));
    assert!(text.starts_with("order,NewmanUpper,NewmanLower,BulanovLower,StahlEstimate\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 10);
    assert_eq!(r[0][1], "NaN");
    assert!(num(&r[3][1]).is_finite());
}
