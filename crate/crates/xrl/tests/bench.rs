mod common;

use xrl::bench::{run_benchmark, BenchConfig};
use xrl::report::{render_csv, render_markdown, write_all};
use xrl_core::env::EnvKind;
use xrl_core::eval::Metric;
use xrl_core::explain::Method;

fn config(dir: &std::path::Path, rows: usize) -> BenchConfig {
    let (policy, dataset) = common::planted_files(dir, rows);
    BenchConfig::new(EnvKind::SyntheticLinear, policy, dataset, dir.join("out"), 21)
}

#[test]
fn single_cell_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 200);
    cfg.samples = 10;
    cfg.explainers = vec![Method::IntegratedGradients];
    cfg.metrics = vec![Metric::Aim];
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.cells.len(), 1);
    let cell = &report.cells[0];
    let result = cell.result.as_ref().unwrap();
    assert_eq!(result.per_k.len(), 8);
    assert!((result.auc - result.per_k.iter().sum::<f64>() / 8.0).abs() < 1e-12);
    assert_eq!(report.provenance.n_samples, 10);
    assert_eq!(report.provenance.dataset_rows, 200);
    assert!(report.latency[0].latency.unwrap().mean_seconds > 0.0);
}

#[test]
fn failing_explainer_is_recorded_and_others_complete() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 200);
    cfg.samples = 12;
    cfg.explainers = vec![Method::TabularShap, Method::Sarfa];
    cfg.metrics = vec![Metric::Aim, Metric::Pgu];
    cfg.gbdt.rounds = 0;
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.cells.len(), 4);
    for cell in &report.cells {
        if cell.explainer == "tabular_shap" {
            assert!(cell.result.is_none());
            assert!(cell.skipped.as_ref().unwrap().contains("student fit failed"));
        } else {
            assert!(cell.result.is_some() && cell.skipped.is_none());
        }
    }
    let md = render_markdown(&report);
    assert!(md.contains("| tabular_shap | skipped | skipped |"), "{md}");
}

#[test]
fn too_many_samples_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 20);
    cfg.samples = 21;
    assert_eq!(run_benchmark(&cfg).unwrap_err().exit_code(), 1);
}

#[test]
fn reports_are_consistent_projections() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 300);
    cfg.samples = 25;
    cfg.stability_n_nbr = 8;
    cfg.explainer.lime_samples = 200;
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.cells.len(), 30);
    write_all(&report, &cfg.out_dir).unwrap();

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cfg.out_dir.join("report.json")).unwrap()).unwrap();
    let csv_text = std::fs::read_to_string(cfg.out_dir.join("report.csv")).unwrap();
    assert_eq!(csv_text, render_csv(&report));
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let mut auc_rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        if &rec[2] != "auc" {
            continue;
        }
        auc_rows += 1;
        let cell = json["cells"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["explainer"] == rec[0] && c["metric"] == rec[1])
            .unwrap();
        let from_json = cell["result"]["auc"].as_f64().unwrap();
        let from_csv: f64 = rec[5].parse().unwrap();
        assert!((from_json - from_csv).abs() <= 1e-9);
        // The auc row must also be the mean of the per-K rows.
        if let Some(per_k) = cell["result"]["per_k"].as_array().filter(|v| !v.is_empty()) {
            let mean = per_k.iter().map(|v| v.as_f64().unwrap()).sum::<f64>() / per_k.len() as f64;
            assert!((mean - from_csv).abs() <= 1e-9);
        }
    }
    assert_eq!(auc_rows, 30);

    let md = std::fs::read_to_string(cfg.out_dir.join("report.md")).unwrap();
    let grid: Vec<&str> = md.lines().skip_while(|l| !l.starts_with("| Explainer | AIM")).take_while(|l| l.starts_with('|')).collect();
    assert_eq!(grid[0], "| Explainer | AIM↓ | AUM↑ | PGI↑ | PGU↓ | RIS↓ |");
    assert_eq!(grid.len(), 2 + 6);
    for row in &grid[2..] {
        assert_eq!(row.matches('|').count(), 7, "{row}");
    }
    for cell in &report.cells {
        let r = cell.result.as_ref().unwrap();
        if cell.metric == "aim" || cell.metric == "aum" {
            assert!((0.0..=1.0).contains(&r.auc));
        }
        assert!(r.auc >= 0.0);
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 300);
    cfg.samples = 15;
    cfg.stability_n_nbr = 4;
    cfg.explainer.lime_samples = 100;
    cfg.workers = 1;
    let serial = run_benchmark(&cfg).unwrap();
    cfg.workers = 4;
    let parallel = run_benchmark(&cfg).unwrap();
    assert_eq!(serial.without_timing(), parallel.without_timing());
}
