mod common;

use xrl::tables::read_dataset_csv;
use xrl::timing::{explain_timed, time_explainer};
use xrl::weights::load_weights;
use xrl_core::env::EnvKind;
use xrl_core::explain::{ExplainContext, ExplainerConfig, Method};
use xrl_core::trees::{fit_gbdt, GbdtParams};
use xrl_core::QFunction;

#[test]
fn per_sample_timing_excludes_student_fit() {
    let dir = tempfile::tempdir().unwrap();
    let (policy, dataset) = common::planted_files(dir.path(), 2_000);
    let policy = load_weights(&policy).unwrap();
    let data = read_dataset_csv(&dataset, &EnvKind::SyntheticLinear.spec()).unwrap();
    let student = fit_gbdt(&data, &GbdtParams::default()).unwrap().model;
    let config = ExplainerConfig::default();
    let ctx = ExplainContext { policy: Some(&policy), student: Some(&student), dataset: Some(&data), config: &config };
    let samples: Vec<(Vec<f64>, usize)> = (0..40)
        .map(|i| {
            let x = data.state(i).to_vec();
            let a = policy.greedy_action(&x).unwrap();
            (x, a)
        })
        .collect();
    let first = time_explainer(Method::TabularShap, &ctx, &samples).unwrap();
    let second = time_explainer(Method::TabularShap, &ctx, &samples).unwrap();
    for l in [first, second] {
        assert!(l.mean_seconds > 0.0 && l.p95_seconds < 60.0);
    }
    let ratio = first.mean_seconds / second.mean_seconds;
    assert!((0.2..5.0).contains(&ratio), "{first:?} vs {second:?}");

    for method in Method::ALL {
        let (a, secs) = explain_timed(method, &ctx, &samples[0].0, samples[0].1, 0).unwrap();
        assert_eq!(a.values.len(), 8);
        assert!(secs > 0.0 && secs < 60.0, "{method}: {secs}");
    }
}
