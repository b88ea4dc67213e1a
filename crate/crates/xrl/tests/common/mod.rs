use std::path::{Path, PathBuf};

use xrl::tables::write_dataset_csv;
use xrl::weights::save_weights;
use xrl_core::dataset::collect;
use xrl_core::env::{EnvKind, PLANTED_WEIGHTS};
use xrl_core::policy::MlpPolicy;

/// Writes the planted synthetic policy and a dataset collected with it.
pub fn planted_files(dir: &Path, rows: usize) -> (PathBuf, PathBuf) {
    let weights: Vec<Vec<f64>> = PLANTED_WEIGHTS.iter().map(|r| r.to_vec()).collect();
    let policy = MlpPolicy::from_linear(&weights).unwrap();
    let mut env = EnvKind::SyntheticLinear.build();
    let data = collect(env.as_mut(), &policy, 1, rows, 3).unwrap();
    let (p, d) = (dir.join("planted.bin"), dir.join("planted.csv"));
    save_weights(&policy, &p).unwrap();
    write_dataset_csv(&data, &d).unwrap();
    (p, d)
}
