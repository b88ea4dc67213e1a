use std::path::Path;

use proptest::prelude::*;
use xrl::tables::{read_attributions_csv, read_dataset_csv, write_attributions_csv, write_dataset_csv, AttributionRow};
use xrl::weights::{decode, encode};
use xrl_core::env::EnvKind;
use xrl_core::policy::MlpPolicy;
use xrl_core::{Dataset, EnvState, SAPair};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -10.0..10.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weights_round_trip(d in 1usize..12, a in 2usize..5, seed in any::<u64>()) {
        let policy = MlpPolicy::random(d, a, seed).unwrap();
        let bytes = encode(&policy);
        prop_assert_eq!(decode(&bytes, Path::new("mem")).unwrap(), policy);
        let cut = bytes.len() - 1 - (seed as usize % 64);
        let err = decode(&bytes[..cut], Path::new("mem")).unwrap_err().to_string();
        let expected = format!("missing {} bytes", bytes.len() - cut);
        prop_assert!(err.contains(&expected), "{}", err);
    }

    #[test]
    fn dataset_csv_preserves_every_bit(rows in prop::collection::vec((prop::array::uniform4(finite()), 0usize..2), 1..30)) {
        let spec = EnvKind::CartPole.spec();
        let pairs = rows
            .iter()
            .map(|(s, a)| SAPair { state: EnvState::new(s.to_vec()).unwrap(), action: *a })
            .collect();
        let data = Dataset::new(spec.clone(), pairs).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_dataset_csv(&data, &path).unwrap();
        let back = read_dataset_csv(&path, &spec).unwrap();
        prop_assert_eq!(back.len(), data.len());
        for (x, y) in data.pairs().iter().zip(back.pairs()) {
            prop_assert_eq!(x.action, y.action);
            let bits = |s: &EnvState| s.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&x.state), bits(&y.state));
        }
    }

    #[test]
    fn attribution_csv_round_trip(phis in prop::collection::vec(prop::collection::vec(finite(), 3), 1..20)) {
        let rows: Vec<AttributionRow> = phis
            .into_iter()
            .enumerate()
            .map(|(i, phi)| AttributionRow { sample_idx: i * 3, action: i % 2, phi, millis: 0.5 })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_attributions_csv(&rows, 3, &path).unwrap();
        prop_assert_eq!(read_attributions_csv(&path, 3).unwrap(), rows);
    }
}
