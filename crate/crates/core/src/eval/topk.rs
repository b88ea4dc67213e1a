use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{input_err, Error, Result};
use crate::math::abs;

/// How importances are ranked when picking the top or bottom K features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopKMode {
    ByAbsoluteValue,
    ByRawValue,
}

impl TopKMode {
    pub const ALL: [TopKMode; 2] = [TopKMode::ByAbsoluteValue, TopKMode::ByRawValue];

    pub fn name(self) -> &'static str {
        match self {
            TopKMode::ByAbsoluteValue => "by_absolute_value",
            TopKMode::ByRawValue => "by_raw_value",
        }
    }

    fn key(self, v: f64) -> f64 {
        match self {
            TopKMode::ByAbsoluteValue => abs(v),
            TopKMode::ByRawValue => v,
        }
    }
}

impl fmt::Display for TopKMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopKMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TopKMode::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| input_err!("unknown top-k mode '{s}'"))
    }
}

fn ranked(values: &[f64], k: usize, mode: TopKMode, descending: bool) -> Result<Vec<usize>> {
    if k > values.len() {
        return Err(input_err!("k = {k} exceeds dimension {}", values.len()));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ka, kb) = (mode.key(values[a]), mode.key(values[b]));
        let ord = if descending { kb.total_cmp(&ka) } else { ka.total_cmp(&kb) };
        ord.then(a.cmp(&b))
    });
    idx.truncate(k);
    Ok(idx)
}

/// Indices of the `k` largest keys, ties broken by lower index.
pub fn top_k(values: &[f64], k: usize, mode: TopKMode) -> Result<Vec<usize>> {
    ranked(values, k, mode, true)
}

/// Indices of the `k` smallest keys, ties broken by lower index.
pub fn bottom_k(values: &[f64], k: usize, mode: TopKMode) -> Result<Vec<usize>> {
    ranked(values, k, mode, false)
}

/// Copy of `state` with the listed features set to the reference values.
pub fn mask(state: &[f64], indices: &[usize], reference: &[f64]) -> Vec<f64> {
    let mut out = state.to_vec();
    for &i in indices {
        out[i] = reference[i];
    }
    out
}
