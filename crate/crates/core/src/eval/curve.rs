use alloc::vec::Vec;

use super::topk::TopKMode;
use super::Metric;
use crate::error::{input_err, Result};
use crate::math::mean;

/// A metric evaluated at each K, summarised by the arithmetic mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurve {
    pub metric: Metric,
    pub mode: TopKMode,
    pub ks: Vec<usize>,
    pub per_k: Vec<f64>,
    pub auc: f64,
}

pub fn curve_for_mode(
    metric: Metric,
    ks: &[usize],
    mode: TopKMode,
    mut eval: impl FnMut(usize, TopKMode) -> Result<f64>,
) -> Result<MetricCurve> {
    if ks.is_empty() {
        return Err(input_err!("k range must be non-empty"));
    }
    let per_k = ks.iter().map(|&k| eval(k, mode)).collect::<Result<Vec<_>>>()?;
    let auc = mean(&per_k);
    Ok(MetricCurve { metric, mode, ks: ks.to_vec(), per_k, auc })
}

/// Evaluates the curve under both top-K modes and keeps the one whose AUC
/// is better for `metric`; ties keep the absolute-value ranking.
pub fn curve_and_auc(
    metric: Metric,
    ks: &[usize],
    mut eval: impl FnMut(usize, TopKMode) -> Result<f64>,
) -> Result<MetricCurve> {
    let by_abs = curve_for_mode(metric, ks, TopKMode::ByAbsoluteValue, &mut eval)?;
    let by_raw = curve_for_mode(metric, ks, TopKMode::ByRawValue, &mut eval)?;
    Ok(if metric.better(by_raw.auc, by_abs.auc) { by_raw } else { by_abs })
}
