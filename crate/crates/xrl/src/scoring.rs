//! Attribution and metric evaluation over a set of explained samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xrl_core::eval::{aim, aum, curve_and_auc, pgi, pgu, ris, FidelityConfig, Metric, StabilityConfig, TopKMode};
use xrl_core::explain::{explain, ExplainContext, Method};
use xrl_core::{Dataset, QFunction};

use crate::error::{Error, Result};
use crate::timing::explain_timed;

/// A dataset row chosen for explanation. `idx` is the row number and also
/// the sample's random stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub idx: usize,
    pub state: Vec<f64>,
    pub action: usize,
}

/// Picks rows `indices` of `dataset` and labels each with the model's
/// greedy action.
pub fn select_samples(dataset: &Dataset, indices: &[usize], model: &dyn QFunction) -> Result<Vec<Sample>> {
    indices
        .iter()
        .map(|&idx| {
            let state = dataset.state(idx).to_vec();
            let action = model.greedy_action(&state)?;
            Ok(Sample { idx, state, action })
        })
        .collect()
}

/// Result of one metric over all samples. RIS has no K curve; its `auc`
/// is the mean over samples whose neighbourhood was defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricOutcome {
    pub metric: String,
    pub mode_chosen: Option<String>,
    pub ks: Vec<usize>,
    pub per_k: Vec<f64>,
    pub auc: f64,
    pub n_samples: usize,
    pub n_defined: usize,
}

/// Explains every sample in parallel, returning importances and the wall
/// time of each explanation in seconds, in sample order.
pub fn compute_attributions(
    method: Method,
    ctx: &ExplainContext<'_>,
    samples: &[Sample],
) -> Result<Vec<(Vec<f64>, f64)>> {
    samples
        .par_iter()
        .map(|s| {
            explain_timed(method, ctx, &s.state, s.action, s.idx as u64)
                .map(|(a, secs)| (a.values, secs))
                .map_err(|e| e.context(format!("{method} on sample {}", s.idx)))
        })
        .collect()
}

/// Everything a metric may need besides the samples themselves.
pub struct MetricInputs<'a> {
    pub model: &'a (dyn QFunction + Sync),
    pub fidelity: &'a FidelityConfig,
    pub stability: &'a StabilityConfig,
    /// Explainer used to re-explain neighbours for RIS.
    pub explainer: Option<(Method, &'a ExplainContext<'a>)>,
}

fn mean_over_samples(
    samples: &[Sample],
    f: impl Fn(&Sample, usize) -> xrl_core::Result<f64> + Sync + Send,
) -> Result<f64> {
    let values: Vec<f64> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| f(s, i).map_err(|e| Error::from(e).context(format!("sample {}", s.idx))))
        .collect::<Result<_>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn evaluate_metric(
    metric: Metric,
    inputs: &MetricInputs<'_>,
    samples: &[Sample],
    attributions: &[Vec<f64>],
) -> Result<MetricOutcome> {
    if samples.is_empty() || samples.len() != attributions.len() {
        return Err(Error::Usage(format!(
            "need matching non-empty samples and attributions, got {} and {}",
            samples.len(),
            attributions.len()
        )));
    }
    let model = inputs.model;
    let d = model.state_dim();
    if metric == Metric::Ris {
        return evaluate_ris(inputs, samples);
    }
    let states: Vec<&[f64]> = samples.iter().map(|s| s.state.as_slice()).collect();
    let reference = inputs.fidelity.reference_state.as_slice();
    let ks: Vec<usize> = (1..=d).collect();
    let curve = curve_and_auc(metric, &ks, |k, mode: TopKMode| match metric {
        Metric::Aim => aim(model, &states, attributions, k, mode, reference),
        Metric::Aum => aum(model, &states, attributions, k, mode, reference),
        Metric::Pgi | Metric::Pgu => mean_over_samples(samples, |s, i| {
            let gap = if metric == Metric::Pgi { pgi } else { pgu };
            gap(model, &s.state, &attributions[i], k, mode, inputs.fidelity, s.idx as u64)
        })
        .map_err(|e| xrl_core::Error::Internal(e.to_string())),
        Metric::Ris => unreachable!(),
    })?;
    Ok(MetricOutcome {
        metric: metric.name().into(),
        mode_chosen: Some(curve.mode.name().into()),
        ks: curve.ks,
        per_k: curve.per_k,
        auc: curve.auc,
        n_samples: samples.len(),
        n_defined: samples.len(),
    })
}

fn evaluate_ris(inputs: &MetricInputs<'_>, samples: &[Sample]) -> Result<MetricOutcome> {
    let (method, ctx) = inputs
        .explainer
        .ok_or_else(|| Error::Usage("ris needs the explanation method".into()))?;
    let values: Vec<Option<f64>> = samples
        .par_iter()
        .map(|s| {
            let explain_fn = |x: &[f64]| explain(method, ctx, x, s.action, s.idx as u64).map(|a| a.values);
            ris(&explain_fn, inputs.model, &s.state, inputs.stability, s.idx as u64)
                .map_err(|e| Error::from(e).context(format!("ris on sample {}", s.idx)))
        })
        .collect::<Result<_>>()?;
    let defined: Vec<f64> = values.into_iter().flatten().collect();
    if defined.is_empty() {
        return Err(Error::Runtime("ris is undefined on every sample: no prediction-preserving neighbour".into()));
    }
    Ok(MetricOutcome {
        metric: Metric::Ris.name().into(),
        mode_chosen: None,
        ks: Vec::new(),
        per_k: Vec::new(),
        auc: defined.iter().sum::<f64>() / defined.len() as f64,
        n_samples: samples.len(),
        n_defined: defined.len(),
    })
}
