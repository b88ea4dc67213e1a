use std::time::Instant;

use serde::{Deserialize, Serialize};
use xrl_core::explain::{explain, Attribution, ExplainContext, Method};

use crate::error::Result;

/// Per-sample explanation latency in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Latency {
    pub mean_seconds: f64,
    pub p95_seconds: f64,
}

impl Latency {
    /// Mean and nearest-rank 95th percentile. `None` for no samples.
    pub fn from_seconds(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = (0.95 * sorted.len() as f64).ceil() as usize;
        Some(Self {
            mean_seconds: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p95_seconds: sorted[rank.max(1) - 1],
        })
    }
}

/// Runs one explanation and measures only the explainer call.
pub fn explain_timed(
    method: Method,
    ctx: &ExplainContext<'_>,
    state: &[f64],
    action: usize,
    stream: u64,
) -> Result<(Attribution, f64)> {
    let start = Instant::now();
    let attribution = explain(method, ctx, state, action, stream)?;
    Ok((attribution, start.elapsed().as_secs_f64()))
}

/// Serially explains every `(state, action)` pair, using the position as
/// the random stream, and summarises the wall times.
pub fn time_explainer(method: Method, ctx: &ExplainContext<'_>, samples: &[(Vec<f64>, usize)]) -> Result<Latency> {
    let mut seconds = Vec::with_capacity(samples.len());
    for (i, (state, action)) in samples.iter().enumerate() {
        seconds.push(explain_timed(method, ctx, state, *action, i as u64)?.1);
    }
    Latency::from_seconds(&seconds).ok_or_else(|| crate::Error::Usage("time_explainer needs samples".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentile() {
        let xs: Vec<f64> = (1..=20).map(f64::from).collect();
        let l = Latency::from_seconds(&xs).unwrap();
        assert_eq!(l.p95_seconds, 19.0);
        assert_eq!(l.mean_seconds, 10.5);
        let one = Latency::from_seconds(&[0.3]).unwrap();
        assert_eq!((one.mean_seconds, one.p95_seconds), (0.3, 0.3));
        assert!(Latency::from_seconds(&[]).is_none());
    }
}
