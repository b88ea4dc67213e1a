//! Feature attribution methods behind one dispatch point.
//!
//! Every method produces one importance per state feature for a given
//! `(state, explained action)` pair. Randomised methods draw from a stream
//! derived from `(config.seed, stream)`, so the same sample explained twice,
//! or on another thread, gives the same vector.

mod gradient;
mod lime;
mod perturb;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use gradient::{explain_gradient_shap, explain_ig};
pub use lime::{explain_tabular_lime, weighted_ridge};
pub use perturb::{explain_perturbation_saliency, explain_sarfa, sarfa_salience};

use crate::dataset::Dataset;
use crate::error::{check_dim, input_err, Error, Result};
use crate::math::softmax;
use crate::model::Differentiable;
use crate::rng::derive_seed;
use crate::trees::{tree_shap, GbdtModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    TabularShap,
    TabularLime,
    PerturbationSaliency,
    Sarfa,
    IntegratedGradients,
    GradientShap,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::TabularShap,
        Method::TabularLime,
        Method::PerturbationSaliency,
        Method::Sarfa,
        Method::IntegratedGradients,
        Method::GradientShap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::TabularShap => "tabular_shap",
            Method::TabularLime => "tabular_lime",
            Method::PerturbationSaliency => "perturbation_saliency",
            Method::Sarfa => "sarfa",
            Method::IntegratedGradients => "integrated_gradients",
            Method::GradientShap => "gradient_shap",
        }
    }

    /// Methods whose importances are never negative.
    pub fn is_non_negative(self) -> bool {
        matches!(self, Method::PerturbationSaliency | Method::Sarfa)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            input_err!(
                "unknown method '{s}' (expected one of tabular_shap, tabular_lime, perturbation_saliency, sarfa, integrated_gradients, gradient_shap)"
            )
        })
    }
}

/// Signed per-feature importance for one explained action.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribution {
    pub method: Method,
    pub values: Vec<f64>,
    pub explained_action: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgBaseline {
    Zero,
    DatasetMean,
}

/// How perturbation saliency and SARFA remove a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Replace the feature by its dataset mean.
    MeanReplace,
    /// Add `N(0, (scale · std_i)^2)` jitter, averaged over several draws.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainerConfig {
    pub ig_steps: usize,
    pub ig_baseline: IgBaseline,
    pub gshap_samples: usize,
    pub lime_samples: usize,
    /// `None` means `0.75 · sqrt(d)`.
    pub lime_kernel_width: Option<f64>,
    pub lime_ridge: f64,
    pub perturbation: Perturbation,
    pub perturbation_scale: f64,
    pub gaussian_draws: usize,
    pub seed: u64,
}

impl Default for ExplainerConfig {
    fn default() -> Self {
        Self {
            ig_steps: 64,
            ig_baseline: IgBaseline::Zero,
            gshap_samples: 64,
            lime_samples: 1000,
            lime_kernel_width: None,
            lime_ridge: 1e-3,
            perturbation: Perturbation::MeanReplace,
            perturbation_scale: 0.5,
            gaussian_draws: 8,
            seed: 0,
        }
    }
}

impl ExplainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ig_steps == 0 || self.gshap_samples == 0 || self.lime_samples == 0 || self.gaussian_draws == 0 {
            return Err(input_err!("sample counts must be positive"));
        }
        if !(self.perturbation_scale > 0.0) {
            return Err(input_err!("perturbation scale must be positive"));
        }
        if !(self.lime_ridge >= 0.0) || self.lime_kernel_width.is_some_and(|w| !(w > 0.0)) {
            return Err(input_err!("invalid LIME ridge or kernel width"));
        }
        Ok(())
    }

    pub fn seed_for(&self, stream: u64) -> u64 {
        derive_seed(self.seed, stream)
    }
}

/// Probabilities over actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    pub probs: Vec<f64>,
}

/// Temperature-1 softmax over Q-values.
pub fn softmax_policy(q: &[f64]) -> ActionDistribution {
    ActionDistribution { probs: softmax(q) }
}

/// Everything the explainers may need; each method uses a subset.
#[derive(Clone, Copy)]
pub struct ExplainContext<'a> {
    pub policy: Option<&'a (dyn Differentiable + Sync)>,
    pub student: Option<&'a GbdtModel>,
    pub dataset: Option<&'a Dataset>,
    pub config: &'a ExplainerConfig,
}

impl<'a> ExplainContext<'a> {
    fn policy(&self, method: Method) -> Result<&'a (dyn Differentiable + Sync)> {
        self.policy.ok_or_else(|| Error::Config(alloc::format!("{method} needs a policy")))
    }

    fn dataset(&self, method: Method) -> Result<&'a Dataset> {
        self.dataset.ok_or_else(|| Error::Config(alloc::format!("{method} needs a dataset")))
    }

    fn student(&self, method: Method) -> Result<&'a GbdtModel> {
        self.student.ok_or_else(|| Error::Config(alloc::format!("{method} needs a fitted student model")))
    }

    /// Checks that every collaborator `method` needs is present.
    pub fn check(&self, method: Method) -> Result<()> {
        match method {
            Method::TabularShap => self.student(method).map(|_| ()),
            Method::IntegratedGradients => {
                self.policy(method)?;
                if self.config.ig_baseline == IgBaseline::DatasetMean {
                    self.dataset(method)?;
                }
                Ok(())
            }
            _ => {
                self.policy(method)?;
                self.dataset(method).map(|_| ())
            }
        }
    }
}

/// Explains `state` for `action` with `method`. `stream` selects the
/// per-sample random stream.
pub fn explain(
    method: Method,
    ctx: &ExplainContext<'_>,
    state: &[f64],
    action: usize,
    stream: u64,
) -> Result<Attribution> {
    ctx.check(method)?;
    let config = ctx.config;
    let seed = config.seed_for(stream);
    let values = match method {
        Method::TabularShap => explain_tabular_shap(ctx.student(method)?, state, action)?,
        Method::IntegratedGradients => {
            let policy = ctx.policy(method)?;
            let baseline = match config.ig_baseline {
                IgBaseline::Zero => alloc::vec![0.0; state.len()],
                IgBaseline::DatasetMean => ctx.dataset(method)?.feature_mean().to_vec(),
            };
            explain_ig(policy, state, action, &baseline, config.ig_steps)?
        }
        Method::GradientShap => {
            explain_gradient_shap(ctx.policy(method)?, state, action, ctx.dataset(method)?, config, seed)?
        }
        Method::PerturbationSaliency => {
            explain_perturbation_saliency(ctx.policy(method)?, state, ctx.dataset(method)?, config, seed)?
        }
        Method::Sarfa => explain_sarfa(ctx.policy(method)?, state, action, ctx.dataset(method)?, config, seed)?,
        Method::TabularLime => {
            explain_tabular_lime(ctx.policy(method)?, state, action, ctx.dataset(method)?, config, seed)?
        }
    };
    if !crate::math::all_finite(&values) {
        return Err(Error::Internal(alloc::format!("{method} produced non-finite importances")));
    }
    Ok(Attribution { method, values, explained_action: action })
}

/// TreeSHAP values of the student's margin for `action`.
pub fn explain_tabular_shap(student: &GbdtModel, state: &[f64], action: usize) -> Result<Vec<f64>> {
    check_dim("state", student.n_features(), state.len())?;
    Ok(tree_shap(student, state, action)?.phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax_policy(&[0.0, 0.0]).probs, alloc::vec![0.5, 0.5]);
        for c in [-50.0, 0.0, 3.5, 700.0] {
            let p = softmax_policy(&[c, c, c]).probs;
            assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        }
        // e^1 / (e^1 + e^2) = 1 / (1 + e)
        let e = core::f64::consts::E;
        let p = softmax_policy(&[1.0, 2.0]).probs;
        assert!((p[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert!((p[0] - 0.26894).abs() < 1e-5 && (p[1] - 0.73106).abs() < 1e-5);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("deep_shap".parse::<Method>().is_err());
    }

    #[test]
    fn missing_student_is_config_error() {
        let config = ExplainerConfig::default();
        let ctx = ExplainContext { policy: None, student: None, dataset: None, config: &config };
        assert!(matches!(explain(Method::TabularShap, &ctx, &[0.0; 4], 0, 0), Err(Error::Config(_))));
        assert!(matches!(explain(Method::Sarfa, &ctx, &[0.0; 4], 0, 0), Err(Error::Config(_))));
    }
}
