//! End-to-end benchmark: every requested explainer against every requested
//! metric on a sample of a dataset.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use xrl_core::dataset::subsample_indices;
use xrl_core::eval::{FidelityConfig, Metric, StabilityConfig};
use xrl_core::explain::{ExplainContext, ExplainerConfig, IgBaseline, Method, Perturbation};
use xrl_core::rng::derive_seed;
use xrl_core::trees::{fit_gbdt, GbdtParams};
use xrl_core::{EnvKind, QFunction};

use crate::error::{Error, Result};
use crate::scoring::{compute_attributions, evaluate_metric, select_samples, MetricInputs, MetricOutcome};
use crate::tables::read_dataset_csv;
use crate::timing::Latency;
use crate::weights::load_weights;

pub const DEFAULT_BENCH_SAMPLES: usize = 500;

/// Sub-seeds derived from the run seed, shared by the CLI so `explain`,
/// `evaluate` and `benchmark` agree for equal seeds.
pub fn explainer_seed(seed: u64) -> u64 {
    derive_seed(seed, 1)
}

pub fn fidelity_seed(seed: u64) -> u64 {
    derive_seed(seed, 2)
}

pub fn stability_seed(seed: u64) -> u64 {
    derive_seed(seed, 3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub env: EnvKind,
    pub policy: PathBuf,
    pub dataset: PathBuf,
    pub samples: usize,
    pub explainers: Vec<Method>,
    pub metrics: Vec<Metric>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// 0 uses every available core.
    pub workers: usize,
    pub explainer: ExplainerConfig,
    pub gbdt: GbdtParams,
    pub fidelity_noise_scale: f64,
    pub fidelity_n_pert: usize,
    pub stability_n_nbr: usize,
    pub stability_noise_scale: f64,
    pub stability_eps_min: f64,
    pub stability_p: u32,
    pub stability_eps_den: f64,
}

impl BenchConfig {
    pub fn new(env: EnvKind, policy: PathBuf, dataset: PathBuf, out_dir: PathBuf, seed: u64) -> Self {
        let fidelity = FidelityConfig::new(Vec::new(), Vec::new());
        let stability = StabilityConfig::new(Vec::new());
        Self {
            env,
            policy,
            dataset,
            samples: DEFAULT_BENCH_SAMPLES,
            explainers: Method::ALL.to_vec(),
            metrics: Metric::ALL.to_vec(),
            out_dir,
            seed,
            workers: 0,
            explainer: ExplainerConfig::default(),
            gbdt: GbdtParams::default(),
            fidelity_noise_scale: fidelity.noise_scale,
            fidelity_n_pert: fidelity.n_pert,
            stability_n_nbr: stability.n_nbr,
            stability_noise_scale: stability.noise_scale,
            stability_eps_min: stability.eps_min,
            stability_p: stability.p,
            stability_eps_den: stability.eps_den,
        }
    }

    /// Parses the flat `key = value` format. `#` starts a comment; list
    /// values are comma separated; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::at_line(origin, n as u64 + 1, "expected key = value"))?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), (n as u64 + 1, value.trim().to_string())).is_some() {
                return Err(Error::at_line(origin, n as u64 + 1, format!("duplicate key {key}")));
            }
        }
        let mut take = |key: &str| entries.remove(key);
        let required = |v: Option<(u64, String)>, key: &str| {
            v.ok_or_else(|| Error::format(origin, format!("missing required key {key}")))
        };
        let resolve = |p: String| {
            let p = PathBuf::from(p);
            if p.is_relative() { base.join(p) } else { p }
        };
        let (line, env) = required(take("env"), "env")?;
        let env: EnvKind = env.parse().map_err(|e| Error::at_line(origin, line, e))?;
        let policy = resolve(required(take("policy"), "policy")?.1);
        let dataset = resolve(required(take("dataset"), "dataset")?.1);
        let out_dir = resolve(required(take("out_dir"), "out_dir")?.1);
        let seed = match take("seed") {
            Some((line, v)) => parse_num(&v, origin, line)?,
            None => 0,
        };
        let mut cfg = Self::new(env, policy, dataset, out_dir, seed);
        if let Some((line, v)) = take("explainers") {
            cfg.explainers = parse_list(&v, origin, line)?;
        }
        if let Some((line, v)) = take("metrics") {
            cfg.metrics = parse_list(&v, origin, line)?;
        }
        macro_rules! number {
            ($key:literal => $field:expr) => {
                if let Some((line, v)) = take($key) {
                    $field = parse_num(&v, origin, line)?;
                }
            };
        }
        number!("samples" => cfg.samples);
        number!("workers" => cfg.workers);
        number!("explainer.ig_steps" => cfg.explainer.ig_steps);
        number!("explainer.gshap_samples" => cfg.explainer.gshap_samples);
        number!("explainer.lime_samples" => cfg.explainer.lime_samples);
        number!("explainer.lime_ridge" => cfg.explainer.lime_ridge);
        number!("explainer.perturbation_scale" => cfg.explainer.perturbation_scale);
        number!("explainer.gaussian_draws" => cfg.explainer.gaussian_draws);
        number!("gbdt.rounds" => cfg.gbdt.rounds);
        number!("gbdt.max_depth" => cfg.gbdt.max_depth);
        number!("gbdt.learning_rate" => cfg.gbdt.learning_rate);
        number!("gbdt.min_leaf" => cfg.gbdt.min_leaf);
        number!("fidelity.noise_scale" => cfg.fidelity_noise_scale);
        number!("fidelity.n_pert" => cfg.fidelity_n_pert);
        number!("stability.n_nbr" => cfg.stability_n_nbr);
        number!("stability.noise_scale" => cfg.stability_noise_scale);
        number!("stability.eps_min" => cfg.stability_eps_min);
        number!("stability.p" => cfg.stability_p);
        number!("stability.eps_den" => cfg.stability_eps_den);
        if let Some((line, v)) = take("explainer.lime_kernel_width") {
            cfg.explainer.lime_kernel_width = Some(parse_num(&v, origin, line)?);
        }
        if let Some((line, v)) = take("explainer.ig_baseline") {
            cfg.explainer.ig_baseline = match v.as_str() {
                "zero" => IgBaseline::Zero,
                "dataset_mean" => IgBaseline::DatasetMean,
                _ => return Err(Error::at_line(origin, line, "ig_baseline must be zero or dataset_mean")),
            };
        }
        if let Some((line, v)) = take("explainer.perturbation") {
            cfg.explainer.perturbation = match v.as_str() {
                "mean_replace" => Perturbation::MeanReplace,
                "gaussian" => Perturbation::Gaussian,
                _ => return Err(Error::at_line(origin, line, "perturbation must be mean_replace or gaussian")),
            };
        }
        if let Some((key, (line, _))) = entries.into_iter().next() {
            return Err(Error::at_line(origin, line, format!("unknown key {key}")));
        }
        cfg.validate().map_err(|e| Error::format(origin, e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")), path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.explainers.is_empty() || self.metrics.is_empty() {
            return Err(Error::Usage("explainer and metric lists must be non-empty".into()));
        }
        if self.samples == 0 {
            return Err(Error::Usage("samples must be at least 1".into()));
        }
        self.explainer_config().validate()?;
        let d = self.env.spec().state_dim;
        self.fidelity_config(vec![0.0; d]).validate(d)?;
        self.stability_config(vec![0.0; d]).validate(d)?;
        Ok(())
    }

    pub fn explainer_config(&self) -> ExplainerConfig {
        ExplainerConfig { seed: explainer_seed(self.seed), ..self.explainer.clone() }
    }

    pub fn fidelity_config(&self, feature_std: Vec<f64>) -> FidelityConfig {
        FidelityConfig {
            noise_scale: self.fidelity_noise_scale,
            n_pert: self.fidelity_n_pert,
            seed: fidelity_seed(self.seed),
            ..FidelityConfig::new(self.env.spec().reference_state.clone(), feature_std)
        }
    }

    pub fn stability_config(&self, feature_std: Vec<f64>) -> StabilityConfig {
        StabilityConfig {
            n_nbr: self.stability_n_nbr,
            noise_scale: self.stability_noise_scale,
            eps_min: self.stability_eps_min,
            p: self.stability_p,
            eps_den: self.stability_eps_den,
            seed: stability_seed(self.seed),
            ..StabilityConfig::new(feature_std)
        }
    }

    /// Every setting that can change numeric results, one `key = value`
    /// per line. Output location and worker count are left out.
    pub fn canonical_text(&self) -> String {
        let e = &self.explainer;
        let join = |names: Vec<&str>| names.join(",");
        let lines = [
            format!("env = {}", self.env),
            format!("policy = {}", self.policy.display()),
            format!("dataset = {}", self.dataset.display()),
            format!("samples = {}", self.samples),
            format!("explainers = {}", join(self.explainers.iter().map(|m| m.name()).collect())),
            format!("metrics = {}", join(self.metrics.iter().map(|m| m.name()).collect())),
            format!("seed = {}", self.seed),
            format!("explainer.ig_steps = {}", e.ig_steps),
            format!("explainer.ig_baseline = {}", match e.ig_baseline {
                IgBaseline::Zero => "zero",
                IgBaseline::DatasetMean => "dataset_mean",
            }),
            format!("explainer.gshap_samples = {}", e.gshap_samples),
            format!("explainer.lime_samples = {}", e.lime_samples),
            format!("explainer.lime_kernel_width = {:?}", e.lime_kernel_width),
            format!("explainer.lime_ridge = {:?}", e.lime_ridge),
            format!("explainer.perturbation = {}", match e.perturbation {
                Perturbation::MeanReplace => "mean_replace",
                Perturbation::Gaussian => "gaussian",
            }),
            format!("explainer.perturbation_scale = {:?}", e.perturbation_scale),
            format!("explainer.gaussian_draws = {}", e.gaussian_draws),
            format!("gbdt.rounds = {}", self.gbdt.rounds),
            format!("gbdt.max_depth = {}", self.gbdt.max_depth),
            format!("gbdt.learning_rate = {:?}", self.gbdt.learning_rate),
            format!("gbdt.min_leaf = {}", self.gbdt.min_leaf),
            format!("fidelity.noise_scale = {:?}", self.fidelity_noise_scale),
            format!("fidelity.n_pert = {}", self.fidelity_n_pert),
            format!("stability.n_nbr = {}", self.stability_n_nbr),
            format!("stability.noise_scale = {:?}", self.stability_noise_scale),
            format!("stability.eps_min = {:?}", self.stability_eps_min),
            format!("stability.p = {}", self.stability_p),
            format!("stability.eps_den = {:?}", self.stability_eps_den),
        ];
        lines.join("\n") + "\n"
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

fn parse_num<T: std::str::FromStr>(v: &str, origin: &Path, line: u64) -> Result<T> {
    v.parse().map_err(|_| Error::at_line(origin, line, format!("invalid value {v:?}")))
}

fn parse_list<T: std::str::FromStr<Err = xrl_core::Error>>(v: &str, origin: &Path, line: u64) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| Error::at_line(origin, line, e)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub env: String,
    pub seed: u64,
    pub config_hash: String,
    pub dataset_rows: usize,
    pub n_samples: usize,
    pub sample_indices: Vec<usize>,
    pub student_warnings: Vec<String>,
}

/// One (explainer, metric) entry: a result or the reason it was skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub explainer: String,
    pub metric: String,
    pub result: Option<MetricOutcome>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    pub explainer: String,
    pub latency: Option<Latency>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub provenance: Provenance,
    pub explainers: Vec<String>,
    pub metrics: Vec<String>,
    pub cells: Vec<Cell>,
    /// Wall-clock measurements; the only part that varies between reruns.
    pub latency: Vec<LatencyRow>,
}

impl BenchReport {
    pub fn cell(&self, explainer: &str, metric: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.explainer == explainer && c.metric == metric)
    }

    /// The report with timings removed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { latency: Vec::new(), ..self.clone() }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Runtime(format!("thread pool: {e}")))
}

/// Loads inputs, fits the tree student once when requested, explains the
/// sampled states and scores every requested cell. A failing explainer or
/// metric is recorded as skipped and the rest of the grid still runs.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let spec = config.env.spec();
    let policy = load_weights(&config.policy)?;
    if policy.state_dim() != spec.state_dim || policy.action_count() != spec.action_count {
        return Err(Error::format(
            &config.policy,
            format!("policy shape does not match env {} ({}, {})", spec.name, spec.state_dim, spec.action_count),
        ));
    }
    let dataset = read_dataset_csv(&config.dataset, &spec)?;
    if config.samples > dataset.len() {
        return Err(Error::Usage(format!(
            "samples = {} exceeds the {} dataset rows",
            config.samples,
            dataset.len()
        )));
    }
    let mut indices = subsample_indices(dataset.len(), config.samples, config.seed)?;
    indices.sort_unstable();
    let samples = select_samples(&dataset, &indices, &policy)?;

    let mut student_warnings = Vec::new();
    let mut student_error = None;
    let student = if config.explainers.contains(&Method::TabularShap) {
        match fit_gbdt(&dataset, &config.gbdt) {
            Ok(fit) => {
                student_warnings = fit.warnings.iter().map(|w| format!("{w:?}")).collect();
                Some(fit.model)
            }
            Err(e) => {
                student_error = Some(format!("student fit failed: {e}"));
                None
            }
        }
    } else {
        None
    };

    let explainer_config = config.explainer_config();
    let ctx = ExplainContext {
        policy: Some(&policy),
        student: student.as_ref(),
        dataset: Some(&dataset),
        config: &explainer_config,
    };
    let fidelity = config.fidelity_config(dataset.feature_std().to_vec());
    let stability = config.stability_config(dataset.feature_std().to_vec());
    let pool = pool(config.workers)?;

    let mut cells = Vec::new();
    let mut latency = Vec::new();
    for &method in &config.explainers {
        let attributions = match (&student_error, method) {
            (Some(reason), Method::TabularShap) => Err(reason.clone()),
            _ => pool.install(|| compute_attributions(method, &ctx, &samples)).map_err(|e| e.to_string()),
        };
        let (values, seconds): (Vec<Vec<f64>>, Vec<f64>) = match attributions {
            Ok(rows) => rows.into_iter().unzip(),
            Err(reason) => {
                for &metric in &config.metrics {
                    cells.push(Cell {
                        explainer: method.name().into(),
                        metric: metric.name().into(),
                        result: None,
                        skipped: Some(reason.clone()),
                    });
                }
                latency.push(LatencyRow { explainer: method.name().into(), latency: None });
                continue;
            }
        };
        latency.push(LatencyRow { explainer: method.name().into(), latency: Latency::from_seconds(&seconds) });
        let inputs = MetricInputs {
            model: &policy,
            fidelity: &fidelity,
            stability: &stability,
            explainer: Some((method, &ctx)),
        };
        for &metric in &config.metrics {
            let outcome = pool.install(|| evaluate_metric(metric, &inputs, &samples, &values));
            let (result, skipped) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(format!("{method}/{metric}: {e}"))),
            };
            cells.push(Cell { explainer: method.name().into(), metric: metric.name().into(), result, skipped });
        }
    }

    Ok(BenchReport {
        provenance: Provenance {
            env: spec.name.clone(),
            seed: config.seed,
            config_hash: config.hash(),
            dataset_rows: dataset.len(),
            n_samples: samples.len(),
            sample_indices: indices,
            student_warnings,
        },
        explainers: config.explainers.iter().map(|m| m.name().into()).collect(),
        metrics: config.metrics.iter().map(|m| m.name().into()).collect(),
        cells,
        latency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "
        # cartpole run
        env = cartpole
        policy = p.bin
        dataset = /abs/d.csv
        out_dir = out
        seed = 7
        samples = 10
        explainers = integrated_gradients, sarfa
        metrics = aim
        stability.p = 1
    ";

    #[test]
    fn parses_flat_config() {
        let cfg = BenchConfig::parse(TEXT, Path::new("/base"), Path::new("c.txt")).unwrap();
        assert_eq!(cfg.env, EnvKind::CartPole);
        assert_eq!(cfg.policy, PathBuf::from("/base/p.bin"));
        assert_eq!(cfg.dataset, PathBuf::from("/abs/d.csv"));
        assert_eq!(cfg.explainers, vec![Method::IntegratedGradients, Method::Sarfa]);
        assert_eq!(cfg.metrics, vec![Metric::Aim]);
        assert_eq!((cfg.seed, cfg.samples, cfg.stability_p), (7, 10, 1));
        assert_eq!(cfg.fidelity_n_pert, 32);
    }

    #[test]
    fn rejects_unknown_and_bad_keys() {
        let origin = Path::new("c.txt");
        let err = BenchConfig::parse(&format!("{TEXT}\nbogus = 1"), Path::new("."), origin).unwrap_err();
        assert!(err.to_string().contains("unknown key bogus"), "{err}");
        let err = BenchConfig::parse(&format!("{TEXT}\nworkers = many"), Path::new("."), origin).unwrap_err();
        assert!(err.to_string().contains("line 13"), "{err}");
        let err = BenchConfig::parse(&TEXT.replace("aim", "nope"), Path::new("."), origin).unwrap_err();
        assert!(err.to_string().contains("unknown metric"), "{err}");
        let err = BenchConfig::parse(&TEXT.replace("metrics = aim", "metrics ="), Path::new("."), origin).unwrap_err();
        assert!(err.to_string().contains("non-empty"), "{err}");
        assert!(BenchConfig::parse("env = cartpole", Path::new("."), origin).is_err());
    }

    #[test]
    fn hash_ignores_output_location_and_workers() {
        let a = BenchConfig::parse(TEXT, Path::new("/base"), Path::new("c.txt")).unwrap();
        let mut b = a.clone();
        b.out_dir = PathBuf::from("/elsewhere");
        b.workers = 8;
        assert_eq!(a.hash(), b.hash());
        b.seed = 8;
        assert_ne!(a.hash(), b.hash());
    }
}
