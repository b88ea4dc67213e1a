//! The `xrl` command line. Exit codes: 0 success, 1 usage error, 2 data or
//! format error, 3 runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand};
use serde::Serialize;
use xrl_core::dataset::{collect, subsample_indices};
use xrl_core::env::PLANTED_WEIGHTS;
use xrl_core::eval::{FidelityConfig, Metric, StabilityConfig};
use xrl_core::explain::{ExplainContext, ExplainerConfig, Method};
use xrl_core::policy::{train_dqn, DqnConfig, MlpPolicy};
use xrl_core::trees::{fit_gbdt, GbdtModel, GbdtParams};
use xrl_core::{Dataset, EnvKind, QFunction};

use crate::bench::{explainer_seed, fidelity_seed, run_benchmark, stability_seed, BenchConfig};
use crate::error::{Error, Result};
use crate::report::{read_report, render, write_all, ReportFormat};
use crate::scoring::{compute_attributions, evaluate_metric, select_samples, MetricInputs, Sample};
use crate::tables::{read_attributions_csv, read_dataset_csv, write_attributions_csv, write_dataset_csv, AttributionRow};
use crate::weights::{load_weights, save_weights};

const ENVS: [&str; 3] = ["cartpole", "flappybird-lite", "synthetic-linear"];
const METHODS: [&str; 6] =
    ["tabular_shap", "tabular_lime", "perturbation_saliency", "sarfa", "integrated_gradients", "gradient_shap"];
const METRICS: [&str; 5] = ["aim", "aum", "pgi", "pgu", "ris"];

fn env_arg() -> PossibleValuesParser {
    PossibleValuesParser::new(ENVS)
}

#[derive(Debug, Parser)]
#[command(name = "xrl", version, about = "Train tabular RL policies, explain them and score the explanations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a DQN policy and write its weight file.
    TrainPolicy {
        #[arg(long, value_parser = env_arg())]
        env: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Environment step budget.
        #[arg(long, default_value_t = DqnConfig::default().max_steps)]
        max_steps: u64,
        #[arg(long, default_value_t = DqnConfig::default().learning_rate)]
        learning_rate: f64,
        /// Write the planted linear scorer instead of training (synthetic-linear only).
        #[arg(long)]
        planted: bool,
    },
    /// Roll out a policy greedily and record (state, action) pairs as CSV.
    GenerateDataset {
        #[arg(long, value_parser = env_arg())]
        env: String,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Per-episode step cap.
        #[arg(long, default_value_t = 500)]
        max_steps: usize,
    },
    /// Explain a sample of dataset rows and write an attribution CSV.
    Explain {
        #[arg(long, value_parser = PossibleValuesParser::new(METHODS))]
        method: String,
        #[arg(long, value_parser = env_arg())]
        env: String,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Score an attribution CSV with one metric and print a JSON summary.
    Evaluate {
        #[arg(long, value_parser = PossibleValuesParser::new(METRICS))]
        metric: String,
        #[arg(long, value_parser = env_arg())]
        env: String,
        #[arg(long)]
        policy: PathBuf,
        /// Dataset the attributions were computed on.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        attributions: PathBuf,
        /// Explainer that produced the attributions; required for ris.
        #[arg(long, value_parser = PossibleValuesParser::new(METHODS))]
        method: Option<String>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Write the JSON here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the explainer × metric grid described by a config file.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        /// Overrides any seed in the config file.
        #[arg(long)]
        seed: u64,
        /// Overrides `workers` in the config file.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides `out_dir` in the config file.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Re-render an existing report.json.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = PossibleValuesParser::new(["json", "csv", "markdown"]))]
        format: String,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn env_kind(name: &str) -> EnvKind {
    name.parse().expect("clap restricts env names")
}

fn method(name: &str) -> Method {
    name.parse().expect("clap restricts method names")
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Runtime(format!("thread pool: {e}")))
}

fn load_policy_for(kind: EnvKind, path: &Path) -> Result<MlpPolicy> {
    let policy = load_weights(path)?;
    let spec = kind.spec();
    if policy.state_dim() != spec.state_dim || policy.action_count() != spec.action_count {
        return Err(Error::format(
            path,
            format!(
                "policy is {}→{} but {} needs {}→{}",
                policy.state_dim(),
                policy.action_count(),
                spec.name,
                spec.state_dim,
                spec.action_count
            ),
        ));
    }
    Ok(policy)
}

fn fit_student_if(method: Method, dataset: &Dataset) -> Result<Option<GbdtModel>> {
    if method != Method::TabularShap {
        return Ok(None);
    }
    let fit = fit_gbdt(dataset, &GbdtParams::default())?;
    for w in &fit.warnings {
        eprintln!("warning: {w:?}");
    }
    Ok(Some(fit.model))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
    }
}

#[derive(Serialize)]
struct EvaluateSummary {
    metric: String,
    mode_chosen: Option<String>,
    per_k: Vec<f64>,
    auc: f64,
    n_samples: usize,
    n_defined: usize,
    seed: u64,
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::TrainPolicy { env, out, seed, max_steps, learning_rate, planted } => {
            let kind = env_kind(&env);
            let policy = if planted {
                if kind != EnvKind::SyntheticLinear {
                    return Err(Error::Usage("--planted is only valid with --env synthetic-linear".into()));
                }
                let rows: Vec<Vec<f64>> = PLANTED_WEIGHTS.iter().map(|r| r.to_vec()).collect();
                MlpPolicy::from_linear(&rows)?
            } else {
                let config = DqnConfig { seed, max_steps, learning_rate, ..DqnConfig::default() };
                let mut environment = kind.build();
                let outcome = train_dqn(environment.as_mut(), &config)?;
                eprintln!(
                    "trained {} steps, {} episodes, trailing-100 mean {:.2}, solved {}",
                    outcome.steps, outcome.episodes, outcome.trailing_mean, outcome.solved
                );
                outcome.policy
            };
            save_weights(&policy, &out)
        }
        Command::GenerateDataset { env, policy, episodes, out, seed, max_steps } => {
            let kind = env_kind(&env);
            let policy = load_policy_for(kind, &policy)?;
            let mut environment = kind.build();
            let dataset = collect(environment.as_mut(), &policy, episodes, max_steps, seed)?;
            eprintln!("collected {} pairs", dataset.len());
            write_dataset_csv(&dataset, &out)
        }
        Command::Explain { method: name, env, policy, dataset, samples, out, seed, workers } => {
            let kind = env_kind(&env);
            let method = method(&name);
            let policy = load_policy_for(kind, &policy)?;
            let dataset = read_dataset_csv(&dataset, &kind.spec())?;
            if samples == 0 || samples > dataset.len() {
                return Err(Error::Usage(format!("--samples must be in 1..={}", dataset.len())));
            }
            let mut indices = subsample_indices(dataset.len(), samples, seed)?;
            indices.sort_unstable();
            let chosen = select_samples(&dataset, &indices, &policy)?;
            let student = fit_student_if(method, &dataset)?;
            let config = ExplainerConfig { seed: explainer_seed(seed), ..ExplainerConfig::default() };
            let ctx = ExplainContext {
                policy: Some(&policy),
                student: student.as_ref(),
                dataset: Some(&dataset),
                config: &config,
            };
            let results = pool(workers)?.install(|| compute_attributions(method, &ctx, &chosen))?;
            let rows: Vec<AttributionRow> = chosen
                .iter()
                .zip(results)
                .map(|(s, (phi, secs))| AttributionRow { sample_idx: s.idx, action: s.action, phi, millis: secs * 1e3 })
                .collect();
            write_attributions_csv(&rows, kind.spec().state_dim, &out)
        }
        Command::Evaluate { metric, env, policy, dataset, attributions, method: method_name, seed, workers, out } => {
            let kind = env_kind(&env);
            let metric: Metric = metric.parse()?;
            let spec = kind.spec();
            let policy = load_policy_for(kind, &policy)?;
            let dataset = read_dataset_csv(&dataset, &spec)?;
            let rows = read_attributions_csv(&attributions, spec.state_dim)?;
            if rows.is_empty() {
                return Err(Error::format(&attributions, "no attribution rows"));
            }
            let mut samples = Vec::with_capacity(rows.len());
            for r in &rows {
                if r.sample_idx >= dataset.len() || r.action >= spec.action_count {
                    return Err(Error::format(
                        &attributions,
                        format!("sample {} (action {}) does not fit the dataset", r.sample_idx, r.action),
                    ));
                }
                samples.push(Sample { idx: r.sample_idx, state: dataset.state(r.sample_idx).to_vec(), action: r.action });
            }
            let values: Vec<Vec<f64>> = rows.into_iter().map(|r| r.phi).collect();
            let method = method_name.as_deref().map(method);
            if metric == Metric::Ris && method.is_none() {
                return Err(Error::Usage("--metric ris needs --method".into()));
            }
            let student = match method {
                Some(m) if metric == Metric::Ris => fit_student_if(m, &dataset)?,
                _ => None,
            };
            let config = ExplainerConfig { seed: explainer_seed(seed), ..ExplainerConfig::default() };
            let ctx = ExplainContext {
                policy: Some(&policy),
                student: student.as_ref(),
                dataset: Some(&dataset),
                config: &config,
            };
            let std = dataset.feature_std().to_vec();
            let fidelity = FidelityConfig { seed: fidelity_seed(seed), ..FidelityConfig::new(spec.reference_state.clone(), std.clone()) };
            let stability = StabilityConfig { seed: stability_seed(seed), ..StabilityConfig::new(std) };
            let inputs = MetricInputs {
                model: &policy,
                fidelity: &fidelity,
                stability: &stability,
                explainer: method.map(|m| (m, &ctx)),
            };
            let outcome = pool(workers)?.install(|| evaluate_metric(metric, &inputs, &samples, &values))?;
            let summary = EvaluateSummary {
                metric: outcome.metric,
                mode_chosen: outcome.mode_chosen,
                per_k: outcome.per_k,
                auc: outcome.auc,
                n_samples: outcome.n_samples,
                n_defined: outcome.n_defined,
                seed,
            };
            let text = serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n";
            write_output(out.as_deref(), &text)
        }
        Command::Benchmark { config, seed, workers, out_dir } => {
            let mut cfg = BenchConfig::load(&config)?;
            cfg.seed = seed;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            let report = run_benchmark(&cfg)?;
            write_all(&report, &cfg.out_dir)?;
            eprintln!("wrote report.json, report.csv and report.md to {}", cfg.out_dir.display());
            Ok(())
        }
        Command::Report { input, format, out } => {
            let format: ReportFormat = format.parse()?;
            let report = read_report(&input)?;
            write_output(out.as_deref(), &render(&report, format))
        }
    }
}
