//! Experiment configuration files.
//!
//! Configs are TOML documents tagged with `schema = "tidbd-experiment/1"`.
//! Omitted keys are filled from per-experiment defaults; unknown keys are
//! rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tidbd::env::NonstatSpec;
use tidbd::eval::{MethodGrid, TrialSettings};
use tidbd::{AdapterKind, TraceMode};

pub const SCHEMA: &str = "tidbd-experiment/1";

/// Environment variable naming the default output root.
pub const OUTPUT_DIR_VAR: &str = "TIDBD_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Gridworld,
    Mountaincar,
    Nonstat,
    Sweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Gridworld => "gridworld",
            ExperimentKind::Mountaincar => "mountaincar",
            ExperimentKind::Nonstat => "nonstat",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A scalar or a list in the file; always a list once parsed.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl From<OneOrMany> for Vec<f64> {
    fn from(v: OneOrMany) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: String,
    experiment: ExperimentKind,
    seed: Option<u64>,
    workers: Option<usize>,
    output_dir: Option<PathBuf>,
    gamma: Option<f64>,
    lambda: Option<OneOrMany>,
    steps: Option<usize>,
    runs: Option<usize>,
    final_window: Option<usize>,
    log_every: Option<usize>,
    epsilon: Option<f64>,
    divergence_bound: Option<f64>,
    nonstat: Option<RawNonstat>,
    mountaincar: Option<MountainCarSection>,
    methods: Option<Vec<RawMethod>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonstat {
    num_features: Option<usize>,
    num_relevant: Option<usize>,
    drift_period: Option<usize>,
    noise_std: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMethod {
    kind: String,
    alpha0: Option<OneOrMany>,
    theta: Option<OneOrMany>,
    rho: Option<OneOrMany>,
    trace: Option<TraceMode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonstatSection {
    pub num_features: usize,
    pub num_relevant: usize,
    /// Steps between sign flips; 0 keeps the target fixed.
    pub drift_period: usize,
    pub noise_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MountainCarSection {
    /// Seed for training the behaviour policy.
    #[serde(default)]
    pub policy_seed: u64,
    /// Policy weights file; loaded when present, written after training otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSection {
    pub kind: AdapterKind,
    pub alpha0: Vec<f64>,
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub trace: TraceMode,
}

impl MethodSection {
    fn new(kind: AdapterKind, alpha0: Vec<f64>) -> Self {
        MethodSection {
            kind,
            alpha0,
            theta: vec![0.0],
            rho: vec![0.0],
            trace: kind.trace_mode(),
        }
    }

    fn theta(mut self, theta: Vec<f64>) -> Self {
        self.theta = theta;
        self
    }

    fn rho(mut self, rho: Vec<f64>) -> Self {
        self.rho = rho;
        self
    }

    pub fn grid(&self) -> MethodGrid {
        MethodGrid {
            kind: self.kind,
            alpha0: self.alpha0.clone(),
            theta: self.theta.clone(),
            rho: self.rho.clone(),
            trace: self.trace,
        }
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: String,
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub gamma: f64,
    pub lambda: Vec<f64>,
    pub steps: usize,
    pub runs: usize,
    pub final_window: usize,
    pub log_every: usize,
    pub epsilon: f64,
    pub divergence_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonstat: Option<NonstatSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mountaincar: Option<MountainCarSection>,
    pub methods: Vec<MethodSection>,
}

/// Initial step-size for the comparison task: 0.5 over its 9 active features.
pub const COMPARISON_ALPHA0: f64 = 0.5 / 9.0;

pub fn gridworld_alphas() -> Vec<f64> {
    vec![0.0005, 0.0025, 0.01, 0.05, 0.5]
}

/// `0` followed by 21 equally spaced values strictly inside (0, 0.2).
pub fn gridworld_thetas() -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend((1..=21).map(|k| 0.2 * k as f64 / 22.0));
    out
}

/// Nine values from 0 to 0.02.
pub fn comparison_thetas() -> Vec<f64> {
    (0..=8).map(|k| 0.0025 * k as f64).collect()
}

pub fn comparison_lambdas() -> Vec<f64> {
    vec![0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0]
}

fn default_methods(kind: ExperimentKind) -> Vec<MethodSection> {
    match kind {
        ExperimentKind::Gridworld => vec![
            MethodSection::new(AdapterKind::TidbdAccumulate, gridworld_alphas()).theta(gridworld_thetas()),
        ],
        ExperimentKind::Mountaincar => {
            vec![MethodSection::new(AdapterKind::TidbdAccumulate, vec![0.001]).theta(vec![0.003])]
        }
        ExperimentKind::Nonstat => vec![
            MethodSection::new(AdapterKind::TidbdAccumulate, vec![COMPARISON_ALPHA0]).theta(comparison_thetas()),
            MethodSection::new(AdapterKind::TidbdReplace, vec![COMPARISON_ALPHA0]).theta(comparison_thetas()),
        ],
        ExperimentKind::Sweep => vec![
            MethodSection::new(
                AdapterKind::Fixed,
                vec![0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 2.0],
            ),
            MethodSection::new(AdapterKind::TidbdAccumulate, vec![COMPARISON_ALPHA0]).theta(comparison_thetas()),
            MethodSection::new(AdapterKind::TidbdReplace, vec![COMPARISON_ALPHA0]).theta(comparison_thetas()),
            MethodSection::new(AdapterKind::Rmsprop, vec![COMPARISON_ALPHA0])
                .rho(vec![0.0, 0.25, 0.5, 0.75, 0.9, 0.99]),
            MethodSection::new(AdapterKind::Alphabound, vec![1.0]),
        ],
    }
}

fn default_alpha0(kind: AdapterKind, experiment: ExperimentKind) -> Vec<f64> {
    match (kind, experiment) {
        (AdapterKind::Alphabound, _) => vec![1.0],
        (_, ExperimentKind::Gridworld) => gridworld_alphas(),
        (_, ExperimentKind::Mountaincar) => vec![0.001],
        _ => vec![COMPARISON_ALPHA0],
    }
}

fn default_theta(experiment: ExperimentKind) -> Vec<f64> {
    match experiment {
        ExperimentKind::Gridworld => gridworld_thetas(),
        ExperimentKind::Mountaincar => vec![0.003],
        _ => comparison_thetas(),
    }
}

impl ExperimentConfig {
    /// Defaults for `experiment` with nothing overridden.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let (gamma, lambda, steps, runs, log_every) = match experiment {
            ExperimentKind::Gridworld => (0.99, vec![0.0], 15_000, 30, 1),
            ExperimentKind::Mountaincar => (0.99, vec![0.0], 100_000, 30, 100),
            ExperimentKind::Nonstat => (0.97, vec![0.9], 15_000, 24, 1),
            ExperimentKind::Sweep => (0.97, comparison_lambdas(), 15_000, 24, 10),
        };
        let nonstat = matches!(experiment, ExperimentKind::Nonstat | ExperimentKind::Sweep).then(|| {
            let spec = NonstatSpec::default();
            NonstatSection {
                num_features: spec.num_features,
                num_relevant: spec.num_relevant,
                drift_period: spec.drift_period.unwrap_or(0),
                noise_std: spec.noise_std,
            }
        });
        let mountaincar = (experiment == ExperimentKind::Mountaincar).then_some(MountainCarSection {
            policy_seed: 0,
            policy_file: None,
        });
        ExperimentConfig {
            schema: SCHEMA.to_string(),
            experiment,
            seed: 0,
            workers: 0,
            output_dir: None,
            gamma,
            lambda,
            steps,
            runs,
            final_window: 1000,
            log_every,
            epsilon: tidbd::state::DEFAULT_EPSILON,
            divergence_bound: tidbd::state::DEFAULT_DIVERGENCE_BOUND,
            nonstat,
            mountaincar,
            methods: default_methods(experiment),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        let cfg = resolve(raw)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn trial_settings(&self) -> TrialSettings {
        TrialSettings {
            steps: self.steps,
            final_window: self.final_window,
            log_every: self.log_every,
        }
    }

    pub fn nonstat_spec(&self) -> Option<NonstatSpec> {
        self.nonstat.as_ref().map(|n| NonstatSpec {
            num_features: n.num_features,
            num_relevant: n.num_relevant,
            drift_period: (n.drift_period > 0).then_some(n.drift_period),
            noise_std: n.noise_std,
            gamma: self.gamma,
        })
    }

    /// Output directory: the config value, else `$TIDBD_OUTPUT_DIR/<experiment>`,
    /// else `results/<experiment>`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        if let Some(dir) = &self.output_dir {
            return dir.clone();
        }
        let root = std::env::var_os(OUTPUT_DIR_VAR)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("results"));
        root.join(self.experiment.name())
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            bail!("schema: expected `{SCHEMA}`, found `{}`", self.schema);
        }
        unit_interval("gamma", self.gamma)?;
        if self.gamma >= 1.0 && self.experiment == ExperimentKind::Gridworld {
            bail!("gamma: must be below 1 for the gridworld value solve");
        }
        non_empty("lambda", &self.lambda)?;
        for (i, &l) in self.lambda.iter().enumerate() {
            unit_interval(&format!("lambda[{i}]"), l)?;
        }
        if self.runs == 0 {
            bail!("runs: must be at least 1");
        }
        if self.log_every == 0 {
            bail!("log_every: must be at least 1");
        }
        if self.final_window == 0 {
            bail!("final_window: must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            bail!("epsilon: {} must be positive and finite", self.epsilon);
        }
        if !(self.divergence_bound > 0.0) {
            bail!("divergence_bound: {} must be positive", self.divergence_bound);
        }
        if let Some(n) = &self.nonstat {
            if n.num_features == 0 {
                bail!("nonstat.num_features: must be positive");
            }
            if n.num_relevant > n.num_features {
                bail!(
                    "nonstat.num_relevant: {} exceeds nonstat.num_features {}",
                    n.num_relevant,
                    n.num_features
                );
            }
            if !(n.noise_std >= 0.0 && n.noise_std.is_finite()) {
                bail!("nonstat.noise_std: {} must be finite and >= 0", n.noise_std);
            }
        }
        if self.methods.is_empty() {
            bail!("methods: at least one method is required");
        }
        for (m, method) in self.methods.iter().enumerate() {
            let key = |field: &str| format!("methods[{m}].{field}");
            non_empty(&key("alpha0"), &method.alpha0)?;
            for (i, &a) in method.alpha0.iter().enumerate() {
                let ok = a.is_finite() && if method.kind == AdapterKind::Fixed { a >= 0.0 } else { a > 0.0 };
                if !ok {
                    bail!("{}[{i}]: {a} is not a valid initial step-size", key("alpha0"));
                }
            }
            if method.kind.uses_theta() {
                non_empty(&key("theta"), &method.theta)?;
                for (i, &t) in method.theta.iter().enumerate() {
                    if !(t >= 0.0 && t.is_finite()) {
                        bail!("{}[{i}]: {t} must be finite and >= 0", key("theta"));
                    }
                }
            }
            if method.kind.uses_rho() {
                non_empty(&key("rho"), &method.rho)?;
                for (i, &r) in method.rho.iter().enumerate() {
                    if !(0.0..1.0).contains(&r) {
                        bail!("{}[{i}]: {r} is outside [0, 1)", key("rho"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn non_empty(key: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        bail!("{key}: list is empty");
    }
    Ok(())
}

fn unit_interval(key: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        bail!("{key}: {x} is outside [0, 1]");
    }
    Ok(())
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig> {
    if raw.schema != SCHEMA {
        bail!("schema: expected `{SCHEMA}`, found `{}`", raw.schema);
    }
    let experiment = raw.experiment;
    let mut cfg = ExperimentConfig::defaults(experiment);
    macro_rules! take {
        ($field:ident) => {
            if let Some(v) = raw.$field {
                cfg.$field = v.into();
            }
        };
    }
    take!(seed);
    take!(workers);
    take!(gamma);
    take!(lambda);
    take!(steps);
    take!(runs);
    take!(final_window);
    take!(log_every);
    take!(epsilon);
    take!(divergence_bound);
    cfg.output_dir = raw.output_dir;

    match (raw.nonstat, cfg.nonstat.as_mut()) {
        (Some(n), Some(section)) => {
            if let Some(v) = n.num_features {
                section.num_features = v;
            }
            if let Some(v) = n.num_relevant {
                section.num_relevant = v;
            }
            if let Some(v) = n.drift_period {
                section.drift_period = v;
            }
            if let Some(v) = n.noise_std {
                section.noise_std = v;
            }
        }
        (Some(_), None) => bail!("nonstat: section does not apply to the {experiment} experiment"),
        _ => {}
    }
    match raw.mountaincar {
        Some(m) if experiment == ExperimentKind::Mountaincar => cfg.mountaincar = Some(m),
        Some(_) => bail!("mountaincar: section does not apply to the {experiment} experiment"),
        None => {}
    }

    if let Some(methods) = raw.methods {
        cfg.methods = methods
            .into_iter()
            .enumerate()
            .map(|(m, raw)| {
                let kind: AdapterKind = raw.kind.parse().map_err(|_| {
                    let known: Vec<&str> = AdapterKind::ALL.iter().map(|k| k.name()).collect();
                    anyhow::anyhow!(
                        "methods[{m}].kind: unknown adapter kind `{}` (expected one of {})",
                        raw.kind,
                        known.join(", ")
                    )
                })?;
                Ok(MethodSection {
                    kind,
                    alpha0: raw.alpha0.map(Into::into).unwrap_or_else(|| default_alpha0(kind, experiment)),
                    theta: match raw.theta {
                        Some(t) => t.into(),
                        None if kind.uses_theta() => default_theta(experiment),
                        None => vec![0.0],
                    },
                    rho: match raw.rho {
                        Some(r) => r.into(),
                        None if kind.uses_rho() => vec![0.9],
                        None => vec![0.0],
                    },
                    trace: raw.trace.unwrap_or(kind.trace_mode()),
                })
            })
            .collect::<Result<_>>()?;
    }
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))
}
