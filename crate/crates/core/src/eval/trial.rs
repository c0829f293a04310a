//! Single learning trials.

use std::sync::Arc;
use std::time::{Duration, Instant};

use super::metrics::{msve, return_horizon, truncated_returns, RETURN_TRUNCATION};
use super::values::solve_true_values;
use crate::adapters::Learner;
use crate::env::gridworld::{self, GridworldStream};
use crate::env::mountain_car::{self, MountainCarStream};
use crate::env::nonstat::{NonstatSpec, NonstatStream};
use crate::env::policy::Policy;
use crate::error::{Error, Result};
use crate::state::{AdapterConfig, AdapterKind};
use crate::types::{FeatureVector, Transition};

/// What a trial is scored on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    /// Mean squared error against exact state values, after every step.
    Msve,
    /// `|V(s_t) − G_t|` with the prediction made before the step's update.
    AbsReturnError,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Msve => "msve",
            MetricKind::AbsReturnError => "abs_return_error",
        }
    }
}

/// A prediction environment ready to spawn seeded streams.
#[derive(Clone, Debug)]
pub enum Environment {
    Gridworld {
        gamma: f64,
        features: Vec<FeatureVector>,
        v_true: Vec<f64>,
    },
    MountainCar {
        gamma: f64,
        policy: Arc<Policy>,
    },
    Nonstat(NonstatSpec),
}

impl Environment {
    pub fn gridworld(gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::config("gamma", format!("{gamma} is outside [0, 1)")));
        }
        let mrp = gridworld::gridworld_mrp(gamma)?;
        Ok(Environment::Gridworld {
            gamma,
            features: gridworld::tabular_features(),
            v_true: solve_true_values(&mrp)?,
        })
    }

    pub fn mountain_car(gamma: f64, policy: Arc<Policy>) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::config("gamma", format!("{gamma} is outside [0, 1]")));
        }
        Ok(Environment::MountainCar { gamma, policy })
    }

    pub fn nonstat(spec: NonstatSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Environment::Nonstat(spec))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Environment::Gridworld { .. } => "gridworld",
            Environment::MountainCar { .. } => "mountaincar",
            Environment::Nonstat(_) => "nonstat",
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Environment::Gridworld { gamma, .. } | Environment::MountainCar { gamma, .. } => *gamma,
            Environment::Nonstat(spec) => spec.gamma,
        }
    }

    pub fn num_features(&self) -> usize {
        match self {
            Environment::Gridworld { .. } => gridworld::NUM_STATES,
            Environment::MountainCar { .. } => mountain_car::prediction_tile_coder().num_features(),
            Environment::Nonstat(spec) => spec.num_features,
        }
    }

    pub fn metric(&self) -> MetricKind {
        match self {
            Environment::Gridworld { .. } => MetricKind::Msve,
            _ => MetricKind::AbsReturnError,
        }
    }

    /// A seeded stream together with the feature index sets whose
    /// step-sizes are tracked.
    pub fn stream(&self, seed: u64) -> Result<(Box<dyn Iterator<Item = Transition> + Send>, Vec<IndexSet>)> {
        Ok(match self {
            Environment::Gridworld { gamma, .. } => (
                Box::new(GridworldStream::new(*gamma, seed)),
                vec![IndexSet::new("all", (0..gridworld::NUM_STATES).collect())],
            ),
            Environment::MountainCar { gamma, policy } => {
                let stream = MountainCarStream::new(policy.clone(), *gamma, seed);
                let coder = stream.coder();
                // Representatives: the start-state tile of the first
                // position-velocity tiling, and the first random-input tile.
                let start = mountain_car::MountainCarState::START;
                let mut inputs = vec![0.0; coder.num_inputs()];
                inputs[0] = start.position;
                inputs[1] = start.velocity;
                let relevant_one = coder.active_tile(0, &inputs);
                let irrelevant_one = coder.tiling_indices(mountain_car::RELEVANT_TILINGS).start;
                let sets = vec![
                    IndexSet::new("relevant", stream.relevant_indices()),
                    IndexSet::new("irrelevant", stream.irrelevant_indices()),
                    IndexSet::new("relevant_feature", vec![relevant_one]),
                    IndexSet::new("irrelevant_feature", vec![irrelevant_one]),
                ];
                (Box::new(stream), sets)
            }
            Environment::Nonstat(spec) => {
                let stream = NonstatStream::new(*spec, seed)?;
                let sets = vec![
                    IndexSet::new("relevant", stream.relevant_indices().to_vec()),
                    IndexSet::new("irrelevant", stream.irrelevant_indices()),
                ];
                (Box::new(stream), sets)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexSet {
    pub label: String,
    pub indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(label: impl Into<String>, indices: Vec<usize>) -> Self {
        IndexSet {
            label: label.into(),
            indices,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialSettings {
    pub steps: usize,
    /// Number of trailing metric values averaged into the final metric.
    pub final_window: usize,
    /// Keep every k-th step of the metric and step-size series.
    pub log_every: usize,
}

impl Default for TrialSettings {
    fn default() -> Self {
        TrialSettings {
            steps: 15_000,
            final_window: 1000,
            log_every: 1,
        }
    }
}

/// Identifies one configuration cell of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellId {
    pub kind: AdapterKind,
    pub lambda: f64,
    pub alpha0: f64,
    pub theta: f64,
    pub rho: f64,
}

impl CellId {
    pub fn of(cfg: &AdapterConfig) -> Self {
        CellId {
            kind: cfg.kind,
            lambda: cfg.lambda,
            alpha0: cfg.alpha0,
            theta: if cfg.kind.uses_theta() { cfg.theta } else { 0.0 },
            rho: if cfg.kind.uses_rho() { cfg.rho } else { 0.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaTrace {
    pub label: String,
    pub indices: Vec<usize>,
    pub initial: f64,
    /// Mean step-size over `indices` at each logged step.
    pub series: Vec<f64>,
}

impl AlphaTrace {
    pub fn last(&self) -> f64 {
        self.series.last().copied().unwrap_or(self.initial)
    }
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub cell: CellId,
    pub run: usize,
    pub seed: u64,
    pub metric: MetricKind,
    /// Transitions consumed without divergence.
    pub steps_completed: usize,
    /// Step at which divergence was detected (1-based).
    pub halted_at: Option<usize>,
    pub log_every: usize,
    /// Metric at steps `log_every, 2·log_every, …`; entry `j` is step `(j+1)·log_every`.
    pub series: Vec<f64>,
    /// Number of steps with a metric value (return-error tails without a
    /// complete return are excluded).
    pub scored_steps: usize,
    pub final_metric: f64,
    pub cumulative_metric: f64,
    pub alpha_traces: Vec<AlphaTrace>,
    pub final_weights: Vec<f64>,
    pub wall_clock: Duration,
}

impl RunRecord {
    pub fn diverged(&self) -> bool {
        self.halted_at.is_some()
    }

    /// Step number of the `j`-th logged series entry.
    pub fn logged_step(&self, j: usize) -> usize {
        (j + 1) * self.log_every
    }
}

fn summarize(values: &[f64], window: usize) -> (f64, f64) {
    let cumulative = values.iter().sum();
    let tail = &values[values.len().saturating_sub(window.max(1))..];
    let final_metric = if tail.is_empty() {
        f64::NAN
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    };
    (final_metric, cumulative)
}

/// Runs one learner over `settings.steps` transitions of a seeded stream.
///
/// The learner starts at `w = 0`, `β = ln α₀`, `z = H = 0`. A diverged run
/// stops at the step that diverged and scores only the steps before it.
pub fn run_trial(env: &Environment, cfg: AdapterConfig, settings: TrialSettings, seed: u64) -> Result<RunRecord> {
    run_trial_indexed(env, cfg, settings, seed, 0)
}

pub(crate) fn run_trial_indexed(
    env: &Environment,
    mut cfg: AdapterConfig,
    settings: TrialSettings,
    seed: u64,
    run: usize,
) -> Result<RunRecord> {
    if settings.log_every == 0 {
        return Err(Error::config("log_every", "must be positive"));
    }
    let started = Instant::now();
    cfg.gamma = env.gamma();
    let (stream, sets) = env.stream(seed)?;
    let mut learner = Learner::new(env.num_features(), cfg)?;
    let metric = env.metric();
    let k = settings.log_every;

    let mut alpha_traces: Vec<AlphaTrace> = sets
        .into_iter()
        .map(|s| AlphaTrace {
            initial: learner.mean_step_size(&s.indices),
            label: s.label,
            indices: s.indices,
            series: Vec::new(),
        })
        .collect();

    let mut values = Vec::new();
    let mut predictions = Vec::new();
    let mut rewards = Vec::new();
    let mut discounts = Vec::new();
    let mut halted_at = None;
    let mut steps_completed = 0;

    for (step, t) in (1..=settings.steps).zip(stream) {
        if metric == MetricKind::AbsReturnError {
            predictions.push(learner.predict(&t.phi)?);
        }
        let outcome = learner.step(&t)?;
        if outcome.diverged {
            halted_at = Some(step);
            predictions.pop();
            break;
        }
        steps_completed = step;
        match (metric, env) {
            (MetricKind::Msve, Environment::Gridworld { features, v_true, .. }) => {
                values.push(msve(learner.weights(), features, v_true)?);
            }
            _ => {
                rewards.push(t.reward);
                discounts.push(t.gamma_next);
            }
        }
        if step % k == 0 {
            for trace in &mut alpha_traces {
                trace.series.push(learner.mean_step_size(&trace.indices));
            }
        }
    }

    if metric == MetricKind::AbsReturnError {
        let horizon = return_horizon(env.gamma(), RETURN_TRUNCATION);
        let returns = truncated_returns(&rewards, &discounts, horizon)?;
        values = predictions
            .iter()
            .zip(returns)
            .map_while(|(v, g)| g.map(|g| (v - g).abs()))
            .collect();
    }

    let (mut final_metric, mut cumulative_metric) = summarize(&values, settings.final_window);
    if halted_at.is_some() {
        final_metric = f64::INFINITY;
        cumulative_metric = f64::INFINITY;
    }
    let series = values.iter().skip(k - 1).step_by(k).copied().collect();

    Ok(RunRecord {
        cell: CellId::of(&cfg),
        run,
        seed,
        metric,
        steps_completed,
        halted_at,
        log_every: k,
        series,
        scored_steps: values.len(),
        final_metric,
        cumulative_metric,
        alpha_traces,
        final_weights: learner.weights().to_vec(),
        wall_clock: started.elapsed(),
    })
}
