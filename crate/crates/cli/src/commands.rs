use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use log::info;
use tidbd::env::{gridworld, gridworld_mrp, train_sarsa_policy, Policy};
use tidbd::eval::{
    alpha_summary, best_per_lambda, run_sweep, run_trial, solve_true_values, Environment, SweepSpec,
};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output;

/// Flags that override config values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = Some(dir.clone());
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub cells: usize,
    /// Cells in which every run diverged.
    pub failed_cells: usize,
}

fn load_policy(cfg: &ExperimentConfig) -> Result<Policy> {
    let section = cfg.mountaincar.clone().unwrap_or(crate::config::MountainCarSection {
        policy_seed: 0,
        policy_file: None,
    });
    if let Some(path) = &section.policy_file {
        if path.exists() {
            info!("loading policy from {}", path.display());
            return Policy::load(path).with_context(|| format!("loading policy {}", path.display()));
        }
    }
    info!("training behaviour policy (seed {})", section.policy_seed);
    let policy = train_sarsa_policy(section.policy_seed, 0.99);
    if let Some(path) = &section.policy_file {
        policy
            .save(path)
            .with_context(|| format!("saving policy {}", path.display()))?;
    }
    Ok(policy)
}

pub fn environment(cfg: &ExperimentConfig) -> Result<Environment> {
    let env = match cfg.experiment {
        ExperimentKind::Gridworld => Environment::gridworld(cfg.gamma)?,
        ExperimentKind::Mountaincar => Environment::mountain_car(cfg.gamma, Arc::new(load_policy(cfg)?))?,
        ExperimentKind::Nonstat | ExperimentKind::Sweep => {
            let Some(spec) = cfg.nonstat_spec() else {
                bail!("nonstat: section missing");
            };
            Environment::nonstat(spec)?
        }
    };
    Ok(env)
}

pub fn sweep_spec(cfg: &ExperimentConfig, env: Environment) -> SweepSpec {
    SweepSpec {
        base_seed: cfg.seed,
        epsilon: cfg.epsilon,
        divergence_bound: cfg.divergence_bound,
        workers: cfg.workers,
        ..SweepSpec::new(
            env,
            cfg.methods.iter().map(|m| m.grid()).collect(),
            cfg.lambda.clone(),
            cfg.trial_settings(),
            cfg.runs,
        )
    }
}

/// Runs an experiment and writes its CSV files and summary.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let env = environment(cfg)?;
    let spec = sweep_spec(cfg, env);
    let mut result = run_sweep(&spec)?;
    let experiment = cfg.experiment.name();
    for a in &mut result.aggregates {
        a.experiment = experiment.to_string();
    }

    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    output::write_steps(&dir.join(output::STEPS_FILE), experiment, &result.records)?;
    output::write_aggregates(&dir.join(output::AGGREGATE_FILE), &result.aggregates)?;
    output::write_step_sizes(&dir.join(output::STEP_SIZES_FILE), experiment, &result.records)?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "experiment {experiment}: {} cells x {} runs, {} steps, seed {}\n",
        result.aggregates.len(),
        cfg.runs,
        cfg.steps,
        cfg.seed
    );
    let _ = writeln!(summary, "Best setting per adapter and lambda (by mean cumulative error)");
    summary += &output::render_best_table(&best_per_lambda(&result.aggregates));
    let diverged = output::render_diverged(&result.aggregates);
    if !diverged.is_empty() {
        summary.push('\n');
        summary += &diverged;
    }
    let _ = writeln!(summary, "\nMean step-size per tracked index set (initial and at the last logged step)");
    summary += &output::render_alpha_table(&alpha_summary(&result.records, cfg.runs));
    output::write_text(&dir.join(output::SUMMARY_FILE), &summary)?;

    Ok(RunOutcome {
        output_dir: dir,
        cells: result.aggregates.len(),
        failed_cells: result.aggregates.iter().filter(|a| a.all_diverged()).count(),
    })
}

/// Best-per-λ table for the aggregate CSV in `dir`.
pub fn summarize(dir: &Path) -> Result<String> {
    let path = dir.join(output::AGGREGATE_FILE);
    if !path.is_file() {
        bail!("{}: no aggregate file", path.display());
    }
    let aggregates = output::read_aggregates(&path)?;
    let mut text = output::render_best_table(&best_per_lambda(&aggregates));
    let diverged = output::render_diverged(&aggregates);
    if !diverged.is_empty() {
        text.push('\n');
        text += &diverged;
    }
    Ok(text)
}

/// Exact gridworld state values, laid out as the grid.
pub fn solve(gamma: f64) -> Result<String> {
    let mrp = gridworld_mrp(gamma)?;
    let v = solve_true_values(&mrp)?;
    let mut out = String::new();
    for row in 0..gridworld::HEIGHT {
        let cells: Vec<String> = (0..gridworld::WIDTH)
            .map(|col| format!("{:>10.4}", v[gridworld::state_index((row, col))]))
            .collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    let _ = writeln!(out, "bellman residual {:.3e}", mrp.bellman_residual(&v));
    Ok(out)
}

/// Step-size trajectories of run 0 of the first configured cell, as CSV.
pub fn trace(cfg: &ExperimentConfig) -> Result<String> {
    let env = environment(cfg)?;
    let spec = sweep_spec(cfg, env);
    spec.validate()?;
    let cell = spec.cells()[0];
    let record = run_trial(&spec.env, cell, spec.trial, spec.seed_for(0))?;
    let mut out = String::from("step");
    for t in &record.alpha_traces {
        out.push(',');
        out += &t.label;
    }
    out.push('\n');
    let row = |out: &mut String, step: usize, values: Vec<f64>| {
        let _ = write!(out, "{step}");
        for v in values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    };
    row(&mut out, 0, record.alpha_traces.iter().map(|t| t.initial).collect());
    let logged = record.alpha_traces.first().map_or(0, |t| t.series.len());
    for j in 0..logged {
        row(
            &mut out,
            record.logged_step(j),
            record.alpha_traces.iter().map(|t| t.series[j]).collect(),
        );
    }
    Ok(out)
}
