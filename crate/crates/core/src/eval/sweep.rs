//! Parameter sweeps over adapter grids, and their aggregation.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::trial::{run_trial_indexed, CellId, Environment, RunRecord, TrialSettings};
use crate::error::{Error, Result};
use crate::state::{AdapterConfig, AdapterKind, TraceMode, DEFAULT_DIVERGENCE_BOUND, DEFAULT_EPSILON};

/// Grids swept for one adapter kind. `theta` is ignored unless the kind is a
/// TIDBD variant and `rho` unless it is RMSprop.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodGrid {
    pub kind: AdapterKind,
    pub alpha0: Vec<f64>,
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    /// Trace mode for the non-TIDBD kinds.
    pub trace: TraceMode,
}

impl MethodGrid {
    pub fn new(kind: AdapterKind, alpha0: Vec<f64>) -> Self {
        MethodGrid {
            kind,
            alpha0,
            theta: vec![0.0],
            rho: vec![0.0],
            trace: kind.trace_mode(),
        }
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_rho(mut self, rho: Vec<f64>) -> Self {
        self.rho = rho;
        self
    }

    fn thetas(&self) -> &[f64] {
        if self.kind.uses_theta() {
            &self.theta
        } else {
            &[0.0]
        }
    }

    fn rhos(&self) -> &[f64] {
        if self.kind.uses_rho() {
            &self.rho
        } else {
            &[0.0]
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub env: Environment,
    pub methods: Vec<MethodGrid>,
    pub lambdas: Vec<f64>,
    pub trial: TrialSettings,
    pub runs: usize,
    pub base_seed: u64,
    pub epsilon: f64,
    pub divergence_bound: f64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl SweepSpec {
    pub fn new(env: Environment, methods: Vec<MethodGrid>, lambdas: Vec<f64>, trial: TrialSettings, runs: usize) -> Self {
        SweepSpec {
            env,
            methods,
            lambdas,
            trial,
            runs,
            base_seed: 0,
            epsilon: DEFAULT_EPSILON,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        if self.lambdas.is_empty() {
            return Err(Error::config("lambdas", "grid is empty"));
        }
        if self.runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        for (m, grid) in self.methods.iter().enumerate() {
            let check = |name: &str, values: &[f64]| {
                if values.is_empty() {
                    Err(Error::config(format!("methods[{m}].{name}"), "grid is empty"))
                } else {
                    Ok(())
                }
            };
            check("alpha0", &grid.alpha0)?;
            check("theta", grid.thetas())?;
            check("rho", grid.rhos())?;
        }
        for cfg in self.cells() {
            cfg.validate()?;
        }
        Ok(())
    }

    /// Every configuration cell, in method, λ, α₀, θ, ρ order.
    pub fn cells(&self) -> Vec<AdapterConfig> {
        let mut out = Vec::new();
        for grid in &self.methods {
            for &lambda in &self.lambdas {
                for &alpha0 in &grid.alpha0 {
                    for &theta in grid.thetas() {
                        for &rho in grid.rhos() {
                            out.push(AdapterConfig {
                                theta,
                                rho,
                                epsilon: self.epsilon,
                                divergence_bound: self.divergence_bound,
                                trace: grid.trace,
                                ..AdapterConfig::new(grid.kind, alpha0, lambda, self.env.gamma())
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn seed_for(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

/// Mean and standard error of one cell's runs.
#[derive(Clone, Debug, PartialEq)]
pub struct CellAggregate {
    pub experiment: String,
    pub cell: CellId,
    pub runs: usize,
    pub mean_final: f64,
    pub stderr_final: f64,
    pub mean_cumulative: f64,
    pub stderr_cumulative: f64,
    pub n_diverged: usize,
}

impl CellAggregate {
    pub fn all_diverged(&self) -> bool {
        self.n_diverged == self.runs
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub experiment: String,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<CellAggregate>,
}

/// Mean and standard error (sample deviation over √n) by Welford's recurrence.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    if values.iter().any(|v| !v.is_finite()) {
        return (f64::INFINITY, f64::INFINITY);
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let stderr = if n > 1 {
        (m2 / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    (mean, stderr)
}

pub fn aggregate(experiment: &str, cell: CellId, records: &[&RunRecord]) -> CellAggregate {
    let finals: Vec<f64> = records.iter().map(|r| r.final_metric).collect();
    let cumulative: Vec<f64> = records.iter().map(|r| r.cumulative_metric).collect();
    let (mean_final, stderr_final) = mean_stderr(&finals);
    let (mean_cumulative, stderr_cumulative) = mean_stderr(&cumulative);
    CellAggregate {
        experiment: experiment.to_string(),
        cell,
        runs: records.len(),
        mean_final,
        stderr_final,
        mean_cumulative,
        stderr_cumulative,
        n_diverged: records.iter().filter(|r| r.diverged()).count(),
    }
}

/// Runs every `(cell, run)` pair, fanning out over a worker pool, and
/// aggregates per cell. Records are ordered by cell, then run index.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.runs).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| run_trial_indexed(&spec.env, cells[c], spec.trial, spec.seed_for(r), r))
            .collect::<Result<Vec<_>>>()
    })?;

    let experiment = spec.env.name();
    let aggregates = records
        .chunks(spec.runs)
        .map(|chunk| {
            let refs: Vec<&RunRecord> = chunk.iter().collect();
            aggregate(experiment, chunk[0].cell, &refs)
        })
        .collect();
    Ok(SweepResult {
        experiment: experiment.to_string(),
        records,
        aggregates,
    })
}

/// The best cell for one adapter kind and λ.
#[derive(Clone, Debug, PartialEq)]
pub struct BestCell {
    pub experiment: String,
    pub kind: AdapterKind,
    pub lambda: f64,
    /// `None` when every candidate cell had diverged runs.
    pub best: Option<CellAggregate>,
    pub candidates: usize,
    pub diverged_cells: usize,
}

fn tie_break(a: &CellAggregate, b: &CellAggregate) -> Ordering {
    a.mean_cumulative
        .total_cmp(&b.mean_cumulative)
        .then(a.cell.alpha0.total_cmp(&b.cell.alpha0))
        .then(a.cell.theta.total_cmp(&b.cell.theta))
        .then(a.cell.rho.total_cmp(&b.cell.rho))
}

/// Lowest mean cumulative metric per (experiment, kind, λ), sorted by that key.
///
/// Cells holding any diverged run are excluded; ties go to the smaller α₀,
/// then θ, then ρ.
pub fn best_per_lambda(aggregates: &[CellAggregate]) -> Vec<BestCell> {
    let mut keys: Vec<(String, AdapterKind, f64)> = aggregates
        .iter()
        .map(|a| (a.experiment.clone(), a.cell.kind, a.cell.lambda))
        .collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    keys.dedup();
    keys.into_iter()
        .map(|(experiment, kind, lambda)| {
            let group: Vec<&CellAggregate> = aggregates
                .iter()
                .filter(|a| a.experiment == experiment && a.cell.kind == kind && a.cell.lambda == lambda)
                .collect();
            let diverged_cells = group.iter().filter(|a| a.n_diverged > 0).count();
            let best = group
                .iter()
                .filter(|a| a.n_diverged == 0)
                .min_by(|a, b| tie_break(a, b))
                .map(|a| (*a).clone());
            BestCell {
                experiment,
                kind,
                lambda,
                best,
                candidates: group.len(),
                diverged_cells,
            }
        })
        .collect()
}

/// Mean over runs of the initial and final step-size of each tracked index set.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSummary {
    pub cell: CellId,
    pub label: String,
    pub mean_initial: f64,
    pub mean_final: f64,
}

pub fn alpha_summary(records: &[RunRecord], runs: usize) -> Vec<AlphaSummary> {
    let mut out = Vec::new();
    for chunk in records.chunks(runs.max(1)) {
        let Some(first) = chunk.first() else { continue };
        for (k, trace) in first.alpha_traces.iter().enumerate() {
            let n = chunk.len() as f64;
            let initial = chunk.iter().map(|r| r.alpha_traces[k].initial).sum::<f64>() / n;
            let last = chunk.iter().map(|r| r.alpha_traces[k].last()).sum::<f64>() / n;
            out.push(AlphaSummary {
                cell: first.cell,
                label: trace.label.clone(),
                mean_initial: initial,
                mean_final: last,
            });
        }
    }
    out
}
