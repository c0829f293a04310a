//! CSV files and text summaries.
//!
//! Three CSV files are written per run, all UTF-8 with LF line endings and a
//! header row:
//!
//! - `steps.csv`: experiment, adapter, lambda, alpha0, theta, rho, run, step, metric, diverged
//! - `aggregate.csv`: experiment, adapter, lambda, alpha0, theta, rho, runs, mean_final,
//!   stderr_final, mean_cumulative, stderr_cumulative, n_diverged
//! - `step_sizes.csv`: experiment, adapter, lambda, alpha0, theta, rho, run, index_set, step,
//!   mean_alpha

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use tidbd::eval::{AlphaSummary, BestCell, CellAggregate, CellId, RunRecord};
use tidbd::AdapterKind;

pub const STEPS_FILE: &str = "steps.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const STEP_SIZES_FILE: &str = "step_sizes.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

pub const STEPS_HEADER: [&str; 10] = [
    "experiment", "adapter", "lambda", "alpha0", "theta", "rho", "run", "step", "metric", "diverged",
];
pub const AGGREGATE_HEADER: [&str; 12] = [
    "experiment",
    "adapter",
    "lambda",
    "alpha0",
    "theta",
    "rho",
    "runs",
    "mean_final",
    "stderr_final",
    "mean_cumulative",
    "stderr_cumulative",
    "n_diverged",
];
pub const STEP_SIZES_HEADER: [&str; 10] = [
    "experiment", "adapter", "lambda", "alpha0", "theta", "rho", "run", "index_set", "step", "mean_alpha",
];

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

fn cell_fields(experiment: &str, cell: &CellId) -> [String; 6] {
    [
        experiment.to_string(),
        cell.kind.name().to_string(),
        cell.lambda.to_string(),
        cell.alpha0.to_string(),
        cell.theta.to_string(),
        cell.rho.to_string(),
    ]
}

pub fn write_steps(path: &Path, experiment: &str, records: &[RunRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(STEPS_HEADER)?;
    for r in records {
        let cell = cell_fields(experiment, &r.cell);
        let run = r.run.to_string();
        let diverged = r.diverged().to_string();
        for (j, m) in r.series.iter().enumerate() {
            let step = r.logged_step(j).to_string();
            let metric = m.to_string();
            w.write_record(cell.iter().map(String::as_str).chain([
                run.as_str(),
                step.as_str(),
                metric.as_str(),
                diverged.as_str(),
            ]))?;
        }
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_aggregates(path: &Path, aggregates: &[CellAggregate]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for a in aggregates {
        let cell = cell_fields(&a.experiment, &a.cell);
        let rest = [
            a.runs.to_string(),
            a.mean_final.to_string(),
            a.stderr_final.to_string(),
            a.mean_cumulative.to_string(),
            a.stderr_cumulative.to_string(),
            a.n_diverged.to_string(),
        ];
        w.write_record(cell.iter().chain(rest.iter()))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_step_sizes(path: &Path, experiment: &str, records: &[RunRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(STEP_SIZES_HEADER)?;
    for r in records {
        let cell = cell_fields(experiment, &r.cell);
        let run = r.run.to_string();
        for trace in &r.alpha_traces {
            let initial = trace.initial.to_string();
            w.write_record(cell.iter().map(String::as_str).chain([
                run.as_str(),
                trace.label.as_str(),
                "0",
                initial.as_str(),
            ]))?;
            for (j, a) in trace.series.iter().enumerate() {
                let step = r.logged_step(j).to_string();
                let alpha = a.to_string();
                w.write_record(cell.iter().map(String::as_str).chain([
                    run.as_str(),
                    trace.label.as_str(),
                    step.as_str(),
                    alpha.as_str(),
                ]))?;
            }
        }
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Reads an aggregate CSV, rejecting any file whose header differs from
/// [`AGGREGATE_HEADER`].
pub fn read_aggregates(path: &Path) -> Result<Vec<CellAggregate>> {
    let context = || format!("reading {}", path.display());
    let mut reader = csv::Reader::from_path(path).with_context(context)?;
    let header = reader.headers().with_context(context)?.clone();
    if header.iter().ne(AGGREGATE_HEADER) {
        bail!("{}: header does not match the aggregate schema", path.display());
    }
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.with_context(context)?;
        let at = |i: usize| row.get(i).unwrap_or("");
        let float = |i: usize| -> Result<f64> {
            at(i).parse()
                .with_context(|| format!("{} row {}: bad `{}` value `{}`", path.display(), line + 2, AGGREGATE_HEADER[i], at(i)))
        };
        let count = |i: usize| -> Result<usize> {
            at(i).parse()
                .with_context(|| format!("{} row {}: bad `{}` value `{}`", path.display(), line + 2, AGGREGATE_HEADER[i], at(i)))
        };
        let kind: AdapterKind = at(1)
            .parse()
            .with_context(|| format!("{} row {}: unknown adapter `{}`", path.display(), line + 2, at(1)))?;
        out.push(CellAggregate {
            experiment: at(0).to_string(),
            cell: CellId {
                kind,
                lambda: float(2)?,
                alpha0: float(3)?,
                theta: float(4)?,
                rho: float(5)?,
            },
            runs: count(6)?,
            mean_final: float(7)?,
            stderr_final: float(8)?,
            mean_cumulative: float(9)?,
            stderr_cumulative: float(10)?,
            n_diverged: count(11)?,
        });
    }
    Ok(out)
}

fn pm(mean: f64, stderr: f64) -> String {
    format!("{mean:.6} ± {stderr:.6}")
}

/// Best cell per adapter and λ, with cells holding diverged runs flagged.
pub fn render_best_table(best: &[BestCell]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<17} {:>6} {:>10} {:>8} {:>6} {:>28} {:>28} {:>9}",
        "experiment", "adapter", "lambda", "alpha0", "theta", "rho", "cumulative", "final", "diverged"
    );
    for b in best {
        let flagged = format!("{}/{}", b.diverged_cells, b.candidates);
        match &b.best {
            Some(a) => {
                let _ = writeln!(
                    out,
                    "{:<12} {:<17} {:>6} {:>10} {:>8} {:>6} {:>28} {:>28} {:>9}",
                    b.experiment,
                    b.kind.name(),
                    b.lambda,
                    format!("{:.6}", a.cell.alpha0),
                    a.cell.theta,
                    a.cell.rho,
                    pm(a.mean_cumulative, a.stderr_cumulative),
                    pm(a.mean_final, a.stderr_final),
                    flagged
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "{:<12} {:<17} {:>6} {:>10} {:>8} {:>6} {:>28} {:>28} {:>9}",
                    b.experiment,
                    b.kind.name(),
                    b.lambda,
                    "-",
                    "-",
                    "-",
                    "DIVERGED",
                    "DIVERGED",
                    flagged
                );
            }
        }
    }
    out
}

/// Cells whose runs diverged, one line each.
pub fn render_diverged(aggregates: &[CellAggregate]) -> String {
    let mut out = String::new();
    for a in aggregates.iter().filter(|a| a.n_diverged > 0) {
        let _ = writeln!(
            out,
            "DIVERGED {} lambda={} alpha0={} theta={} rho={}: {}/{} runs",
            a.cell.kind.name(),
            a.cell.lambda,
            a.cell.alpha0,
            a.cell.theta,
            a.cell.rho,
            a.n_diverged,
            a.runs
        );
    }
    out
}

/// Mean initial and final step-size per cell and tracked index set.
pub fn render_alpha_table(rows: &[AlphaSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<17} {:>6} {:>10} {:>8} {:>6} {:<20} {:>14} {:>14} {:>10}",
        "adapter", "lambda", "alpha0", "theta", "rho", "index_set", "initial", "final", "ratio"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<17} {:>6} {:>10} {:>8} {:>6} {:<20} {:>14.6e} {:>14.6e} {:>10.4}",
            r.cell.kind.name(),
            r.cell.lambda,
            format!("{:.6}", r.cell.alpha0),
            r.cell.theta,
            r.cell.rho,
            r.label,
            r.mean_initial,
            r.mean_final,
            r.mean_final / r.mean_initial
        );
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(text.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
