//! CSV files for per-seed metrics, cross-seed aggregates and update logs.
//!
//! Per-seed and aggregate files have one header row. Per-seed columns are
//! `MetricsRow::COLUMNS` in order; the aggregate has `iteration` followed by
//! `<column>_mean` and `<column>_std` for every metric column. Floats are
//! written in shortest round-trip form so parsed values are bit-exact.

use std::path::Path;

use uavbs_core::trpo::{IterationReport, UpdateStatus};
use uavbs_core::MetricsRow;

use crate::HarnessError;

const METRICS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub iteration: usize,
    pub mean: [f64; METRICS],
    /// Population standard deviation across seeds.
    pub std: [f64; METRICS],
}

impl AggregateRow {
    pub fn mean_row(&self) -> MetricsRow {
        MetricsRow::from_values(self.iteration, self.mean)
    }
}

pub fn aggregate_header() -> Vec<String> {
    let mut h = vec!["iteration".to_string()];
    for c in &MetricsRow::COLUMNS[1..] {
        h.push(format!("{c}_mean"));
        h.push(format!("{c}_std"));
    }
    h
}

pub const UPDATE_COLUMNS: [&str; 12] = [
    "iteration",
    "status",
    "kl",
    "improvement",
    "backtracks",
    "step_norm",
    "grad_norm",
    "cg_iterations",
    "cg_residual_rel",
    "value_loss_before",
    "value_loss_after",
    "value_reverted",
];

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MetricsRow::COLUMNS)?;
    for r in rows {
        let mut rec = vec![r.iteration.to_string()];
        rec.extend(r.values().iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != MetricsRow::COLUMNS {
        return Err(HarnessError::Metrics(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let iteration = parse(&rec[0], path)?;
        let mut v = [0.0; METRICS];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = parse(&rec[i + 1], path)?;
        }
        rows.push(MetricsRow::from_values(iteration, v));
    }
    Ok(rows)
}

fn parse<T: std::str::FromStr>(field: &str, path: &Path) -> Result<T, HarnessError> {
    field
        .parse()
        .map_err(|_| HarnessError::Metrics(format!("{}: cannot parse field {field:?}", path.display())))
}

/// Per-iteration mean and population std across seeds. All seeds must
/// cover the same iterations.
pub fn aggregate(per_seed: &[Vec<MetricsRow>]) -> Result<Vec<AggregateRow>, HarnessError> {
    let Some(first) = per_seed.first() else {
        return Ok(Vec::new());
    };
    for rows in per_seed {
        let same = rows.len() == first.len() && rows.iter().zip(first).all(|(a, b)| a.iteration == b.iteration);
        if !same {
            return Err(HarnessError::Metrics("seeds cover different iterations".into()));
        }
    }
    let n = per_seed.len() as f64;
    let out = (0..first.len())
        .map(|t| {
            let mut mean = [0.0; METRICS];
            let mut std = [0.0; METRICS];
            for c in 0..METRICS {
                let m = per_seed.iter().map(|rows| rows[t].values()[c]).sum::<f64>() / n;
                let var = per_seed.iter().map(|rows| (rows[t].values()[c] - m).powi(2)).sum::<f64>() / n;
                mean[c] = m;
                std[c] = var.sqrt();
            }
            AggregateRow { iteration: first[t].iteration, mean, std }
        })
        .collect();
    Ok(out)
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(aggregate_header())?;
    for r in rows {
        let mut rec = vec![r.iteration.to_string()];
        for c in 0..METRICS {
            rec.push(r.mean[c].to_string());
            rec.push(r.std[c].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != aggregate_header() {
        return Err(HarnessError::Metrics(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut row = AggregateRow { iteration: parse(&rec[0], path)?, mean: [0.0; METRICS], std: [0.0; METRICS] };
        for c in 0..METRICS {
            row.mean[c] = parse(&rec[1 + 2 * c], path)?;
            row.std[c] = parse(&rec[2 + 2 * c], path)?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_updates(path: &Path, reports: &[IterationReport]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(UPDATE_COLUMNS)?;
    for r in reports {
        let u = &r.update;
        let status = match u.status {
            UpdateStatus::Accepted => "accepted",
            UpdateStatus::Rejected => "rejected",
            UpdateStatus::Skipped => "skipped",
        };
        w.write_record([
            r.metrics.iteration.to_string(),
            status.to_string(),
            u.kl.to_string(),
            u.improvement.to_string(),
            u.backtracks.to_string(),
            u.step_norm.to_string(),
            u.grad_norm.to_string(),
            u.cg_iterations.to_string(),
            u.cg_residual_rel.to_string(),
            r.value.loss_before.to_string(),
            r.value.loss_after.to_string(),
            u8::from(r.value.reverted).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
