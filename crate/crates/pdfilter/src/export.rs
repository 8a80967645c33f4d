//! CSV and JSON writers. Floats are written in shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pdfilter_core::stopping::{BellmanOperator, ValueFunction};
use pdfilter_core::{FacePoint, FilterTrajectory, Label, Model, PiecewisePath};
use serde::Serialize;

use crate::{Error, LoadedModel, Result};

pub fn num(x: f64) -> String {
    format!("{x}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::Io(path.display().to_string(), e))?;
    w.flush().map_err(|e| Error::Io(path.display().to_string(), e))
}

/// `(time, value)` rows: the initial value, every jump, and the value at
/// the horizon.
pub fn write_path<T: Copy + PartialEq>(path: &Path, p: &PiecewisePath<T>, name: impl Fn(T) -> String) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["time", "value"])?;
    w.write_record([num(0.0), name(p.initial)])?;
    for &(t, v) in &p.jumps {
        w.write_record([num(t), name(v)])?;
    }
    w.write_record([num(p.horizon), name(p.value_at(p.horizon))])?;
    w.flush().map_err(|e| Error::Io(path.display().to_string(), e))
}

/// One row of an exported filter trajectory.
#[derive(Debug, Clone)]
pub struct FilterRow {
    pub time: f64,
    pub point: FacePoint,
}

/// Samples on `{0, step, 2 step, ...} <= horizon`, plus a pre-jump and a
/// post-jump row at every jump time, in time order.
pub fn filter_rows(model: &Model, traj: &FilterTrajectory, step: f64) -> Vec<FilterRow> {
    let mut rows = Vec::new();
    let n_grid = (traj.horizon / step + 1e-9).floor() as usize;
    let mut jumps = traj.jumps.iter().peekable();
    for k in 0..=n_grid {
        let t = k as f64 * step;
        while let Some(j) = jumps.next_if(|j| j.time <= t) {
            rows.push(FilterRow {
                time: j.time,
                point: j.pre.clone(),
            });
            rows.push(FilterRow {
                time: j.time,
                point: j.post.clone(),
            });
        }
        rows.push(FilterRow {
            time: t,
            point: traj.evaluate(model, t),
        });
    }
    for j in jumps {
        rows.push(FilterRow {
            time: j.time,
            point: j.pre.clone(),
        });
        rows.push(FilterRow {
            time: j.time,
            point: j.post.clone(),
        });
    }
    rows
}

/// Columns `time, <state weights>, label`.
pub fn write_filter(path: &Path, lm: &LoadedModel, rows: &[FilterRow]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["time".to_string()];
    header.extend(lm.state_names.iter().cloned());
    header.push("label".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![num(r.time)];
        rec.extend(r.point.weights().iter().map(|&x| num(x)));
        rec.push(lm.label_names[r.point.label().0].clone());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Io(path.display().to_string(), e))
}

/// Columns `t, nonlinear, oracle, abs_diff`.
pub fn write_exit_curve(path: &Path, times: &[f64], nonlinear: &[f64], oracle: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "nonlinear", "oracle", "abs_diff"])?;
    for ((t, a), b) in times.iter().zip(nonlinear).zip(oracle) {
        w.write_record([num(*t), num(*a), num(*b), num((a - b).abs())])?;
    }
    w.flush().map_err(|e| Error::Io(path.display().to_string(), e))
}

/// Columns `label, <state weights>, value, obstacle, in_contact_set`.
pub fn write_value(path: &Path, lm: &LoadedModel, op: &BellmanOperator, v: &ValueFunction, epsilon: f64) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["label".to_string()];
    header.extend(lm.state_names.iter().cloned());
    header.extend(["value", "obstacle", "in_contact_set"].map(String::from));
    w.write_record(&header)?;
    for (i, p) in v.grid().points().enumerate() {
        let value = v.values()[i];
        let obstacle = op.obstacle()[i];
        let mut rec = vec![lm.label_names[p.label().0].clone()];
        rec.extend(p.weights().iter().map(|&x| num(x)));
        rec.push(num(value));
        rec.push(num(obstacle));
        rec.push((obstacle <= value + epsilon).to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Io(path.display().to_string(), e))
}

/// Two-column numeric series.
pub fn write_series(path: &Path, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for (a, b) in rows {
        w.write_record([num(*a), num(*b)])?;
    }
    w.flush().map_err(|e| Error::Io(path.display().to_string(), e))
}

pub fn label_name(lm: &LoadedModel) -> impl Fn(Label) -> String + '_ {
    move |l| lm.label_names[l.0].clone()
}

pub fn state_name(lm: &LoadedModel) -> impl Fn(usize) -> String + '_ {
    move |s| lm.state_names[s].clone()
}
