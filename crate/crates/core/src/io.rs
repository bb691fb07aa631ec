//! CSV files: headerless matrices, the events manifest and experiment reports.

use crate::error::{Error, Result};
use crate::evaluation::{AccuracyReport, Summary};
use crate::simulator::AnomalyEvent;
use crate::TrafficMatrix;
use std::fs;
use std::path::Path;

/// Written in place of a score a method does not produce.
pub const NOT_APPLICABLE: &str = "NA";

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Io {
            path: path.into(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    }
}

/// Renders a matrix as headerless CSV, one row per period.
///
/// Values use the shortest decimal form that parses back to the same `f64`.
pub fn matrix_to_csv(m: &TrafficMatrix) -> String {
    let mut out = String::new();
    for row in 0..m.nrows() {
        for col in 0..m.ncols() {
            if col > 0 {
                out.push(',');
            }
            out.push_str(&format_value(m[(row, col)]));
        }
        out.push('\n');
    }
    out
}

fn format_value(v: f64) -> String {
    // normalise -0 so that equal matrices always serialize identically
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

pub fn write_matrix(path: &Path, m: &TrafficMatrix) -> Result<()> {
    fs::write(path, matrix_to_csv(m)).map_err(|e| Error::io(path, e))
}

/// Parses headerless numeric CSV. Rows and columns in errors count from 1.
pub fn parse_matrix(text: &str, path: &Path) -> Result<TrafficMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.into(),
            row: r + 1,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let width = *cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Parse {
                path: path.into(),
                row: r + 1,
                col: record.len().min(width) + 1,
                msg: format!("expected {width} columns, found {}", record.len()),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.into(),
                row: r + 1,
                col: c + 1,
                msg: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.into(),
                    row: r + 1,
                    col: c + 1,
                    msg: format!("non-finite value {field:?}"),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            path: path.into(),
            row: 0,
            col: 0,
            msg: "empty matrix".into(),
        });
    }
    Ok(TrafficMatrix::from_row_slice(rows, cols, &values))
}

pub fn read_matrix(path: &Path) -> Result<TrafficMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn write_events(path: &Path, events: &[AnomalyEvent]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let rows = std::iter::once(vec![
        "event_id".to_string(),
        "type".into(),
        "flow_indices".into(),
        "start".into(),
        "duration".into(),
        "shape".into(),
        "delta".into(),
    ])
    .chain(events.iter().enumerate().map(|(i, e)| {
        let flows: Vec<String> = e.flows.iter().map(|f| f.to_string()).collect();
        vec![
            i.to_string(),
            e.kind.to_string(),
            flows.join(";"),
            e.start.to_string(),
            e.duration.to_string(),
            e.shape.to_string(),
            format!("{}", e.delta),
        ]
    }));
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn mean_cell(s: Option<Summary>) -> (String, String) {
    match s {
        Some(s) => (
            format!("{}", s.mean),
            s.std.map(|v| format!("{v}")).unwrap_or_default(),
        ),
        None => (String::new(), String::new()),
    }
}

/// One row per scenario and method, with mean and standard deviation of each score.
pub fn write_report(path: &Path, report: &AccuracyReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record([
        "scenario",
        "anomaly",
        "alpha",
        "method",
        "n_samples",
        "n_failed",
        "accuracy_A",
        "std_A",
        "accuracy_E",
        "std_E",
        "accuracy_N",
        "std_N",
    ])
    .map_err(|e| csv_error(path, e))?;
    for r in &report.rows {
        let (a, sa) = mean_cell(r.deterministic);
        let (e, se) = mean_cell(r.anomaly_error);
        let (n, sn) = if r.noise_not_applicable() {
            (NOT_APPLICABLE.to_string(), String::new())
        } else {
            mean_cell(r.noise)
        };
        w.write_record([
            r.scenario.clone(),
            r.anomaly.clone(),
            format!("{}", r.alpha),
            r.method.to_string(),
            r.n_samples.to_string(),
            r.n_failed.to_string(),
            a,
            sa,
            e,
            se,
            n,
            sn,
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Long format: one row per sample, method and component.
pub fn write_samples(path: &Path, report: &AccuracyReport, scenario_names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["scenario", "sample", "seed", "method", "component", "value", "iterations", "error"])
        .map_err(|e| csv_error(path, e))?;
    for s in &report.samples {
        let name = scenario_names.get(s.scenario).cloned().unwrap_or_default();
        let iterations = s.iterations.map(|i| i.to_string()).unwrap_or_default();
        let mut row = |component: &str, value: String, error: &str| {
            w.write_record([
                name.as_str(),
                &s.sample.to_string(),
                &s.seed.to_string(),
                &s.method.to_string(),
                component,
                &value,
                &iterations,
                error,
            ])
        };
        match &s.outcome {
            Ok(acc) => {
                row("A", format!("{}", acc.deterministic), "").map_err(|e| csv_error(path, e))?;
                row("E", format!("{}", acc.anomaly), "").map_err(|e| csv_error(path, e))?;
                let n = acc.noise.map(|v| format!("{v}")).unwrap_or(NOT_APPLICABLE.into());
                row("N", n, "").map_err(|e| csv_error(path, e))?;
            }
            Err(msg) => row("", String::new(), msg).map_err(|e| csv_error(path, e))?,
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Truth and estimate per period for the requested flows.
pub fn write_overlays(path: &Path, report: &AccuracyReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["scenario", "method", "flow", "period", "component", "truth", "estimate"])
        .map_err(|e| csv_error(path, e))?;
    for o in &report.overlays {
        for (t, comp, truth, est) in &o.points {
            w.write_record([
                o.scenario.clone(),
                o.method.to_string(),
                o.flow.to_string(),
                t.to_string(),
                comp.to_string(),
                format_value(*truth),
                format_value(*est),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
