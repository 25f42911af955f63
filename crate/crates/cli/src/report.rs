//! Summaries of record files: a CSV with one row per record and
//! tab-separated plot data for the log-log figures.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde_json::Value;

use crate::CliError;

/// Columns placed first, in this order, whenever present.
const LEADING: [&str; 9] = [
    "schema_version",
    "command",
    "spec.dim",
    "spec.side",
    "spec.model.kind",
    "spec.model.range",
    "parameters.p",
    "seed",
    "samples",
];

pub const PLOTS: [&str; 3] = ["cmax_vs_volume", "chi_vs_distance", "tau_vs_distance"];

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => {
            let cell = match a.iter().map(scalar).collect::<Option<Vec<_>>>() {
                Some(items) => items.join(";"),
                None => v.to_string(),
            };
            out.insert(prefix.to_string(), cell);
        }
        _ => {
            out.insert(prefix.to_string(), scalar(v).unwrap_or_default());
        }
    }
}

/// Parsed records with their line numbers; bad lines are reported and skipped.
pub fn read_records(
    reader: impl BufRead,
    name: &str,
    errors: &mut Vec<String>,
) -> Result<Vec<Value>, CliError> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Value>(&line) {
            Ok(v) if v.get("schema_version").is_some() && v.get("command").is_some() => {
                records.push(v)
            }
            Ok(_) => errors.push(format!("{name}:{}: not an experiment record", i + 1)),
            Err(e) => errors.push(format!("{name}:{}: {e}", i + 1)),
        }
    }
    Ok(records)
}

pub fn write_csv(records: &[Value], sink: impl Write) -> Result<(), CliError> {
    let rows: Vec<BTreeMap<String, String>> = records
        .iter()
        .map(|r| {
            let mut m = BTreeMap::new();
            flatten("", r, &mut m);
            m
        })
        .collect();
    let all: BTreeSet<&String> = rows.iter().flat_map(|r| r.keys()).collect();
    let mut header: Vec<String> = LEADING.iter().map(|s| s.to_string()).collect();
    header.extend(
        all.into_iter()
            .filter(|k| !LEADING.contains(&k.as_str()))
            .cloned(),
    );
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for row in &rows {
        w.write_record(
            header
                .iter()
                .map(|h| row.get(h).map(String::as_str).unwrap_or("")),
        )
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn series(r: &Value) -> String {
    let spec = &r["spec"];
    let model = match spec["model"]["kind"].as_str() {
        Some("spread_out") => format!("range{}", spec["model"]["range"]),
        _ => "nn".to_string(),
    };
    format!("d{}-{model}", spec["dim"])
}

fn estimate(v: &Value) -> Option<(f64, f64)> {
    Some((v["mean"].as_f64()?, v["stderr"].as_f64()?))
}

/// `(plot, series, x, y, err)` rows contributed by one record.
fn plot_rows(r: &Value) -> Vec<(usize, String, f64, f64, f64)> {
    let mut rows = Vec::new();
    let res = &r["results"];
    let s = series(r);
    match r["command"].as_str().unwrap_or_default() {
        "cmax" | "window" => {
            let field = if r["command"] == "cmax" {
                "mean"
            } else {
                "cmax_mean"
            };
            let volume = r["spec"]["side"]
                .as_f64()
                .zip(r["spec"]["dim"].as_i64())
                .map(|(side, d)| side.powi(d as i32));
            if let (Some(v), Some((y, e))) = (volume, estimate(&res[field])) {
                rows.push((0, s, v, y, e));
            }
        }
        "gamma" => {
            let label = format!("{s}-pc{}", r["parameters"]["p_c_ref"]);
            for pt in res["points"].as_array().into_iter().flatten() {
                if let (Some(eps), Some((y, e))) = (pt[0].as_f64(), estimate(&pt[1])) {
                    rows.push((1, label.clone(), eps, y, e));
                }
            }
        }
        "tau" => {
            let label = format!("{s}-p{}", r["parameters"]["p"]);
            if let (Some(x), Some((y, e))) = (res["distance"].as_f64(), estimate(&res["estimate"]))
            {
                rows.push((2, label, x, y, e));
            }
        }
        "xi" => {
            let label = format!("{s}-p{}", r["parameters"]["p"]);
            for (k, est) in res["profile"].as_array().into_iter().flatten().enumerate() {
                if let Some((y, e)) = estimate(est) {
                    rows.push((2, label.clone(), (k + 1) as f64, y, e));
                }
            }
        }
        _ => {}
    }
    rows
}

pub fn write_plots(records: &[Value], dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<String> = vec!["x\ty\terr\tseries\n".to_string(); PLOTS.len()];
    for r in records {
        for (plot, series, x, y, e) in plot_rows(r) {
            files[plot].push_str(&format!("{x}\t{y}\t{e}\t{series}\n"));
        }
    }
    for (name, body) in PLOTS.iter().zip(files) {
        let path = dir.join(format!("{name}.tsv"));
        std::fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
