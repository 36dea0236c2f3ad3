use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::{ExperimentConfig, FailureRecord, ReplicationRecord, RunResult, Summary, SweepAxis};
use crate::error::{Error, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
/// Per-replication wall times, kept apart so that `records.csv` is a pure
/// function of the configuration.
pub const TIMINGS_FILE: &str = "timings.csv";

const RECORD_HEADER: [&str; 11] = [
    "replication_id",
    "seed",
    "status",
    "candidates",
    "diverged",
    "best_index",
    "convergent_value",
    "success",
    "start",
    "final",
    "error",
];

#[derive(Serialize)]
struct SummaryFile<'a> {
    artifact: &'static str,
    version: &'static str,
    generated_at_unix: u64,
    config: &'a ExperimentConfig,
    summary: &'a Summary,
    failures: &'a [FailureRecord],
}

fn join(p: &[f64]) -> String {
    p.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Format(format!("{}: {e}", path.display()))
}

/// Writes `records.csv`, `summary.json`, `histogram.csv` and `timings.csv`
/// into `dir`.
pub fn write_outputs(result: &RunResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let path = dir.join(RECORDS_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(RECORD_HEADER).map_err(csv_err(&path))?;
    let mut rows: Vec<(usize, Vec<String>)> = result
        .records
        .iter()
        .map(|r| {
            (
                r.replication_id,
                vec![
                    r.replication_id.to_string(),
                    r.seed.to_string(),
                    "ok".into(),
                    r.candidates.to_string(),
                    r.diverged.to_string(),
                    r.best_index.to_string(),
                    r.convergent_value.to_string(),
                    r.success.to_string(),
                    join(&r.start),
                    join(&r.final_point),
                    String::new(),
                ],
            )
        })
        .collect();
    rows.extend(result.failures.iter().map(|f| {
        let mut row = vec![
            f.replication_id.to_string(),
            f.seed.to_string(),
            "failed".into(),
        ];
        row.extend(std::iter::repeat_n(String::new(), 7));
        row.push(f.code.clone());
        (f.replication_id, row)
    }));
    rows.sort_by_key(|r| r.0);
    for (_, row) in rows {
        w.write_record(&row).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(HISTOGRAM_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["bin_left", "bin_right", "count"])
        .map_err(csv_err(&path))?;
    let h = &result.summary.histogram;
    for (i, c) in h.counts.iter().enumerate() {
        w.write_record([
            h.edges[i].to_string(),
            h.edges[i + 1].to_string(),
            c.to_string(),
        ])
        .map_err(csv_err(&path))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(TIMINGS_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["replication_id", "wall_time_ms"])
        .map_err(csv_err(&path))?;
    for r in &result.records {
        w.write_record([
            r.replication_id.to_string(),
            format!("{:.3}", r.wall_time_ms),
        ])
        .map_err(csv_err(&path))?;
    }
    w.write_record(["total".to_string(), format!("{:.3}", result.wall_time_ms)])
        .map_err(csv_err(&path))?;
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(SUMMARY_FILE);
    // Placement settings do not affect results and are left out.
    let mut config = result.config.clone();
    config.workers = None;
    config.output_dir = None;
    let file = SummaryFile {
        artifact: "gibbsinit",
        version: env!("CARGO_PKG_VERSION"),
        generated_at_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        config: &config,
        summary: &result.summary,
        failures: &result.failures,
    };
    let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|x| {
            x.parse()
                .map_err(|_| Error::Format(format!("bad coordinate {x:?}")))
        })
        .collect()
}

/// Reads back the completed replications of a `records.csv`.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ReplicationRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(csv_err(path))?;
        if &row[2] != "ok" {
            continue;
        }
        let num = |i: usize| -> Result<f64> {
            row[i].parse().map_err(|_| {
                Error::Format(format!(
                    "bad number {:?} in column {}",
                    &row[i], RECORD_HEADER[i]
                ))
            })
        };
        out.push(ReplicationRecord {
            replication_id: num(0)? as usize,
            seed: row[1]
                .parse()
                .map_err(|_| Error::Format("bad seed".into()))?,
            candidates: num(3)? as usize,
            diverged: num(4)? as usize,
            best_index: num(5)? as usize,
            convergent_value: num(6)?,
            success: &row[7] == "true",
            start: parse_point(&row[8])?,
            final_point: parse_point(&row[9])?,
            wall_time_ms: 0.0,
        });
    }
    Ok(out)
}

/// `sweep.csv`: one row per swept value.
pub fn write_sweep_table(
    dir: impl AsRef<Path>,
    axis: SweepAxis,
    results: &[(f64, RunResult)],
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record([
        axis.as_str(),
        "success_rate",
        "success_se",
        "median_value",
        "completed",
        "failed",
    ])
    .map_err(csv_err(&path))?;
    for (v, r) in results {
        let s = &r.summary;
        w.write_record([
            v.to_string(),
            s.success_rate.to_string(),
            s.success_se.to_string(),
            s.median_value.to_string(),
            s.completed.to_string(),
            s.failed.to_string(),
        ])
        .map_err(csv_err(&path))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}
