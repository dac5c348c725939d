//! Files written under the output directory.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use vdsim_core::experiments::{AggregateRow, DriftPoint, AGGREGATE_COLUMNS};
use vdsim_core::qaoa::MaxCutInstance;
use vdsim_core::record::{format_float, SweepRecord, RECORD_COLUMNS, SCHEMA_VERSION};

pub fn ensure_dir(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()
}

pub fn write_records(dir: &Path, records: &[SweepRecord]) -> io::Result<PathBuf> {
    let path = dir.join("records.csv");
    write_rows(&path, &RECORD_COLUMNS, records.iter().map(SweepRecord::csv_fields))?;
    Ok(path)
}

pub fn write_aggregate(dir: &Path, rows: &[AggregateRow]) -> io::Result<PathBuf> {
    let path = dir.join("aggregate.csv");
    write_rows(&path, &AGGREGATE_COLUMNS, rows.iter().map(AggregateRow::csv_fields))?;
    Ok(path)
}

pub const DRIFT_COLUMNS: [&str; 5] = ["channel", "eps", "mean_coherent_mismatch", "n_instances", "unreliable"];

pub fn write_drift(dir: &Path, points: &[DriftPoint]) -> io::Result<PathBuf> {
    let path = dir.join("aggregate.csv");
    write_rows(
        &path,
        &DRIFT_COLUMNS,
        points.iter().map(|p| {
            vec![
                p.channel.to_string(),
                format_float(p.eps),
                format_float(p.mean_mismatch),
                p.n_instances.to_string(),
                p.unreliable.to_string(),
            ]
        }),
    )?;
    Ok(path)
}

pub fn write_graphs(dir: &Path, instances: &[(u64, u64, MaxCutInstance)]) -> io::Result<()> {
    let gdir = dir.join("graphs");
    fs::create_dir_all(&gdir)?;
    for (k, _, g) in instances {
        fs::write(gdir.join(format!("instance_{k}.edgelist")), g.to_edgelist())?;
    }
    Ok(())
}

#[derive(Debug)]
pub enum ReadError {
    Io(io::Error),
    Format(String),
}

pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>, ReadError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => ReadError::Io(io),
        other => ReadError::Format(format!("{other:?}")),
    })?;
    let header = r.headers().map_err(|e| ReadError::Format(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != RECORD_COLUMNS {
        return Err(ReadError::Format(format!(
            "{}: header does not match record schema v{SCHEMA_VERSION}",
            path.display()
        )));
    }
    r.records()
        .enumerate()
        .map(|(line, rec)| {
            let rec = rec.map_err(|e| ReadError::Format(e.to_string()))?;
            let fields: Vec<&str> = rec.iter().collect();
            SweepRecord::from_csv_fields(&fields).map_err(|e| ReadError::Format(format!("row {}: {e}", line + 2)))
        })
        .collect()
}

pub struct Manifest {
    pub lines: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            lines: vec![
                format!("vdsim {}", env!("CARGO_PKG_VERSION")),
                format!("record_schema = {SCHEMA_VERSION}"),
                format!("command = {command}"),
            ],
        }
    }

    pub fn section(&mut self, title: &str, body: &str) {
        self.lines.push(format!("\n[{title}]"));
        self.lines.extend(body.lines().map(str::to_string));
    }

    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join("manifest.txt");
        fs::write(&path, self.lines.join("\n") + "\n")?;
        Ok(path)
    }
}
