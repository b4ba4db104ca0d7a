//! Flat-file formats: trajectory CSV input and JSON-lines logs.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use adaptnet_core::{Point, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Debug, Deserialize)]
struct TrajectoryRow {
    id: String,
    x: f64,
    y: f64,
    t: f64,
}

/// Reads `id,x,y,t` rows into one labelled trajectory per id, in order of
/// first appearance. Rows of one id must be time-ordered.
pub fn read_trajectories(path: &Path) -> AppResult<Vec<Trajectory>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| AppError::csv(path, e))?;
    let mut order: Vec<String> = Vec::new();
    let mut points: HashMap<String, Vec<Point>> = HashMap::new();
    for row in reader.deserialize::<TrajectoryRow>() {
        let row = row.map_err(|e| AppError::csv(path, e))?;
        let list = points.entry(row.id.clone()).or_insert_with(|| {
            order.push(row.id.clone());
            Vec::new()
        });
        list.push(Point {
            x: row.x,
            y: row.y,
            t: row.t,
        });
    }
    if order.is_empty() {
        return Err(AppError::Input(format!("{}: no trajectory rows", path.display())));
    }
    order
        .into_iter()
        .map(|id| {
            let pts = points.remove(&id).unwrap_or_default();
            Trajectory::new(pts)
                .map(|t| t.with_label(id.clone()))
                .map_err(|e| AppError::Input(format!("{}: trajectory `{id}`: {e}", path.display())))
        })
        .collect()
}

pub fn write_trajectories(path: &Path, trajectories: &[Trajectory]) -> AppResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| AppError::csv(path, e))?;
    w.write_record(["id", "x", "y", "t"]).map_err(|e| AppError::csv(path, e))?;
    for (i, tr) in trajectories.iter().enumerate() {
        let id = tr.label().map_or_else(|| i.to_string(), str::to_string);
        for p in tr.points() {
            w.serialize((&id, p.x, p.y, p.t)).map_err(|e| AppError::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

pub fn create_file(path: &Path) -> AppResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| AppError::io(path, e))
}

pub fn csv_writer(path: &Path) -> AppResult<CsvOut> {
    Ok(CsvOut {
        inner: csv::Writer::from_writer(create_file(path)?),
        path: path.to_path_buf(),
    })
}

/// CSV writer that remembers its path for error messages.
pub struct CsvOut {
    inner: csv::Writer<BufWriter<File>>,
    path: PathBuf,
}

impl CsvOut {
    pub fn header(&mut self, cols: &[&str]) -> AppResult<()> {
        self.inner.write_record(cols).map_err(|e| AppError::csv(&self.path, e))
    }

    pub fn row<S: Serialize>(&mut self, row: S) -> AppResult<()> {
        self.inner.serialize(row).map_err(|e| AppError::csv(&self.path, e))
    }

    pub fn flush(&mut self) -> AppResult<()> {
        self.inner.flush().map_err(|e| AppError::io(&self.path, e))
    }
}

/// Append-only JSON-lines log, flushed per record so an interrupted run
/// leaves every completed line intact.
pub struct JsonLines {
    out: BufWriter<File>,
    path: PathBuf,
}

impl JsonLines {
    pub fn create(path: &Path) -> AppResult<Self> {
        Ok(JsonLines {
            out: create_file(path)?,
            path: path.to_path_buf(),
        })
    }

    pub fn write<S: Serialize>(&mut self, record: &S) -> AppResult<()> {
        serde_json::to_writer(&mut self.out, record).map_err(|e| AppError::json(&self.path, e))?;
        self.out.write_all(b"\n").map_err(|e| AppError::io(&self.path, e))
    }

    pub fn flush(&mut self) -> AppResult<()> {
        self.out.flush().map_err(|e| AppError::io(&self.path, e))
    }
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> AppResult<()> {
    let mut out = create_file(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| AppError::json(path, e))?;
    out.write_all(b"\n").map_err(|e| AppError::io(path, e))?;
    out.flush().map_err(|e| AppError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}
