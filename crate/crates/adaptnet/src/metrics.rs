//! Column-oriented metrics tables and plot-data export.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{AppError, AppResult};
use crate::io::csv_writer;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    /// Undefined for this row, written as an empty field.
    Empty,
}

impl Cell {
    fn sort_key(&self) -> f64 {
        match self {
            Cell::Int(i) => *i as f64,
            Cell::Num(v) => *v,
            Cell::Text(_) | Cell::Empty => 0.0,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Append-only table whose column set is fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsFrame {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl MetricsFrame {
    pub fn new(columns: &[&str]) -> Self {
        MetricsFrame {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<Cell>) -> AppResult<()> {
        if row.len() != self.columns.len() {
            return Err(AppError::Input(format!(
                "metrics row has {} cells for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric view of one column; text and empty cells read as NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Int(v) => *v as f64,
                    Cell::Num(v) => *v,
                    Cell::Text(_) | Cell::Empty => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn write_csv(&self, path: &Path) -> AppResult<()> {
        let mut w = csv_writer(path)?;
        w.row(&self.columns)?;
        for r in &self.rows {
            w.row(r.iter().map(|c| c.to_string()).collect::<Vec<_>>())?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    AoiCurves,
    TrainingCurves,
    ClusterMap,
    TrajectoryCompare,
}

impl PlotKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlotKind::AoiCurves => "aoi_curves",
            PlotKind::TrainingCurves => "training_curves",
            PlotKind::ClusterMap => "cluster_map",
            PlotKind::TrajectoryCompare => "trajectory_compare",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            PlotKind::AoiCurves => &["lambda", "discipline", "avg_aoi"],
            PlotKind::TrainingCurves => &["episode", "agent", "cum_reward"],
            PlotKind::ClusterMap => &["cluster", "size", "centroid_x", "centroid_y", "medoid"],
            PlotKind::TrajectoryCompare => &["start_time", "end_time", "distance"],
        }
    }
}

/// Writes `<kind>.csv` into `dir` holding exactly the kind's columns.
/// Training curves are ordered by episode; other kinds keep row order.
pub fn emit_plot_data(metrics: &MetricsFrame, kind: PlotKind, dir: &Path) -> AppResult<PathBuf> {
    let wanted = kind.columns();
    let missing: Vec<String> = wanted
        .iter()
        .filter(|c| metrics.column_index(c).is_none())
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(AppError::Schema {
            kind: kind.name().to_string(),
            missing,
        });
    }
    let idx: Vec<usize> = wanted.iter().filter_map(|c| metrics.column_index(c)).collect();
    let mut out = MetricsFrame::new(wanted);
    for r in &metrics.rows {
        out.rows.push(idx.iter().map(|&i| r[i].clone()).collect());
    }
    if kind == PlotKind::TrainingCurves {
        out.rows.sort_by(|a, b| a[0].sort_key().total_cmp(&b[0].sort_key()));
    }
    let path = dir.join(format!("{}.csv", kind.name()));
    out.write_csv(&path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_column_set() {
        let mut m = MetricsFrame::new(&["a", "b"]);
        m.push(vec![1usize.into(), 0.5.into()]).unwrap();
        assert!(m.push(vec![1usize.into()]).is_err());
        assert_eq!(m.numbers("b"), Some(vec![0.5]));
        assert_eq!(m.numbers("c"), None);
    }

    #[test]
    fn missing_columns_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        let m = MetricsFrame::new(&["lambda", "avg"]);
        match emit_plot_data(&m, PlotKind::AoiCurves, dir.path()) {
            Err(AppError::Schema { kind, missing }) => {
                assert_eq!(kind, "aoi_curves");
                assert_eq!(missing, vec!["discipline", "avg_aoi"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn training_curves_sorted_by_episode() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = MetricsFrame::new(&["agent", "cum_reward", "episode", "loss"]);
        for (ep, agent) in [(2usize, 0usize), (0, 1), (1, 0), (0, 0)] {
            m.push(vec![agent.into(), (ep as f64 * 0.5).into(), ep.into(), 0.0.into()]).unwrap();
        }
        let p = emit_plot_data(&m, PlotKind::TrainingCurves, dir.path()).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text, "episode,agent,cum_reward\n0,1,0\n0,0,0\n1,0,0.5\n2,0,1\n");
    }
}
