//! Trajectory CSV:
//! `step,t,u0..u{d-1},v0..v{d-1},f1..f{q},E1..E{q},snorm,theta1..theta{q}`.

use std::io::Write;
use std::path::Path;

use super::{fmt_f64, write_file, TrajioError};
use crate::dynamics::Trajectory;

pub fn trajectory_header(dim: usize, count: usize) -> Vec<String> {
    let mut cols = vec!["step".to_string(), "t".to_string()];
    cols.extend((0..dim).map(|k| format!("u{k}")));
    cols.extend((0..dim).map(|k| format!("v{k}")));
    cols.extend((1..=count).map(|i| format!("f{i}")));
    cols.extend((1..=count).map(|i| format!("E{i}")));
    cols.push("snorm".into());
    cols.extend((1..=count).map(|i| format!("theta{i}")));
    cols
}

pub fn write_trajectory_csv_to<W: Write>(trajectory: &Trajectory, mut w: W) -> std::io::Result<()> {
    let header = trajectory_header(trajectory.dim(), trajectory.objective_count());
    writeln!(w, "{}", header.join(","))?;
    for (n, (s, d)) in trajectory
        .states
        .iter()
        .zip(&trajectory.diagnostics)
        .enumerate()
    {
        let mut row = vec![n.to_string(), fmt_f64(s.t)];
        row.extend(s.u.iter().map(|&x| fmt_f64(x)));
        row.extend(s.v.iter().map(|&x| fmt_f64(x)));
        row.extend(d.values.as_slice().iter().map(|&x| fmt_f64(x)));
        row.extend(d.energies.as_slice().iter().map(|&x| fmt_f64(x)));
        row.push(fmt_f64(d.snorm));
        row.extend(d.weights.as_slice().iter().map(|&x| fmt_f64(x)));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_trajectory_csv(trajectory: &Trajectory, path: &Path) -> Result<(), TrajioError> {
    let mut buf = Vec::new();
    write_trajectory_csv_to(trajectory, &mut buf).map_err(|e| TrajioError::io(path, e))?;
    write_file(path, &buf)
}

/// A trajectory CSV read back as numbers; `step` is stored as a float.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TrajectoryTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryTable, TrajioError> {
    let text = std::fs::read_to_string(path).map_err(|e| TrajioError::io(path, e))?;
    let err = |line: usize, message: String| TrajioError::Csv {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut lines = text.lines();
    let columns: Vec<String> = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    if columns.first().map(String::as_str) != Some("step") {
        return Err(err(1, "header must start with 'step'".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|e| err(i + 2, format!("'{cell}': {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != columns.len() {
            return Err(err(
                i + 2,
                format!("{} fields, header has {}", row.len(), columns.len()),
            ));
        }
        rows.push(row);
    }
    Ok(TrajectoryTable { columns, rows })
}
