//! gnuplot scripts. Initial points are drawn as `×`, terminal points as `⊕`
//! (a circle over a plus).

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{fmt_f64, write_file, TrajioError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Trajectory2d,
    Values,
    Energies,
    ParetoCloud,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [
        PlotKind::Trajectory2d,
        PlotKind::Values,
        PlotKind::Energies,
        PlotKind::ParetoCloud,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Trajectory2d => "trajectory2d",
            PlotKind::Values => "values",
            PlotKind::Energies => "energies",
            PlotKind::ParetoCloud => "pareto_cloud",
        }
    }
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = PlotKind::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown plot kind '{s}', expected one of {}",
                    names.join(", ")
                )
            })
    }
}

/// A background arrow of the steepest-descent field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub point: [f64; 2],
    pub direction: [f64; 2],
}

/// What a script plots. Paths are written into the script verbatim and are
/// meant to be relative to the script's directory.
#[derive(Debug, Clone, Copy)]
pub enum PlotSource<'a> {
    Trajectory {
        csv: &'a str,
        dim: usize,
        count: usize,
        rows: usize,
        field: Option<&'a [FieldSample]>,
    },
    Sweep {
        summary_csv: &'a str,
        nondominated_csv: &'a str,
        run_csvs: &'a [String],
        dim: usize,
        count: usize,
    },
}

const START: &str = "pt 2 ps 2 lc rgb \"black\"";
const END_RING: &str = "pt 6 ps 2 lc rgb \"black\"";
const END_PLUS: &str = "pt 1 ps 2 lc rgb \"black\"";

fn quote(path: &str) -> String {
    format!("\"{}\"", path.replace('\\', "\\\\").replace('"', "\\\""))
}

fn preamble(out: &mut String, kind: PlotKind) {
    let _ = writeln!(out, "# imog {} plot", kind.name());
    out.push_str("set datafile separator \",\"\n");
    out.push_str("set key outside right\n");
    out.push_str("set grid\n");
}

fn require_2d(kind: PlotKind, dim: usize) -> Result<(), TrajioError> {
    if dim != 2 {
        return Err(TrajioError::InvalidInput(format!(
            "{} plots need a two-dimensional problem, got dimension {dim}",
            kind.name()
        )));
    }
    Ok(())
}

fn trajectory_script(
    kind: PlotKind,
    csv: &str,
    dim: usize,
    count: usize,
    rows: usize,
    field: Option<&[FieldSample]>,
) -> Result<String, TrajioError> {
    if rows == 0 {
        return Err(TrajioError::InvalidInput("trajectory has no rows".into()));
    }
    let mut s = String::new();
    preamble(&mut s, kind);
    let file = quote(csv);
    let last = rows - 1;
    match kind {
        PlotKind::Trajectory2d => {
            require_2d(kind, dim)?;
            s.push_str("set xlabel \"u0\"\nset ylabel \"u1\"\nset size ratio -1\n");
            let mut parts = Vec::new();
            if let Some(field) = field {
                s.push_str("$field << EOD\n");
                for f in field {
                    let _ = writeln!(
                        s,
                        "{} {} {} {}",
                        fmt_f64(f.point[0]),
                        fmt_f64(f.point[1]),
                        fmt_f64(f.direction[0]),
                        fmt_f64(f.direction[1])
                    );
                }
                s.push_str("EOD\n");
                parts.push(
                    "$field using 1:2:3:4 with vectors head filled size screen 0.008,15 lc rgb \"#b0b0b0\" notitle"
                        .to_string(),
                );
            }
            parts.push(format!(
                "{file} skip 1 using 3:4 with lines lw 2 title \"u(t)\""
            ));
            parts.push(format!(
                "{file} skip 1 every ::0::0 using 3:4 with points {START} title \"start\""
            ));
            parts.push(format!("{file} skip 1 every ::{last}::{last} using 3:4 with points {END_RING} title \"end\""));
            parts.push(format!(
                "{file} skip 1 every ::{last}::{last} using 3:4 with points {END_PLUS} notitle"
            ));
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
        PlotKind::Values | PlotKind::Energies => {
            let (first, prefix, label) = if kind == PlotKind::Values {
                (3 + 2 * dim, "f", "value")
            } else {
                (3 + 2 * dim + count, "E", "energy")
            };
            let _ = writeln!(s, "set xlabel \"t\"\nset ylabel \"{label}\"");
            let parts: Vec<String> = (0..count)
                .map(|i| {
                    format!(
                        "{file} skip 1 using 2:{} with lines lw 2 title \"{prefix}{}\"",
                        first + i,
                        i + 1
                    )
                })
                .collect();
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
        PlotKind::ParetoCloud => {
            return Err(TrajioError::InvalidInput(
                "pareto_cloud plots need sweep results".into(),
            ))
        }
    }
    Ok(s)
}

fn sweep_script(
    kind: PlotKind,
    summary_csv: &str,
    nondominated_csv: &str,
    run_csvs: &[String],
    dim: usize,
) -> Result<String, TrajioError> {
    require_2d(kind, dim)?;
    let mut s = String::new();
    preamble(&mut s, kind);
    s.push_str("set xlabel \"u0\"\nset ylabel \"u1\"\nset size ratio -1\n");
    let summary = quote(summary_csv);
    let mut parts = Vec::new();
    match kind {
        PlotKind::Trajectory2d => {
            for (k, csv) in run_csvs.iter().enumerate() {
                let title = if k == 0 { "title \"u(t)\"" } else { "notitle" };
                parts.push(format!(
                    "{} skip 1 using 3:4 with lines lc rgb \"#4060c0\" {title}",
                    quote(csv)
                ));
            }
            for (k, csv) in run_csvs.iter().enumerate() {
                let title = if k == 0 { "title \"start\"" } else { "notitle" };
                parts.push(format!(
                    "{} skip 1 every ::0::0 using 3:4 with points {START} {title}",
                    quote(csv)
                ));
            }
            parts.push(format!(
                "{summary} skip 1 using 3:4 with points {END_RING} title \"end\""
            ));
            parts.push(format!(
                "{summary} skip 1 using 3:4 with points {END_PLUS} notitle"
            ));
        }
        PlotKind::ParetoCloud => {
            parts.push(format!(
                "{summary} skip 1 using 3:4 with points {END_RING} title \"terminal points\""
            ));
            parts.push(format!(
                "{summary} skip 1 using 3:4 with points {END_PLUS} notitle"
            ));
            parts.push(format!(
                "{} skip 1 using 3:4 with points pt 7 ps 1 lc rgb \"#c03030\" title \"non-dominated\"",
                quote(nondominated_csv)
            ));
        }
        PlotKind::Values | PlotKind::Energies => {
            return Err(TrajioError::InvalidInput(format!(
                "{} plots need a single trajectory",
                kind.name()
            )))
        }
    }
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    Ok(s)
}

pub fn emit_plot_script(
    source: &PlotSource<'_>,
    path: &Path,
    kind: PlotKind,
) -> Result<(), TrajioError> {
    let script = match *source {
        PlotSource::Trajectory {
            csv,
            dim,
            count,
            rows,
            field,
        } => trajectory_script(kind, csv, dim, count, rows, field)?,
        PlotSource::Sweep {
            summary_csv,
            nondominated_csv,
            run_csvs,
            dim,
            ..
        } => sweep_script(kind, summary_csv, nondominated_csv, run_csvs, dim)?,
    };
    write_file(path, script.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(dim: usize, field: Option<&[FieldSample]>) -> PlotSource<'_> {
        PlotSource::Trajectory {
            csv: "trajectory.csv",
            dim,
            count: 2,
            rows: 11,
            field,
        }
    }

    fn emit(source: &PlotSource<'_>, kind: PlotKind) -> Result<String, TrajioError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.gp");
        emit_plot_script(source, &path, kind)?;
        Ok(std::fs::read_to_string(path).unwrap())
    }

    #[test]
    fn kind_names_round_trip() {
        for k in PlotKind::ALL {
            assert_eq!(k.name().parse::<PlotKind>().unwrap(), k);
        }
        assert!("bars".parse::<PlotKind>().is_err());
    }

    #[test]
    fn trajectory_script_marks_endpoints() {
        let s = emit(&traj(2, None), PlotKind::Trajectory2d).unwrap();
        assert!(s.contains("\"trajectory.csv\" skip 1 using 3:4 with lines"));
        assert!(s.contains("every ::0::0 using 3:4 with points pt 2"));
        assert!(s.contains("every ::10::10 using 3:4 with points pt 6"));
        assert!(s.contains("every ::10::10 using 3:4 with points pt 1"));
        assert!(!s.contains("$field"));
    }

    #[test]
    fn field_is_inlined() {
        let field = [FieldSample {
            point: [1.0, 0.5],
            direction: [-0.1, 0.0],
        }];
        let s = emit(&traj(2, Some(&field)), PlotKind::Trajectory2d).unwrap();
        assert!(s.contains("$field << EOD\n1.0000000000000000e0 5.0000000000000000e-1"));
        assert!(s.contains("$field using 1:2:3:4 with vectors"));
    }

    #[test]
    fn series_columns() {
        // d = 2, q = 2: f1 f2 in columns 7 8, E1 E2 in 9 10
        let s = emit(&traj(2, None), PlotKind::Values).unwrap();
        assert!(s.contains("using 2:7 with lines lw 2 title \"f1\""));
        assert!(s.contains("using 2:8 with lines lw 2 title \"f2\""));
        let s = emit(&traj(2, None), PlotKind::Energies).unwrap();
        assert!(s.contains("using 2:9 with lines lw 2 title \"E1\""));
        assert!(s.contains("using 2:10 with lines lw 2 title \"E2\""));
        let s = emit(&traj(3, None), PlotKind::Values).unwrap();
        assert!(s.contains("using 2:9 "));
    }

    #[test]
    fn dimension_and_source_checks() {
        assert!(matches!(
            emit(&traj(3, None), PlotKind::Trajectory2d),
            Err(TrajioError::InvalidInput(_))
        ));
        assert!(emit(&traj(2, None), PlotKind::ParetoCloud).is_err());
        let runs = vec!["runs/run_0000.csv".to_string()];
        let sweep = |dim| PlotSource::Sweep {
            summary_csv: "summary.csv",
            nondominated_csv: "nondominated.csv",
            run_csvs: &runs,
            dim,
            count: 2,
        };
        assert!(emit(&sweep(3), PlotKind::ParetoCloud).is_err());
        assert!(emit(&sweep(2), PlotKind::Values).is_err());
        let s = emit(&sweep(2), PlotKind::ParetoCloud).unwrap();
        assert!(s.contains("\"nondominated.csv\" skip 1 using 3:4"));
        let s = emit(&sweep(2), PlotKind::Trajectory2d).unwrap();
        assert!(s.contains("\"runs/run_0000.csv\" skip 1 every ::0::0 using 3:4 with points pt 2"));
    }
}
