//! Sweep outputs: `summary.csv` with one row per run, `nondominated.csv`
//! with the rows whose terminal values no other run dominates, and
//! `index.json` tying the run files together.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::SampleBox;
use super::{fmt_f64, write_file, TrajioError};
use crate::dynamics::StopReason;
use crate::objectives::{pareto_filter, FilterMode, ObjectiveVector};

/// Terminal state of one sweep run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub u: Vec<f64>,
    pub values: ObjectiveVector,
    pub snorm: f64,
    pub stop_reason: StopReason,
    pub pareto_distance: Option<f64>,
}

/// Start of run `run`, drawn uniformly from the box with seed `base_seed + run`.
pub fn sample_initial_point(sample_box: &SampleBox, base_seed: u64, run: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(base_seed, run));
    sample_box
        .min
        .iter()
        .zip(&sample_box.max)
        .map(|(&lo, &hi)| if lo == hi { lo } else { rng.gen_range(lo..=hi) })
        .collect()
}

pub fn run_seed(base_seed: u64, run: usize) -> u64 {
    base_seed.wrapping_add(run as u64)
}

pub fn sweep_header(dim: usize, count: usize, with_distance: bool) -> Vec<String> {
    let mut cols = vec!["run".to_string(), "seed".to_string()];
    cols.extend((0..dim).map(|k| format!("u{k}")));
    cols.extend((1..=count).map(|i| format!("f{i}")));
    cols.push("snorm".into());
    cols.push("stop_reason".into());
    if with_distance {
        cols.push("pareto_distance".into());
    }
    cols
}

fn render(rows: &[&RunSummary], header: &[String], with_distance: bool) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let mut cells = vec![r.run.to_string(), r.seed.to_string()];
        cells.extend(r.u.iter().map(|&x| fmt_f64(x)));
        cells.extend(r.values.as_slice().iter().map(|&x| fmt_f64(x)));
        cells.push(fmt_f64(r.snorm));
        cells.push(r.stop_reason.name().to_string());
        if with_distance {
            cells.push(r.pareto_distance.map(fmt_f64).unwrap_or_default());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes the summary and its non-dominated subset; returns the subset size.
pub fn write_sweep_summary(
    results: &[RunSummary],
    summary_path: &Path,
    nondominated_path: &Path,
) -> Result<usize, TrajioError> {
    let first = results
        .first()
        .ok_or_else(|| TrajioError::InvalidInput("no sweep results to summarize".into()))?;
    let (dim, count) = (first.u.len(), first.values.len());
    if results
        .iter()
        .any(|r| r.u.len() != dim || r.values.len() != count)
    {
        return Err(TrajioError::InvalidInput(
            "sweep results have inconsistent dimensions".into(),
        ));
    }
    let with_distance = results.iter().any(|r| r.pareto_distance.is_some());
    let header = sweep_header(dim, count, with_distance);

    let all: Vec<&RunSummary> = results.iter().collect();
    write_file(
        summary_path,
        render(&all, &header, with_distance).as_bytes(),
    )?;

    let cloud: Vec<(usize, ObjectiveVector)> = results
        .iter()
        .enumerate()
        .map(|(k, r)| (k, r.values.clone()))
        .collect();
    let kept: Vec<&RunSummary> = pareto_filter(&cloud, FilterMode::Efficient)
        .into_iter()
        .map(|(k, _)| &results[k])
        .collect();
    write_file(
        nondominated_path,
        render(&kept, &header, with_distance).as_bytes(),
    )?;
    Ok(kept.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepIndexEntry {
    pub run: usize,
    pub seed: u64,
    pub csv: String,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepIndex {
    pub problem: String,
    pub n_runs: usize,
    pub base_seed: u64,
    pub sample_box: SampleBox,
    pub summary: String,
    pub nondominated: String,
    pub nondominated_count: usize,
    pub runs: Vec<SweepIndexEntry>,
}

pub fn write_sweep_index(index: &SweepIndex, path: &Path) -> Result<(), TrajioError> {
    let mut text = serde_json::to_string_pretty(index)
        .map_err(|e| TrajioError::InvalidInput(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(run: usize, f: &[f64]) -> RunSummary {
        RunSummary {
            run,
            seed: 10 + run as u64,
            u: vec![run as f64, 0.0],
            values: ObjectiveVector::new(f.to_vec()).unwrap(),
            snorm: 0.0,
            stop_reason: StopReason::Criticality,
            pareto_distance: Some(0.0),
        }
    }

    fn write(results: &[RunSummary]) -> (String, String, usize) {
        let dir = tempfile::tempdir().unwrap();
        let (s, n) = (dir.path().join("s.csv"), dir.path().join("n.csv"));
        let kept = write_sweep_summary(results, &s, &n).unwrap();
        (
            std::fs::read_to_string(s).unwrap(),
            std::fs::read_to_string(n).unwrap(),
            kept,
        )
    }

    #[test]
    fn single_run() {
        let (s, n, kept) = write(&[summary(0, &[1.0, 2.0])]);
        assert_eq!(kept, 1);
        assert_eq!(s.lines().count(), 2);
        assert_eq!(s, n);
        assert!(s.starts_with("run,seed,u0,u1,f1,f2,snorm,stop_reason,pareto_distance\n0,10,"));
        assert!(s.contains(",criticality,"));
    }

    #[test]
    fn dominated_run_is_dropped() {
        let (s, n, kept) = write(&[summary(0, &[1.0, 1.0]), summary(1, &[2.0, 2.0])]);
        assert_eq!(kept, 1);
        assert_eq!(s.lines().count(), 3);
        assert_eq!(n.lines().count(), 2);
        assert!(n.lines().nth(1).unwrap().starts_with("0,"));
    }

    #[test]
    fn empty_results_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_sweep_summary(&[], &dir.path().join("a"), &dir.path().join("b")).is_err());
    }

    #[test]
    fn distance_column_is_optional() {
        let mut r = summary(0, &[1.0, 1.0]);
        r.pareto_distance = None;
        let (s, _, _) = write(&[r]);
        assert!(s.starts_with("run,seed,u0,u1,f1,f2,snorm,stop_reason\n"));
    }

    #[test]
    fn sampling_is_seeded_and_in_the_box() {
        let b = SampleBox {
            min: vec![-4.0, 1.0, 2.0],
            max: vec![4.0, 1.5, 2.0],
        };
        for run in 0..200 {
            let u = sample_initial_point(&b, 42, run);
            assert_eq!(u, sample_initial_point(&b, 42, run));
            for k in 0..3 {
                assert!(b.min[k] <= u[k] && u[k] <= b.max[k]);
            }
            assert_eq!(u[2], 2.0);
        }
        assert_ne!(
            sample_initial_point(&b, 42, 0),
            sample_initial_point(&b, 42, 1)
        );
        // run k of base seed s is run 0 of base seed s + k
        assert_eq!(
            sample_initial_point(&b, 42, 3),
            sample_initial_point(&b, 45, 0)
        );
    }
}
