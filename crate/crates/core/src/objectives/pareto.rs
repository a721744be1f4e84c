//! Pareto orders on `ℝ^q` and non-dominated filtering.

use super::{ObjectiveError, ObjectiveVector};

fn same_len(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<(), ObjectiveError> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(ObjectiveError::InvalidInput(format!(
            "objective vectors of different lengths ({} and {})",
            a.len(),
            b.len()
        )))
    }
}

/// `a ⪯ b`: every component of `a` is at most the matching one of `b`.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool, ObjectiveError> {
    same_len(a, b)?;
    Ok(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x <= y))
}

/// `a ≺ b`: every component of `a` is strictly below the matching one of `b`.
pub fn strictly_dominates_weak(
    a: &ObjectiveVector,
    b: &ObjectiveVector,
) -> Result<bool, ObjectiveError> {
    same_len(a, b)?;
    Ok(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x < y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterMode {
    /// Drop `b` when some `a ⪯ b` with `a ≠ b` (Pareto efficiency).
    #[default]
    Efficient,
    /// Drop `b` only when some `a ≺ b` (weak efficiency).
    Weak,
}

/// Keeps the entries not dominated by any other entry, in input order.
///
/// Entries with mismatched objective counts are never treated as dominating
/// one another.
pub fn pareto_filter<P: Clone>(
    cloud: &[(P, ObjectiveVector)],
    mode: FilterMode,
) -> Vec<(P, ObjectiveVector)> {
    let beats = |a: &ObjectiveVector, b: &ObjectiveVector| match mode {
        FilterMode::Efficient => dominates(a, b).unwrap_or(false) && a != b,
        FilterMode::Weak => strictly_dominates_weak(a, b).unwrap_or(false),
    };
    cloud
        .iter()
        .filter(|(_, b)| !cloud.iter().any(|(_, a)| beats(a, b)))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ov(v: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&ov(&[1.0, 2.0]), &ov(&[1.0, 3.0])).unwrap());
        assert!(dominates(&ov(&[1.0, 2.0]), &ov(&[1.0, 2.0])).unwrap());
        assert!(!dominates(&ov(&[1.0, 4.0]), &ov(&[2.0, 3.0])).unwrap());
        assert!(strictly_dominates_weak(&ov(&[0.0, 0.0]), &ov(&[1.0, 1.0])).unwrap());
        assert!(!strictly_dominates_weak(&ov(&[0.0, 2.0]), &ov(&[1.0, 2.0])).unwrap());
        assert!(!strictly_dominates_weak(&ov(&[1.0, 1.0]), &ov(&[1.0, 1.0])).unwrap());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(dominates(&ov(&[1.0]), &ov(&[1.0, 2.0])).is_err());
        assert!(strictly_dominates_weak(&ov(&[1.0]), &ov(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn predicates_match_quantifiers_on_all_sign_patterns() {
        // every a - b with components in {-1, 0, 1}, q = 3
        let levels = [-1.0, 0.0, 1.0];
        for i in 0..27 {
            let diff = [levels[i % 3], levels[(i / 3) % 3], levels[i / 9]];
            let b = ov(&[5.0, -2.0, 0.5]);
            let a = ov(&[5.0 + diff[0], -2.0 + diff[1], 0.5 + diff[2]]);
            let all_le = diff.iter().all(|d| *d <= 0.0);
            let all_lt = diff.iter().all(|d| *d < 0.0);
            assert_eq!(dominates(&a, &b).unwrap(), all_le, "{diff:?}");
            assert_eq!(strictly_dominates_weak(&a, &b).unwrap(), all_lt, "{diff:?}");
        }
    }

    #[test]
    fn filter_examples() {
        let kept = pareto_filter(
            &[("A", ov(&[0.0, 1.0])), ("B", ov(&[1.0, 0.0]))],
            FilterMode::Efficient,
        );
        assert_eq!(kept.len(), 2);
        let kept = pareto_filter(
            &[("A", ov(&[0.0, 0.0])), ("B", ov(&[1.0, 1.0]))],
            FilterMode::Efficient,
        );
        assert_eq!(kept.iter().map(|k| k.0).collect::<Vec<_>>(), vec!["A"]);
    }

    #[test]
    fn weak_mode_keeps_ties_on_one_objective() {
        let cloud = [("A", ov(&[0.0, 1.0])), ("B", ov(&[0.0, 2.0]))];
        assert_eq!(pareto_filter(&cloud, FilterMode::Efficient).len(), 1);
        assert_eq!(pareto_filter(&cloud, FilterMode::Weak).len(), 2);
    }

    #[test]
    fn filter_matches_double_loop_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..20 {
            // coarse grid values so that ties actually occur
            let cloud: Vec<(usize, ObjectiveVector)> = (0..100)
                .map(|i| {
                    let v: Vec<f64> = (0..3).map(|_| rng.gen_range(0..6) as f64).collect();
                    (i, ov(&v))
                })
                .collect();
            let mut expected = Vec::new();
            for (i, (_, b)) in cloud.iter().enumerate() {
                let mut dominated = false;
                for (j, (_, a)) in cloud.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let le = (0..3).all(|k| a.as_slice()[k] <= b.as_slice()[k]);
                    let ne = (0..3).any(|k| a.as_slice()[k] != b.as_slice()[k]);
                    if le && ne {
                        dominated = true;
                    }
                }
                if !dominated {
                    expected.push(i);
                }
            }
            let got: Vec<usize> = pareto_filter(&cloud, FilterMode::Efficient)
                .into_iter()
                .map(|(i, _)| i)
                .collect();
            assert_eq!(got, expected);
        }
    }
}
