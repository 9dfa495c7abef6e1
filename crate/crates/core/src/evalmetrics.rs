//! Clustering quality metrics: the permutation-matched mis-specification
//! count, its Monte Carlo aggregates, and the Hausdorff distance between
//! center sets.
//!
//! Mis-specification is the number of wrongly labeled items after the best
//! relabeling of the predicted clusters. Small label counts enumerate all
//! K! permutations; larger ones solve an optimal assignment on the K x K
//! confusion matrix. Both give the exact minimum.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::matkmeans::frobenius_distance;

/// Label count up to which permutations are enumerated directly.
pub const ENUMERATION_LIMIT: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("label vectors differ in length: {pred} vs {truth}")]
    LengthMismatch { pred: usize, truth: usize },

    #[error("label {label} out of range for K = {k}")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("K must be at least 1")]
    InvalidK,

    #[error("Hausdorff distance requires nonempty sets")]
    EmptySet,

    #[error("matrices in the center sets have mixed dimensions")]
    DimensionMismatch,

    #[error("run errors require at least one run")]
    NoRuns,

    #[error("run {run} reports {errors} errors but only {n} surfaces")]
    ErrorsExceedSurfaces { run: usize, errors: usize, n: usize },
}

fn confusion(pred: &[usize], truth: &[usize], k: usize) -> Result<Vec<Vec<usize>>, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidK);
    }
    if pred.len() != truth.len() {
        return Err(MetricError::LengthMismatch { pred: pred.len(), truth: truth.len() });
    }
    let mut counts = vec![vec![0usize; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= k {
            return Err(MetricError::LabelOutOfRange { label: p, k });
        }
        if t >= k {
            return Err(MetricError::LabelOutOfRange { label: t, k });
        }
        counts[p][t] += 1;
    }
    Ok(counts)
}

/// Minimum over label permutations of the mis-labeled count. Labels are
/// zero-based and must lie below `k`. Dispatches on `k`: enumeration up to
/// [`ENUMERATION_LIMIT`], optimal assignment beyond.
pub fn misspecification(pred: &[usize], truth: &[usize], k: usize) -> Result<usize, MetricError> {
    if k <= ENUMERATION_LIMIT {
        misspecification_by_enumeration(pred, truth, k)
    } else {
        misspecification_by_assignment(pred, truth, k)
    }
}

/// Exact K! enumeration over relabelings.
pub fn misspecification_by_enumeration(
    pred: &[usize],
    truth: &[usize],
    k: usize,
) -> Result<usize, MetricError> {
    let counts = confusion(pred, truth, k)?;
    let n = pred.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best_matches = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let matches: usize = (0..k).map(|t| counts[p[t]][t]).sum();
        if matches > best_matches {
            best_matches = matches;
        }
    });
    Ok(n - best_matches)
}

fn permute<F: FnMut(&[usize])>(perm: &mut Vec<usize>, start: usize, visit: &mut F) {
    if start == perm.len() {
        visit(perm);
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute(perm, start + 1, visit);
        perm.swap(start, i);
    }
}

/// Optimal-assignment route: maximize matched counts on the confusion
/// matrix via a min-cost assignment on negated counts.
pub fn misspecification_by_assignment(
    pred: &[usize],
    truth: &[usize],
    k: usize,
) -> Result<usize, MetricError> {
    let counts = confusion(pred, truth, k)?;
    let n = pred.len();
    let cost: Vec<Vec<i64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| -(c as i64)).collect())
        .collect();
    let (total, _) = assignment::min_cost_assignment(&cost);
    Ok(n - (-total) as usize)
}

/// Per-run mis-specification counts from a Monte Carlo batch of `B` runs
/// over `n` surfaces each.
#[derive(Debug, Clone, PartialEq)]
pub struct RunErrors {
    per_run: Vec<usize>,
    n: usize,
}

impl RunErrors {
    pub fn new(per_run: Vec<usize>, n: usize) -> Result<Self, MetricError> {
        if per_run.is_empty() {
            return Err(MetricError::NoRuns);
        }
        for (run, &errors) in per_run.iter().enumerate() {
            if errors > n {
                return Err(MetricError::ErrorsExceedSurfaces { run, errors, n });
            }
        }
        Ok(Self { per_run, n })
    }

    pub fn per_run(&self) -> &[usize] {
        &self.per_run
    }

    pub fn surfaces(&self) -> usize {
        self.n
    }

    pub fn runs(&self) -> usize {
        self.per_run.len()
    }
}

/// `nu`: share of runs with at least one error. `phi`: mean error count
/// among those runs, defined as zero when no run errs.
pub fn aggregate(errors: &RunErrors) -> (f64, f64) {
    let b = errors.per_run.len();
    let error_runs = errors.per_run.iter().filter(|&&e| e >= 1).count();
    let total: usize = errors.per_run.iter().sum();
    let nu = error_runs as f64 / b as f64;
    let phi = if error_runs > 0 {
        total as f64 / error_runs as f64
    } else {
        0.0
    };
    (nu, phi)
}

/// Hausdorff distance between two finite sets of matrices under the
/// Frobenius norm.
pub fn hausdorff(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> Result<f64, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let directed = |from: &[DMatrix<f64>], to: &[DMatrix<f64>]| -> Result<f64, MetricError> {
        let mut worst = 0.0f64;
        for x in from {
            let mut nearest = f64::INFINITY;
            for y in to {
                let d = frobenius_distance(x, y).map_err(|_| MetricError::DimensionMismatch)?;
                nearest = nearest.min(d);
            }
            worst = worst.max(nearest);
        }
        Ok(worst)
    };
    Ok(directed(a, b)?.max(directed(b, a)?))
}

mod assignment {
    //! Min-cost perfect assignment on a square integer matrix, O(n^3)
    //! potentials formulation.

    pub(crate) fn min_cost_assignment(cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
        let n = cost.len();
        assert!(cost.iter().all(|row| row.len() == n), "cost matrix must be square");
        if n == 0 {
            return (0, Vec::new());
        }
        let mut u = vec![0i64; n + 1];
        let mut v = vec![0i64; n + 1];
        let mut matched_row = vec![0usize; n + 1];
        let mut way = vec![0usize; n + 1];
        for row in 1..=n {
            matched_row[0] = row;
            let mut j0 = 0usize;
            let mut minv = vec![i64::MAX; n + 1];
            let mut used = vec![false; n + 1];
            loop {
                used[j0] = true;
                let i0 = matched_row[j0];
                let mut delta = i64::MAX;
                let mut j1 = 0usize;
                for j in 1..=n {
                    if used[j] {
                        continue;
                    }
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
                for j in 0..=n {
                    if used[j] {
                        u[matched_row[j]] += delta;
                        v[j] -= delta;
                    } else {
                        minv[j] -= delta;
                    }
                }
                j0 = j1;
                if matched_row[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = way[j0];
                matched_row[j0] = matched_row[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        let mut assignment = vec![0usize; n];
        let mut total = 0i64;
        for j in 1..=n {
            let row = matched_row[j];
            assignment[row - 1] = j - 1;
            total += cost[row - 1][j - 1];
        }
        (total, assignment)
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn misspecification_examples() {
        assert_eq!(misspecification(&[0, 1, 0], &[0, 1, 0], 2).unwrap(), 0);
        // A global label swap is absorbed by the permutation.
        assert_eq!(misspecification(&[1, 0, 1], &[0, 1, 0], 2).unwrap(), 0);
        let truth = [0, 0, 0, 1, 1, 1];
        let pred = [0, 0, 1, 1, 1, 1];
        assert_eq!(misspecification(&pred, &truth, 2).unwrap(), 1);
    }

    #[test]
    fn misspecification_validation() {
        assert!(matches!(
            misspecification(&[0, 1], &[0], 2),
            Err(MetricError::LengthMismatch { .. })
        ));
        assert!(matches!(
            misspecification(&[0, 5], &[0, 1], 2),
            Err(MetricError::LabelOutOfRange { label: 5, k: 2 })
        ));
        assert!(matches!(misspecification(&[], &[], 0), Err(MetricError::InvalidK)));
    }

    #[test]
    fn misspecification_is_symmetric_and_relabel_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for k in 2..=4usize {
            for _ in 0..50 {
                let n = rng.random_range(k..30);
                let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
                let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
                let base = misspecification(&pred, &truth, k).unwrap();
                assert_eq!(base, misspecification(&truth, &pred, k).unwrap());

                // Apply a random relabeling permutation to pred.
                let mut relabel: Vec<usize> = (0..k).collect();
                for i in (1..k).rev() {
                    relabel.swap(i, rng.random_range(0..=i));
                }
                let relabeled: Vec<usize> = pred.iter().map(|&p| relabel[p]).collect();
                assert_eq!(base, misspecification(&relabeled, &truth, k).unwrap());
                let truth_relabeled: Vec<usize> = truth.iter().map(|&t| relabel[t]).collect();
                assert_eq!(base, misspecification(&pred, &truth_relabeled, k).unwrap());
            }
        }
    }

    #[test]
    fn assignment_route_equals_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 2..=4usize {
            for _ in 0..200 {
                let n = rng.random_range(k..40);
                let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
                let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
                assert_eq!(
                    misspecification_by_assignment(&pred, &truth, k).unwrap(),
                    misspecification_by_enumeration(&pred, &truth, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn misspecification_bound_on_balanced_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for k in 2..=4usize {
            for _ in 0..50 {
                let per = rng.random_range(1..8);
                let n = per * k;
                let truth: Vec<usize> = (0..n).map(|i| i / per).collect();
                let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
                let err = misspecification(&pred, &truth, k).unwrap();
                assert!(err <= n);
                assert!(err * k <= n * (k - 1), "err {} exceeds n(K-1)/K for n {} k {}", err, n, k);
            }
        }
    }

    #[test]
    fn dispatch_uses_assignment_above_limit() {
        // K = 9 exercises the assignment path through the public entry.
        let k = 9usize;
        let truth: Vec<usize> = (0..45).map(|i| i % k).collect();
        let mut pred = truth.clone();
        for p in pred.iter_mut() {
            *p = (*p + 3) % k; // a pure relabeling
        }
        assert_eq!(misspecification(&pred, &truth, k).unwrap(), 0);
    }

    #[test]
    fn aggregate_examples() {
        let zero = RunErrors::new(vec![0, 0, 0], 10).unwrap();
        assert_eq!(aggregate(&zero), (0.0, 0.0));

        let mixed = RunErrors::new(vec![2, 0, 3], 10).unwrap();
        let (nu, phi) = aggregate(&mixed);
        assert!((nu - 2.0 / 3.0).abs() < 1e-15);
        assert!((phi - 2.5).abs() < 1e-15);

        let single = RunErrors::new(vec![4], 10).unwrap();
        assert_eq!(aggregate(&single), (1.0, 4.0));
    }

    #[test]
    fn run_errors_validation() {
        assert!(matches!(RunErrors::new(vec![], 5), Err(MetricError::NoRuns)));
        assert!(matches!(
            RunErrors::new(vec![6], 5),
            Err(MetricError::ErrorsExceedSurfaces { .. })
        ));
    }

    #[test]
    fn hausdorff_examples() {
        let s = vec![scalar(1.0), scalar(4.0)];
        assert_eq!(hausdorff(&s, &s).unwrap(), 0.0);
        assert_eq!(hausdorff(&[scalar(0.0)], &[scalar(3.0)]).unwrap(), 3.0);
        assert_eq!(
            hausdorff(&[scalar(0.0), scalar(10.0)], &[scalar(1.0)]).unwrap(),
            9.0
        );
        assert!(matches!(hausdorff(&[], &s), Err(MetricError::EmptySet)));
        assert!(matches!(
            hausdorff(&[scalar(0.0)], &[DMatrix::zeros(2, 2)]),
            Err(MetricError::DimensionMismatch)
        ));
    }

    #[test]
    fn hausdorff_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let mut gen_set = |rng: &mut ChaCha8Rng| -> Vec<DMatrix<f64>> {
                let count = rng.random_range(1..4);
                (0..count)
                    .map(|_| DMatrix::from_fn(2, 2, |_, _| rng.random_range(-3.0..3.0)))
                    .collect()
            };
            let a = gen_set(&mut rng);
            let b = gen_set(&mut rng);
            let c = gen_set(&mut rng);
            let ab = hausdorff(&a, &b).unwrap();
            let bc = hausdorff(&b, &c).unwrap();
            let ac = hausdorff(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-12);
        }
    }
}
