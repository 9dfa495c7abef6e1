//! Empirical consistency experiments: convergence of estimated cluster
//! centers in the number of surfaces (Hausdorff distance to a large-sample
//! reference) and convergence of the fitted coefficient matrix in the
//! number of observations per surface.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{derive_seed, mixture_density, perturbed_matrix, scenario_center, uniform_in, SimError};
use super::{DEFAULT_DEGREE, DEFAULT_INTERIOR_KNOTS};
use crate::evalmetrics::hausdorff;
use crate::matkmeans::{cluster_with_selected_init, DEFAULT_MAX_ITER};
use crate::splines::BasisSpec;
use crate::tensorfit::{fit_surface, SamplePoint, SurfaceSamples};

/// Observations per surface for the coefficient-convergence reference fit.
pub const REFERENCE_SAMPLE_COUNT: usize = 50_000;

/// Noise level shared by both experiments' observation models.
pub const EXPERIMENT_NOISE_SD: f64 = 0.015;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsistencyKind {
    /// Cluster increasing numbers of coefficient matrices and measure the
    /// Hausdorff distance from each center set to the largest-sample one.
    CenterHausdorff,
    /// Fit one fixed surface from increasing numbers of noisy observations
    /// and measure the coefficient distance to a large-sample reference fit.
    CoeffConvergence,
}

/// Distances per replicate and size, plus their per-size medians.
#[derive(Debug, Clone)]
pub struct ConsistencyTable {
    pub kind: ConsistencyKind,
    pub sizes: Vec<usize>,
    pub reps: usize,
    /// `distances[rep][size_index]`
    pub distances: Vec<Vec<f64>>,
    pub medians: Vec<f64>,
}

fn validate_sizes(sizes: &[usize]) -> Result<(), SimError> {
    if sizes.is_empty() {
        return Err(SimError::InvalidSizes("sizes list is empty".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::InvalidSizes("sizes must be strictly increasing".into()));
    }
    Ok(())
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Runs one of the two experiments and tabulates distances.
pub fn consistency_experiment(
    kind: ConsistencyKind,
    sizes: &[usize],
    reps: usize,
    seed: u64,
) -> Result<ConsistencyTable, SimError> {
    validate_sizes(sizes)?;
    if reps == 0 {
        return Err(SimError::InvalidSizes("need at least one replicate".into()));
    }
    let distances = match kind {
        ConsistencyKind::CenterHausdorff => center_hausdorff_table(sizes, reps, seed, 0.5)?,
        ConsistencyKind::CoeffConvergence => coeff_convergence_table(sizes, reps, seed)?,
    };
    let medians = (0..sizes.len())
        .map(|i| median(&distances.iter().map(|row| row[i]).collect::<Vec<_>>()))
        .collect();
    Ok(ConsistencyTable { kind, sizes: sizes.to_vec(), reps, distances, medians })
}

/// Draws coefficient matrices from a two-component mixture (entrywise
/// Gaussian spread `component_sd` around two fixed 6x6 centers), clusters
/// nested prefixes of the draw, and measures the Hausdorff distance of each
/// prefix's center set to the full-sample one.
pub(crate) fn center_hausdorff_table(
    sizes: &[usize],
    reps: usize,
    seed: u64,
    component_sd: f64,
) -> Result<Vec<Vec<f64>>, SimError> {
    if sizes[0] < 2 {
        return Err(SimError::InvalidSizes("need at least two samples to form two clusters".into()));
    }
    let dim = 6;
    let center_a = DMatrix::zeros(dim, dim);
    let center_b = DMatrix::from_element(dim, dim, 0.5);
    let max_n = *sizes.last().expect("validated nonempty");

    let mut table = Vec::with_capacity(reps);
    for rep in 0..reps {
        let rep_seed = derive_seed(seed, rep as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(rep_seed, 0));
        let mut draw = Vec::with_capacity(max_n);
        for _ in 0..max_n {
            let base = if uniform_in(&mut rng, 0.0, 1.0) < 0.5 { &center_a } else { &center_b };
            draw.push(perturbed_matrix(base, component_sd, &mut rng));
        }
        let cluster_seed = derive_seed(rep_seed, 1);
        let (reference, _) = cluster_with_selected_init(&draw, 2, cluster_seed, DEFAULT_MAX_ITER)?;
        let mut row = Vec::with_capacity(sizes.len());
        for &n in sizes {
            let (model, _) =
                cluster_with_selected_init(&draw[..n], 2, cluster_seed, DEFAULT_MAX_ITER)?;
            row.push(hausdorff(&model.centers, &reference.centers)?);
        }
        table.push(row);
    }
    Ok(table)
}

fn coeff_convergence_table(
    sizes: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, SimError> {
    let (lo, hi) = (-5.0, 5.0);
    let spec = BasisSpec::make_clamped(DEFAULT_DEGREE, DEFAULT_INTERIOR_KNOTS, lo, hi)?;
    let params = spec.basis_count() * spec.basis_count();
    if sizes[0] < params {
        return Err(SimError::InvalidSizes(format!(
            "smallest size {} cannot identify {} coefficients",
            sizes[0], params
        )));
    }
    let target = scenario_center(1, 1, 1.0)?;
    let noise = Normal::new(0.0, EXPERIMENT_NOISE_SD).expect("positive sd");

    let fit_once = |m: usize, rng: &mut ChaCha8Rng| -> Result<DMatrix<f64>, SimError> {
        let mut points = Vec::with_capacity(m);
        for _ in 0..m {
            let x = uniform_in(rng, lo, hi);
            let y = uniform_in(rng, lo, hi);
            let z = mixture_density(&target, x, y)? + noise.sample(rng);
            points.push(SamplePoint { x, y, z });
        }
        Ok(fit_surface(&SurfaceSamples::new("target", points), &spec, &spec)?.values)
    };

    let mut table = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, rep as u64));
        let reference = fit_once(REFERENCE_SAMPLE_COUNT, &mut rng)?;
        let mut row = Vec::with_capacity(sizes.len());
        for &m in sizes {
            let fitted = fit_once(m, &mut rng)?;
            row.push((&fitted - &reference).norm());
        }
        table.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_mixture_has_zero_center_distance() {
        let table = center_hausdorff_table(&[8, 16], 3, 7, 0.0).unwrap();
        for row in table {
            for d in row {
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn largest_size_matches_reference_exactly() {
        let table = center_hausdorff_table(&[10, 30], 2, 21, 0.5).unwrap();
        for row in table {
            assert_eq!(*row.last().unwrap(), 0.0);
        }
    }

    #[test]
    fn center_hausdorff_medians_shrink() {
        let result =
            consistency_experiment(ConsistencyKind::CenterHausdorff, &[20, 80], 5, 33).unwrap();
        assert!(result.medians[1] <= result.medians[0]);
        assert_eq!(result.distances.len(), 5);
        assert_eq!(result.sizes, vec![20, 80]);
    }

    #[test]
    fn sizes_are_validated() {
        assert!(matches!(
            consistency_experiment(ConsistencyKind::CenterHausdorff, &[], 2, 1),
            Err(SimError::InvalidSizes(_))
        ));
        assert!(matches!(
            consistency_experiment(ConsistencyKind::CenterHausdorff, &[50, 50], 2, 1),
            Err(SimError::InvalidSizes(_))
        ));
        assert!(matches!(
            consistency_experiment(ConsistencyKind::CoeffConvergence, &[10, 200], 2, 1),
            Err(SimError::InvalidSizes(_))
        ));
    }

    #[test]
    fn median_of_even_and_odd_lists() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
