//! Simulation laboratory: scenario generators, the Monte Carlo comparison
//! of coefficient-space clustering against raw-vector clustering, and the
//! empirical consistency experiments.
//!
//! Everything here is driven by explicit seeds. Each Monte Carlo run owns a
//! sub-seed derived by fixed arithmetic from `(master seed, run index)`, so
//! serial and parallel execution produce identical reports.

mod consistency;
mod montecarlo;
mod scenarios;

pub use consistency::{consistency_experiment, ConsistencyKind, ConsistencyTable};
pub use montecarlo::{
    report_json, report_plot_csv, run_monte_carlo, FailedRun, McReport, McTiming, MethodSummary,
};
pub use scenarios::{mixture_density, scenario_center, MixtureComponent};

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matkmeans::{cluster_with_selected_init, ClusterError, DEFAULT_MAX_ITER};
use crate::evalmetrics::MetricError;
use crate::tensorfit::{FitError, SamplePoint, SurfaceSamples};

/// Interior knots per axis used by the simulation defaults: with cubic
/// splines this spans six basis functions per axis, the reading of the
/// study's "six knots" that reproduces its comparison. Pass a different
/// value through `ScenarioConfig` to explore other spaces.
pub const DEFAULT_INTERIOR_KNOTS: usize = 2;

/// Default spline degree.
pub const DEFAULT_DEGREE: usize = 3;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no center surface defined for scenario {scenario}, cluster {cluster}")]
    UnknownScenario { scenario: u8, cluster: usize },

    #[error("covariance matrix is singular (determinant {det})")]
    SingularCovariance { det: f64 },

    #[error("surfaces do not share a common grid: {0}")]
    GridMismatch(String),

    #[error("invalid sizes list: {0}")]
    InvalidSizes(String),

    #[error(transparent)]
    Spline(#[from] crate::splines::SplineError),

    #[error(transparent)]
    Fit(#[from] FitError),

    #[error(transparent)]
    Cluster(#[from] ClusterError),

    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Deterministic sub-seed from a master seed and a stream index
/// (splitmix64 finalizer).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Full description of one Monte Carlo comparison.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: u8,
    pub c: f64,
    pub n_per_cluster: Vec<usize>,
    pub grid_points_per_axis: usize,
    pub domain: (f64, f64),
    pub noise_sd: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    pub degree: usize,
    pub interior_knots: usize,
}

impl ScenarioConfig {
    /// Two clusters of 30 surfaces with noise sd 0.015 and 0.01.
    pub fn scenario1(c: f64, runs: usize, seed: u64) -> Self {
        Self {
            scenario: 1,
            c,
            n_per_cluster: vec![30, 30],
            grid_points_per_axis: 20,
            domain: (-5.0, 5.0),
            noise_sd: vec![0.015, 0.01],
            runs,
            seed,
            degree: DEFAULT_DEGREE,
            interior_knots: DEFAULT_INTERIOR_KNOTS,
        }
    }

    /// Three clusters of 20 surfaces, noise sd 0.015 throughout.
    pub fn scenario2(c: f64, runs: usize, seed: u64) -> Self {
        Self {
            scenario: 2,
            c,
            n_per_cluster: vec![20, 20, 20],
            grid_points_per_axis: 20,
            domain: (-5.0, 5.0),
            noise_sd: vec![0.015, 0.015, 0.015],
            runs,
            seed,
            degree: DEFAULT_DEGREE,
            interior_knots: DEFAULT_INTERIOR_KNOTS,
        }
    }

    pub fn cluster_count(&self) -> usize {
        self.n_per_cluster.len()
    }

    pub fn surfaces_per_run(&self) -> usize {
        self.n_per_cluster.iter().sum()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let expected_clusters = match self.scenario {
            1 => 2,
            2 => 3,
            s => {
                return Err(SimError::InvalidConfig(format!("unknown scenario {s}")));
            }
        };
        if self.n_per_cluster.len() != expected_clusters {
            return Err(SimError::InvalidConfig(format!(
                "scenario {} has {} clusters, got {} counts",
                self.scenario,
                expected_clusters,
                self.n_per_cluster.len()
            )));
        }
        if self.noise_sd.len() != expected_clusters {
            return Err(SimError::InvalidConfig(format!(
                "expected {} noise levels, got {}",
                expected_clusters,
                self.noise_sd.len()
            )));
        }
        if self.n_per_cluster.iter().any(|&n| n == 0) {
            return Err(SimError::InvalidConfig("empty cluster requested".into()));
        }
        if self.noise_sd.iter().any(|&s| s < 0.0 || !s.is_finite()) {
            return Err(SimError::InvalidConfig("noise sd must be nonnegative".into()));
        }
        if !(self.c > 0.0) {
            return Err(SimError::InvalidConfig(format!("c must be positive, got {}", self.c)));
        }
        if self.runs == 0 {
            return Err(SimError::InvalidConfig("need at least one run".into()));
        }
        if !(self.domain.0 < self.domain.1) {
            return Err(SimError::InvalidConfig("domain bounds out of order".into()));
        }
        // Identifiability: one axis must carry at least as many grid points
        // as basis functions.
        let basis = self.interior_knots + self.degree + 1;
        if self.grid_points_per_axis < basis {
            return Err(SimError::InvalidConfig(format!(
                "{} grid points per axis cannot identify {} basis functions",
                self.grid_points_per_axis, basis
            )));
        }
        Ok(())
    }

    /// Per-axis grid coordinates `lo + j (hi - lo) / g`, `j = 1..=g`: the
    /// left endpoint is excluded, the right endpoint included.
    pub fn grid_coords(&self) -> Vec<f64> {
        let (lo, hi) = self.domain;
        let g = self.grid_points_per_axis;
        (1..=g).map(|j| lo + (hi - lo) * j as f64 / g as f64).collect()
    }
}

/// Generates one run's surfaces: every cluster's center surface evaluated
/// on the shared grid plus i.i.d. Gaussian noise, with 0-based truth
/// labels. Points are ordered x-outer, y-inner; the benchmark vectorizes
/// raw data in exactly this order.
pub fn generate_dataset(
    config: &ScenarioConfig,
    run_seed: u64,
) -> Result<(Vec<SurfaceSamples>, Vec<usize>), SimError> {
    config.validate()?;
    let grid = config.grid_coords();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, 0));

    let mut surfaces = Vec::with_capacity(config.surfaces_per_run());
    let mut truth = Vec::with_capacity(config.surfaces_per_run());
    for (cluster_idx, (&count, &sd)) in config
        .n_per_cluster
        .iter()
        .zip(&config.noise_sd)
        .enumerate()
    {
        let components = scenario_center(config.scenario, cluster_idx + 1, config.c)?;
        let mut base = Vec::with_capacity(grid.len() * grid.len());
        for &x in &grid {
            for &y in &grid {
                base.push((x, y, mixture_density(&components, x, y)?));
            }
        }
        let noise = if sd > 0.0 {
            Some(Normal::new(0.0, sd).expect("validated sd"))
        } else {
            None
        };
        for s in 0..count {
            let points = base
                .iter()
                .map(|&(x, y, z)| {
                    let eps = noise.map_or(0.0, |n| n.sample(&mut rng));
                    SamplePoint { x, y, z: z + eps }
                })
                .collect();
            surfaces.push(SurfaceSamples::new(
                format!("c{}-s{:02}", cluster_idx + 1, s + 1),
                points,
            ));
            truth.push(cluster_idx);
        }
    }
    Ok((surfaces, truth))
}

/// The benchmark: the same k-means engine and 53-candidate init selection
/// applied to each surface's raw observation vector (an m x 1 matrix).
/// All surfaces must share one grid.
pub fn benchmark_raw_kmeans(
    datasets: &[SurfaceSamples],
    k: usize,
    seed: u64,
) -> Result<Vec<usize>, SimError> {
    let first = datasets
        .first()
        .ok_or_else(|| SimError::InvalidConfig("no surfaces supplied".into()))?;
    for s in datasets.iter().skip(1) {
        if s.points.len() != first.points.len() {
            return Err(SimError::GridMismatch(format!(
                "surface {} has {} points, surface {} has {}",
                s.id,
                s.points.len(),
                first.id,
                first.points.len()
            )));
        }
        for (a, b) in s.points.iter().zip(&first.points) {
            if a.x != b.x || a.y != b.y {
                return Err(SimError::GridMismatch(format!(
                    "surface {} is observed at ({}, {}) where surface {} has ({}, {})",
                    s.id, a.x, a.y, first.id, b.x, b.y
                )));
            }
        }
    }
    let vectors: Vec<DMatrix<f64>> = datasets
        .iter()
        .map(|s| DMatrix::from_iterator(s.points.len(), 1, s.points.iter().map(|p| p.z)))
        .collect();
    let (model, _) = cluster_with_selected_init(&vectors, k, seed, DEFAULT_MAX_ITER)?;
    Ok(model.labels)
}

/// Per-entry Gaussian perturbation of a base matrix, used by the
/// consistency experiments.
pub(crate) fn perturbed_matrix(
    base: &DMatrix<f64>,
    sd: f64,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    if sd == 0.0 {
        return base.clone();
    }
    let normal = Normal::new(0.0, sd).expect("nonnegative sd");
    DMatrix::from_fn(base.nrows(), base.ncols(), |r, c| base[(r, c)] + normal.sample(rng))
}

pub(crate) fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
