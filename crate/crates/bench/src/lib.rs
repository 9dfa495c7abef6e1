//! Shared fixtures for the pipeline benchmarks: one scenario-1 dataset and
//! its fitted coefficient matrices at the benchmark's default size.

use nalgebra::DMatrix;

use surfclust_core::simlab::{generate_dataset, ScenarioConfig};
use surfclust_core::splines::BasisSpec;
use surfclust_core::tensorfit::{SurfaceFitter, SurfaceSamples};

pub struct Fixture {
    pub config: ScenarioConfig,
    pub surfaces: Vec<SurfaceSamples>,
    pub truth: Vec<usize>,
    pub fitter: SurfaceFitter,
    pub coefficients: Vec<DMatrix<f64>>,
    pub raw_vectors: Vec<DMatrix<f64>>,
}

/// One deterministic scenario-1 run at the given difficulty.
pub fn scenario1_fixture(c: f64, seed: u64) -> Fixture {
    let config = ScenarioConfig::scenario1(c, 1, seed);
    let (surfaces, truth) = generate_dataset(&config, seed).expect("valid scenario config");

    let grid = config.grid_coords();
    let mut xs = Vec::with_capacity(grid.len() * grid.len());
    let mut ys = Vec::with_capacity(grid.len() * grid.len());
    for &x in &grid {
        for &y in &grid {
            xs.push(x);
            ys.push(y);
        }
    }
    let spec = BasisSpec::make_clamped(
        config.degree,
        config.interior_knots,
        grid[0],
        grid[grid.len() - 1],
    )
    .expect("valid basis");
    let fitter = SurfaceFitter::new(&xs, &ys, &spec, &spec).expect("full-rank grid design");

    let coefficients = surfaces
        .iter()
        .map(|s| {
            let z: Vec<f64> = s.points.iter().map(|p| p.z).collect();
            fitter.fit(&z).expect("grid fit").values
        })
        .collect();
    let raw_vectors = surfaces
        .iter()
        .map(|s| DMatrix::from_iterator(s.points.len(), 1, s.points.iter().map(|p| p.z)))
        .collect();

    Fixture { config, surfaces, truth, fitter, coefficients, raw_vectors }
}
