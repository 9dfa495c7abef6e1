//! Surface clustering through tensor-product B-spline coefficients.
//!
//! The pipeline: fit each noisily observed surface with a tensor product of
//! B-spline bases by least squares ([`tensorfit`]), then cluster the fitted
//! coefficient matrices with k-means under the Frobenius norm
//! ([`matkmeans`]). [`evalmetrics`] scores clusterings against known truth,
//! and [`simlab`] houses the Monte Carlo harness comparing the coefficient
//! route against k-means on raw observation vectors.

pub mod evalmetrics;
pub mod matkmeans;
pub mod simlab;
pub mod splines;
pub mod tensorfit;

pub use evalmetrics::{aggregate, hausdorff, misspecification, MetricError, RunErrors};
pub use matkmeans::{
    cluster_with_selected_init, frobenius_distance, init_candidates, kmeans, select_init,
    ClusterError, ClusterModel, InitChoice, InitMethod,
};
pub use simlab::{
    consistency_experiment, run_monte_carlo, ConsistencyKind, McReport, ScenarioConfig, SimError,
};
pub use splines::{make_clamped_spec, BasisSpec, SplineError};
pub use tensorfit::{
    design_row, devec, eval_surface, fit_surface, fit_tensor, CoefficientMatrix, FitError,
    SamplePoint, SurfaceFitter, SurfaceSamples, TensorCoefficients, TensorSamples,
};
