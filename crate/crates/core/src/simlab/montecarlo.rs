//! The Monte Carlo harness comparing coefficient-space clustering (the
//! proposed route) against raw-vector clustering (the benchmark), scored by
//! permutation-matched mis-specification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::{derive_seed, generate_dataset, benchmark_raw_kmeans, ScenarioConfig, SimError};
use crate::evalmetrics::{aggregate, misspecification, RunErrors};
use crate::matkmeans::{cluster_with_selected_init, DEFAULT_MAX_ITER};
use crate::splines::BasisSpec;
use crate::tensorfit::SurfaceFitter;

/// Aggregates for one method over the successful runs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub run_indices: Vec<usize>,
    pub per_run_errors: Vec<usize>,
    pub nu: f64,
    pub phi: f64,
    pub mean_misclustered: f64,
}

impl MethodSummary {
    fn from_runs(method: &str, runs: &[(usize, usize)], surfaces: usize) -> Result<Self, SimError> {
        let per_run: Vec<usize> = runs.iter().map(|&(_, e)| e).collect();
        let errors = RunErrors::new(per_run.clone(), surfaces)?;
        let (nu, phi) = aggregate(&errors);
        Ok(Self {
            method: method.to_string(),
            run_indices: runs.iter().map(|&(r, _)| r).collect(),
            per_run_errors: per_run,
            nu,
            phi,
            mean_misclustered: nu * phi,
        })
    }
}

/// A run that could not be scored, kept out of the aggregates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FailedRun {
    pub run: usize,
    pub stage: String,
    pub message: String,
}

/// Wall-clock accounting; excluded from reproducibility comparisons.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct McTiming {
    pub total_seconds: f64,
}

/// Everything one Monte Carlo comparison produced.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct McReport {
    pub config: ScenarioConfig,
    pub surfaces_per_run: usize,
    pub proposed: MethodSummary,
    pub benchmark: MethodSummary,
    pub failed_runs: Vec<FailedRun>,
    pub timing: McTiming,
}

struct RunScore {
    run: usize,
    proposed_errors: usize,
    benchmark_errors: usize,
}

/// Runs the full comparison: for every run, generate data, fit every
/// surface on the shared grid, cluster coefficient matrices and raw
/// vectors with the same init machinery, and score both against the truth.
/// Failed runs are recorded and skipped. Deterministic given the config.
pub fn run_monte_carlo(config: &ScenarioConfig) -> Result<McReport, SimError> {
    config.validate()?;
    let start = Instant::now();

    let grid = config.grid_coords();
    let mut xs = Vec::with_capacity(grid.len() * grid.len());
    let mut ys = Vec::with_capacity(grid.len() * grid.len());
    for &x in &grid {
        for &y in &grid {
            xs.push(x);
            ys.push(y);
        }
    }
    // Fitting domain per axis: the range of the observed coordinates.
    let lo = grid.first().copied().expect("validated grid");
    let hi = grid.last().copied().expect("validated grid");
    let spec = BasisSpec::make_clamped(config.degree, config.interior_knots, lo, hi)?;
    let fitter = SurfaceFitter::new(&xs, &ys, &spec, &spec)?;

    let k = config.cluster_count();
    let outcomes: Vec<Result<RunScore, FailedRun>> = (0..config.runs)
        .into_par_iter()
        .map(|run| score_one_run(config, &fitter, k, run))
        .collect();

    let mut proposed_runs = Vec::new();
    let mut benchmark_runs = Vec::new();
    let mut failed_runs = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(score) => {
                proposed_runs.push((score.run, score.proposed_errors));
                benchmark_runs.push((score.run, score.benchmark_errors));
            }
            Err(failure) => failed_runs.push(failure),
        }
    }
    if proposed_runs.is_empty() {
        return Err(SimError::InvalidConfig(format!(
            "all {} runs failed; first failure at run {}: {}",
            config.runs, failed_runs[0].run, failed_runs[0].message
        )));
    }

    let surfaces = config.surfaces_per_run();
    Ok(McReport {
        config: config.clone(),
        surfaces_per_run: surfaces,
        proposed: MethodSummary::from_runs("proposed", &proposed_runs, surfaces)?,
        benchmark: MethodSummary::from_runs("benchmark", &benchmark_runs, surfaces)?,
        failed_runs,
        timing: McTiming { total_seconds: start.elapsed().as_secs_f64() },
    })
}

fn score_one_run(
    config: &ScenarioConfig,
    fitter: &SurfaceFitter,
    k: usize,
    run: usize,
) -> Result<RunScore, FailedRun> {
    let fail = |stage: &str, message: String| FailedRun {
        run,
        stage: stage.to_string(),
        message,
    };
    let run_seed = derive_seed(config.seed, run as u64);
    let (surfaces, truth) =
        generate_dataset(config, run_seed).map_err(|e| fail("generate", e.to_string()))?;

    let mut thetas = Vec::with_capacity(surfaces.len());
    for surface in &surfaces {
        let z: Vec<f64> = surface.points.iter().map(|p| p.z).collect();
        let coeff = fitter
            .fit(&z)
            .map_err(|e| fail("fit", format!("surface {}: {}", surface.id, e)))?;
        thetas.push(coeff.values);
    }

    let (proposed_model, _) =
        cluster_with_selected_init(&thetas, k, derive_seed(run_seed, 1), DEFAULT_MAX_ITER)
            .map_err(|e| fail("cluster-proposed", e.to_string()))?;
    let benchmark_labels = benchmark_raw_kmeans(&surfaces, k, derive_seed(run_seed, 2))
        .map_err(|e| fail("cluster-benchmark", e.to_string()))?;

    let proposed_errors = misspecification(&proposed_model.labels, &truth, k)
        .map_err(|e| fail("score", e.to_string()))?;
    let benchmark_errors = misspecification(&benchmark_labels, &truth, k)
        .map_err(|e| fail("score", e.to_string()))?;

    Ok(RunScore { run, proposed_errors, benchmark_errors })
}

/// Pretty-printed JSON document for a report.
pub fn report_json(report: &McReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Flat plot table: `method,c,run,errors`, one row per scored run per
/// method.
pub fn report_plot_csv(report: &McReport) -> String {
    let mut out = String::from("method,c,run,errors\n");
    for summary in [&report.proposed, &report.benchmark] {
        for (&run, &errors) in summary.run_indices.iter().zip(&summary.per_run_errors) {
            out.push_str(&format!("{},{},{},{}\n", summary.method, report.config.c, run, errors));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalmetrics::{aggregate, RunErrors};

    fn tiny_config() -> ScenarioConfig {
        let mut config = ScenarioConfig::scenario1(0.2, 3, 424242);
        // Small grid keeps the unit test quick; 8 points per axis still
        // identify the 6x6 coefficient space.
        config.grid_points_per_axis = 8;
        config
    }

    #[test]
    fn report_is_deterministic_modulo_timing() {
        let config = tiny_config();
        let mut a = run_monte_carlo(&config).unwrap();
        let mut b = run_monte_carlo(&config).unwrap();
        a.timing = McTiming { total_seconds: 0.0 };
        b.timing = McTiming { total_seconds: 0.0 };
        assert_eq!(a, b);
        assert_eq!(report_json(&a), report_json(&b));
    }

    #[test]
    fn aggregates_recompute_from_per_run_errors() {
        let report = run_monte_carlo(&tiny_config()).unwrap();
        for summary in [&report.proposed, &report.benchmark] {
            let errors =
                RunErrors::new(summary.per_run_errors.clone(), report.surfaces_per_run).unwrap();
            let (nu, phi) = aggregate(&errors);
            assert_eq!(summary.nu, nu);
            assert_eq!(summary.phi, phi);
            assert_eq!(summary.mean_misclustered, nu * phi);
        }
    }

    #[test]
    fn noise_free_well_separated_runs_are_error_free() {
        let mut config = tiny_config();
        config.noise_sd = vec![0.0, 0.0];
        config.runs = 2;
        let report = run_monte_carlo(&config).unwrap();
        assert!(report.proposed.per_run_errors.iter().all(|&e| e == 0));
        assert!(report.benchmark.per_run_errors.iter().all(|&e| e == 0));
        assert_eq!(report.proposed.mean_misclustered, 0.0);
        assert!(report.failed_runs.is_empty());
    }

    #[test]
    fn plot_csv_has_row_per_method_per_run() {
        let report = run_monte_carlo(&tiny_config()).unwrap();
        let csv = report_plot_csv(&report);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "method,c,run,errors");
        assert_eq!(lines.len(), 1 + 2 * report.proposed.per_run_errors.len());
        assert!(lines[1].starts_with("proposed,0.2,0,"));
        assert!(lines[4].starts_with("benchmark,0.2,0,"));
    }
}
