//! The four subcommands: fit surfaces from a CSV, cluster a coefficient
//! file, run the Monte Carlo comparison, and score predicted labels against
//! truth.

use std::path::Path;

use serde_json::json;

use surfclust_core::evalmetrics::{aggregate, misspecification, RunErrors};
use surfclust_core::matkmeans::cluster_with_selected_init;
use surfclust_core::simlab::{report_json, report_plot_csv, run_monte_carlo, ScenarioConfig};
use surfclust_core::splines::BasisSpec;
use surfclust_core::tensorfit::{fit_surface, FitError};

use crate::io::{
    atomic_write, read_coefficient_file, read_label_table, read_surface_table, to_pretty_json,
    CenterBlock, ClusterReportFile, CoefficientBlock, CoefficientFile, FitFailure, LabelRow,
    RunManifest, ARTIFACT_VERSION,
};
use crate::CliError;

pub fn cmd_fit(
    input: &Path,
    output: &Path,
    degree: usize,
    interior_knots: usize,
) -> Result<(), CliError> {
    let surfaces = read_surface_table(input)?;

    // One shared basis pair for the whole table: per-axis domain is the
    // range of the observed coordinates.
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in &surfaces {
        for p in &s.points {
            x_lo = x_lo.min(p.x);
            x_hi = x_hi.max(p.x);
            y_lo = y_lo.min(p.y);
            y_hi = y_hi.max(p.y);
        }
    }
    let spec_x = BasisSpec::make_clamped(degree, interior_knots, x_lo, x_hi)
        .map_err(|e| CliError::Data(format!("x axis: {}", e)))?;
    let spec_y = BasisSpec::make_clamped(degree, interior_knots, y_lo, y_hi)
        .map_err(|e| CliError::Data(format!("y axis: {}", e)))?;

    let mut blocks = Vec::new();
    let mut failures = Vec::new();
    for surface in &surfaces {
        match fit_surface(surface, &spec_x, &spec_y) {
            Ok(coeff) => blocks.push(CoefficientBlock {
                id: surface.id.clone(),
                rows: coeff.values.nrows(),
                cols: coeff.values.ncols(),
                values: coeff.values.as_slice().to_vec(),
            }),
            Err(err @ (FitError::RankDeficient(_) | FitError::NonFiniteSample { .. })) => {
                eprintln!("warning: surface {}: {}", surface.id, err);
                failures.push(FitFailure { id: surface.id.clone(), error: err.to_string() });
            }
            Err(other) => return Err(CliError::from(other)),
        }
    }
    if blocks.is_empty() {
        return Err(CliError::Numerical(format!(
            "every surface failed to fit; first failure: {}",
            failures[0].error
        )));
    }

    let file = CoefficientFile {
        artifact_version: ARTIFACT_VERSION.to_string(),
        degree_x: spec_x.degree(),
        knots_x: spec_x.knots().to_vec(),
        degree_y: spec_y.degree(),
        knots_y: spec_y.knots().to_vec(),
        surfaces: blocks,
        failures,
    };
    atomic_write(output, &to_pretty_json(&file)?)?;
    RunManifest::new(
        "fit",
        json!({
            "input": input.display().to_string(),
            "output": output.display().to_string(),
            "degree": degree,
            "interior_knots": interior_knots,
        }),
        &[input],
        &[output],
    )
    .write_next_to(output)?;
    println!(
        "fit {} surfaces ({} failed) into {}x{} coefficient blocks -> {}",
        file.surfaces.len(),
        file.failures.len(),
        spec_x.basis_count(),
        spec_y.basis_count(),
        output.display()
    );
    Ok(())
}

pub fn cmd_cluster(
    input: &Path,
    k: usize,
    seed: u64,
    output: &Path,
    labels_out: Option<&Path>,
    max_iter: usize,
) -> Result<(), CliError> {
    let file = read_coefficient_file(input)?;
    let named = file.matrices()?;
    if k == 0 || k > named.len() {
        return Err(CliError::Data(format!(
            "K = {} is out of range for {} surfaces",
            k,
            named.len()
        )));
    }
    let matrices: Vec<_> = named.iter().map(|(_, m)| m.clone()).collect();
    let (model, init) = cluster_with_selected_init(&matrices, k, seed, max_iter)?;

    let labels: Vec<LabelRow> = named
        .iter()
        .zip(&model.labels)
        .map(|((id, _), &label)| LabelRow { surface_id: id.clone(), label: label + 1 })
        .collect();
    let report = ClusterReportFile {
        artifact_version: ARTIFACT_VERSION.to_string(),
        k,
        seed,
        init_method: init.method.label().to_string(),
        iterations: model.iterations,
        converged: model.converged,
        objective: model.objective,
        labels,
        centers: model
            .centers
            .iter()
            .map(|c| CenterBlock { rows: c.nrows(), cols: c.ncols(), values: c.as_slice().to_vec() })
            .collect(),
    };
    atomic_write(output, &to_pretty_json(&report)?)?;
    let mut outputs: Vec<&Path> = vec![output];
    if let Some(labels_path) = labels_out {
        atomic_write(labels_path, &crate::io::label_table_to_csv(&report.labels))?;
        outputs.push(labels_path);
    }
    RunManifest::new(
        "cluster",
        json!({
            "input": input.display().to_string(),
            "output": output.display().to_string(),
            "labels_out": labels_out.map(|p| p.display().to_string()),
            "k": k,
            "seed": seed,
            "max_iter": max_iter,
        }),
        &[input],
        &outputs,
    )
    .write_next_to(output)?;
    println!(
        "clustered {} surfaces into K={} (init {}, {} iterations, objective {:.6e}) -> {}",
        report.labels.len(),
        k,
        report.init_method,
        report.iterations,
        report.objective,
        output.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    scenario: u8,
    c: f64,
    runs: usize,
    seed: u64,
    output_dir: &Path,
    degree: usize,
    interior_knots: usize,
) -> Result<(), CliError> {
    let mut config = match scenario {
        1 => ScenarioConfig::scenario1(c, runs, seed),
        2 => ScenarioConfig::scenario2(c, runs, seed),
        other => return Err(CliError::Usage(format!("unknown scenario {}", other))),
    };
    config.degree = degree;
    config.interior_knots = interior_knots;
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let report = run_monte_carlo(&config)?;

    let report_path = output_dir.join("report.json");
    let csv_path = output_dir.join("plot.csv");
    let manifest_path = output_dir.join("manifest.json");
    atomic_write(&report_path, &report_json(&report))?;
    atomic_write(&csv_path, &report_plot_csv(&report))?;
    RunManifest::new(
        "simulate",
        json!({
            "scenario": scenario,
            "c": c,
            "runs": runs,
            "seed": seed,
            "degree": degree,
            "interior_knots": interior_knots,
            "output": output_dir.display().to_string(),
        }),
        &[],
        &[&report_path, &csv_path],
    )
    .write_to(&manifest_path)?;
    println!(
        "scenario {} c={} B={}: proposed mean misclustered {:.3}, benchmark {:.3} -> {}",
        scenario,
        c,
        runs,
        report.proposed.mean_misclustered,
        report.benchmark.mean_misclustered,
        output_dir.display()
    );
    Ok(())
}

pub fn cmd_evaluate(pred: &Path, truth: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let pred_rows = read_label_table(pred)?;
    let truth_rows = read_label_table(truth)?;
    if pred_rows.len() != truth_rows.len() {
        return Err(CliError::Data(format!(
            "length mismatch: {} predicted labels vs {} truth labels",
            pred_rows.len(),
            truth_rows.len()
        )));
    }
    for (i, ((pid, _), (tid, _))) in pred_rows.iter().zip(&truth_rows).enumerate() {
        if pid != tid {
            return Err(CliError::Data(format!(
                "surface_id mismatch at row {}: {:?} vs {:?}",
                i + 1,
                pid,
                tid
            )));
        }
    }
    let k = pred_rows
        .iter()
        .chain(&truth_rows)
        .map(|&(_, l)| l)
        .max()
        .expect("tables are nonempty");
    let pred_labels: Vec<usize> = pred_rows.iter().map(|&(_, l)| l - 1).collect();
    let truth_labels: Vec<usize> = truth_rows.iter().map(|&(_, l)| l - 1).collect();
    let errors = misspecification(&pred_labels, &truth_labels, k)?;
    let n = pred_labels.len();
    let (nu, phi) = aggregate(&RunErrors::new(vec![errors], n)?);

    println!("misspecification={} nu={} phi={}", errors, nu, phi);
    if let Some(path) = output {
        let doc = json!({
            "artifact_version": ARTIFACT_VERSION,
            "surfaces": n,
            "k": k,
            "misspecification": errors,
            "nu": nu,
            "phi": phi,
        });
        atomic_write(path, &format!("{:#}\n", doc))?;
        RunManifest::new(
            "evaluate",
            json!({
                "pred": pred.display().to_string(),
                "truth": truth.display().to_string(),
                "output": path.display().to_string(),
            }),
            &[pred, truth],
            &[path],
        )
        .write_next_to(path)?;
    }
    Ok(())
}
