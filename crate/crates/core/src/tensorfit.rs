//! Tensor-product design assembly, least-squares surface fits, and the
//! de-vectorization that turns a solution vector back into the R x L
//! coefficient matrix used as the clustering feature.
//!
//! The design row for an observation at `(x, y)` is the Kronecker product
//! `row_y ⊗ row_x`, which pairs with the column-major vectorization of the
//! coefficient matrix: entry `l * R + r` multiplies `theta[(r, l)]`. The
//! least-squares system is solved through an SVD rather than by forming
//! normal equations; singular values below `1e-10` of the largest are
//! treated as rank deficiency.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::splines::{BasisSpec, SplineError};

/// Relative singular-value cutoff below which the design is reported
/// rank-deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("least-squares system is rank-deficient: {0}")]
    RankDeficient(String),

    #[error(transparent)]
    Spline(#[from] SplineError),

    #[error("vector of length {got} cannot be devectorized into a {rows}x{cols} matrix")]
    LengthMismatch { got: usize, rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sample {index} has non-finite value {value}")]
    NonFiniteSample { index: usize, value: f64 },
}

/// One observation `z = S(x, y) + noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// All observations of a single surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSamples {
    pub id: String,
    pub points: Vec<SamplePoint>,
}

impl SurfaceSamples {
    pub fn new(id: impl Into<String>, points: Vec<SamplePoint>) -> Self {
        Self { id: id.into(), points }
    }
}

/// Observations of a d-dimensional tensor field: one coordinate vector and
/// one value per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSamples {
    pub id: String,
    pub coords: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// The fitted R x L coefficient matrix together with the bases that define
/// its rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub values: DMatrix<f64>,
    pub spec_x: BasisSpec,
    pub spec_y: BasisSpec,
}

impl CoefficientMatrix {
    /// Evaluates the fitted surface `b_x(x)^T Theta b_y(y)`.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, FitError> {
        let (sx, band_x) = self.spec_x.nonzero_band(x)?;
        let (sy, band_y) = self.spec_y.nonzero_band(y)?;
        let mut acc = 0.0;
        for (iy, by) in band_y.iter().enumerate() {
            for (ix, bx) in band_x.iter().enumerate() {
                acc += bx * by * self.values[(sx + ix, sy + iy)];
            }
        }
        Ok(acc)
    }
}

/// Coefficients of a d-way tensor fit, stored first-index-fastest so the
/// d = 2 case coincides with the column-major matrix layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorCoefficients {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl TensorCoefficients {
    pub fn get(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.shape.len());
        let mut flat = 0;
        let mut stride = 1;
        for (i, (&idx, &dim)) in index.iter().zip(&self.shape).enumerate() {
            assert!(idx < dim, "index {} out of bounds in axis {}", idx, i);
            flat += idx * stride;
            stride *= dim;
        }
        self.values[flat]
    }

    /// Reinterprets a 2-way coefficient array as a matrix.
    pub fn as_matrix(&self) -> Option<DMatrix<f64>> {
        if self.shape.len() != 2 {
            return None;
        }
        Some(DMatrix::from_vec(self.shape[0], self.shape[1], self.values.clone()))
    }
}

/// Kronecker product `row_y ⊗ row_x`: entry `l * R + r` equals
/// `row_y[l] * row_x[r]`.
pub fn design_row(row_x: &[f64], row_y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(row_x.len() * row_y.len());
    for by in row_y {
        for bx in row_x {
            out.push(by * bx);
        }
    }
    out
}

/// Column-major de-vectorization: entry `(r, l)` of the result is
/// `v[l * rows + r]`, the inverse of [`vec_matrix`].
pub fn devec(v: &[f64], rows: usize, cols: usize) -> Result<DMatrix<f64>, FitError> {
    if v.len() != rows * cols {
        return Err(FitError::LengthMismatch { got: v.len(), rows, cols });
    }
    Ok(DMatrix::from_column_slice(rows, cols, v))
}

/// Column-major vectorization, the inverse of [`devec`].
pub fn vec_matrix(m: &DMatrix<f64>) -> Vec<f64> {
    m.as_slice().to_vec()
}

/// SVD-backed least-squares solver for a fixed design matrix. Fitting many
/// surfaces observed on one shared grid reuses the factorization.
pub struct SurfaceFitter {
    spec_x: BasisSpec,
    spec_y: BasisSpec,
    solver: LeastSquares,
    samples: usize,
}

impl SurfaceFitter {
    /// Builds and factorizes the design matrix for observations at
    /// `(xs[j], ys[j])`.
    pub fn new(
        xs: &[f64],
        ys: &[f64],
        spec_x: &BasisSpec,
        spec_y: &BasisSpec,
    ) -> Result<Self, FitError> {
        if xs.len() != ys.len() {
            return Err(FitError::DimensionMismatch(format!(
                "coordinate arrays differ in length: {} vs {}",
                xs.len(),
                ys.len()
            )));
        }
        let m = xs.len();
        let r_count = spec_x.basis_count();
        let l_count = spec_y.basis_count();
        let params = r_count * l_count;
        if m < params {
            return Err(FitError::RankDeficient(format!(
                "{} samples cannot identify {} coefficients",
                m, params
            )));
        }
        let mut design = DMatrix::zeros(m, params);
        for j in 0..m {
            let (sx, band_x) = spec_x.nonzero_band(xs[j])?;
            let (sy, band_y) = spec_y.nonzero_band(ys[j])?;
            for (iy, by) in band_y.iter().enumerate() {
                for (ix, bx) in band_x.iter().enumerate() {
                    design[(j, (sy + iy) * r_count + (sx + ix))] = by * bx;
                }
            }
        }
        let solver = LeastSquares::new(design)?;
        Ok(Self {
            spec_x: spec_x.clone(),
            spec_y: spec_y.clone(),
            solver,
            samples: m,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.samples
    }

    /// Solves for the coefficient matrix of one surface's `z` values.
    pub fn fit(&self, z: &[f64]) -> Result<CoefficientMatrix, FitError> {
        if z.len() != self.samples {
            return Err(FitError::DimensionMismatch(format!(
                "expected {} observations, got {}",
                self.samples,
                z.len()
            )));
        }
        if let Some(idx) = z.iter().position(|v| !v.is_finite()) {
            return Err(FitError::NonFiniteSample { index: idx, value: z[idx] });
        }
        let solution = self.solver.solve(&DVector::from_column_slice(z));
        let values = devec(
            solution.as_slice(),
            self.spec_x.basis_count(),
            self.spec_y.basis_count(),
        )?;
        Ok(CoefficientMatrix {
            values,
            spec_x: self.spec_x.clone(),
            spec_y: self.spec_y.clone(),
        })
    }
}

/// Fits one surface by least squares and de-vectorizes the solution.
pub fn fit_surface(
    samples: &SurfaceSamples,
    spec_x: &BasisSpec,
    spec_y: &BasisSpec,
) -> Result<CoefficientMatrix, FitError> {
    let xs: Vec<f64> = samples.points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = samples.points.iter().map(|p| p.y).collect();
    let zs: Vec<f64> = samples.points.iter().map(|p| p.z).collect();
    SurfaceFitter::new(&xs, &ys, spec_x, spec_y)?.fit(&zs)
}

/// Evaluates a fitted surface at `(x, y)`.
pub fn eval_surface(theta: &CoefficientMatrix, x: f64, y: f64) -> Result<f64, FitError> {
    theta.eval(x, y)
}

/// d-way generalization: design rows are `row_d ⊗ ... ⊗ row_1` and the
/// solution is arranged first-index-fastest.
pub fn fit_tensor(
    samples: &TensorSamples,
    specs: &[BasisSpec],
) -> Result<TensorCoefficients, FitError> {
    let d = specs.len();
    if d < 2 {
        return Err(FitError::DimensionMismatch(
            "tensor fit requires at least two axes".into(),
        ));
    }
    let m = samples.values.len();
    if samples.coords.len() != m {
        return Err(FitError::DimensionMismatch(format!(
            "{} coordinate vectors for {} values",
            samples.coords.len(),
            m
        )));
    }
    let shape: Vec<usize> = specs.iter().map(|s| s.basis_count()).collect();
    let params: usize = shape.iter().product();
    if m < params {
        return Err(FitError::RankDeficient(format!(
            "{} samples cannot identify {} coefficients",
            m, params
        )));
    }
    let mut strides = vec![1usize; d];
    for k in 1..d {
        strides[k] = strides[k - 1] * shape[k - 1];
    }

    let mut design = DMatrix::zeros(m, params);
    let mut bands: Vec<(usize, Vec<f64>)> = Vec::with_capacity(d);
    for (j, coord) in samples.coords.iter().enumerate() {
        if coord.len() != d {
            return Err(FitError::DimensionMismatch(format!(
                "sample {} has {} coordinates, expected {}",
                j,
                coord.len(),
                d
            )));
        }
        bands.clear();
        for (spec, &x) in specs.iter().zip(coord) {
            bands.push(spec.nonzero_band(x)?);
        }
        let supports: Vec<usize> = bands.iter().map(|(_, b)| b.len()).collect();
        let mut index = vec![0usize; d];
        loop {
            let mut product = 1.0;
            let mut col = 0;
            for k in 0..d {
                product *= bands[k].1[index[k]];
                col += (bands[k].0 + index[k]) * strides[k];
            }
            if product != 0.0 {
                design[(j, col)] = product;
            }
            let mut carry = true;
            for k in 0..d {
                index[k] += 1;
                if index[k] < supports[k] {
                    carry = false;
                    break;
                }
                index[k] = 0;
            }
            if carry {
                break;
            }
        }
    }

    if let Some(idx) = samples.values.iter().position(|v| !v.is_finite()) {
        return Err(FitError::NonFiniteSample { index: idx, value: samples.values[idx] });
    }
    let solver = LeastSquares::new(design)?;
    let solution = solver.solve(&DVector::from_column_slice(&samples.values));
    Ok(TensorCoefficients {
        shape,
        values: solution.as_slice().to_vec(),
    })
}

struct LeastSquares {
    svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    eps: f64,
}

impl LeastSquares {
    fn new(design: DMatrix<f64>) -> Result<Self, FitError> {
        let svd = design.svd(true, true);
        let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let s_min = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if s_max == 0.0 || s_min < RANK_TOLERANCE * s_max {
            return Err(FitError::RankDeficient(format!(
                "singular values span [{:.3e}, {:.3e}], below relative tolerance {:.1e}",
                s_min, s_max, RANK_TOLERANCE
            )));
        }
        Ok(Self { svd, eps: RANK_TOLERANCE * s_max })
    }

    fn solve(&self, z: &DVector<f64>) -> DVector<f64> {
        self.svd
            .solve(z, self.eps)
            .expect("SVD factors were requested at construction")
            .column(0)
            .into_owned()
    }
}
