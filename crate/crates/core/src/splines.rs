//! Clamped B-spline bases: knot construction and Cox-de Boor evaluation.
//!
//! A [`BasisSpec`] fixes one axis of the tensor-product space: a degree and a
//! non-decreasing knot vector whose boundary knots are repeated `degree + 1`
//! times. Evaluation follows the right-closed convention: at the upper domain
//! endpoint the last basis function equals one, so design rows never vanish
//! on the boundary of a grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SplineError {
    #[error("invalid domain: lo ({lo}) must be strictly less than hi ({hi})")]
    InvalidDomain { lo: f64, hi: f64 },

    #[error("knot configuration yields an empty basis")]
    EmptyBasis,

    #[error("x = {x} lies outside the basis domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("basis index {index} out of range for basis of size {count}")]
    BadIndex { index: usize, count: usize },

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
}

/// Degree plus clamped knot vector for one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    degree: usize,
    knots: Vec<f64>,
}

impl BasisSpec {
    /// Builds a clamped knot vector with `interior_count` equally spaced
    /// interior knots strictly inside `(lo, hi)` and boundary knots repeated
    /// `degree + 1` times. The resulting basis has
    /// `interior_count + degree + 1` functions.
    pub fn make_clamped(
        degree: usize,
        interior_count: usize,
        lo: f64,
        hi: f64,
    ) -> Result<Self, SplineError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(SplineError::InvalidDomain { lo, hi });
        }
        let mut knots = Vec::with_capacity(2 * (degree + 1) + interior_count);
        knots.extend(std::iter::repeat(lo).take(degree + 1));
        let steps = (interior_count + 1) as f64;
        for k in 1..=interior_count {
            knots.push(lo + (hi - lo) * k as f64 / steps);
        }
        knots.extend(std::iter::repeat(hi).take(degree + 1));
        Self::from_knots(degree, knots)
    }

    /// Validates an explicit knot vector against the clamped-basis invariants.
    pub fn from_knots(degree: usize, knots: Vec<f64>) -> Result<Self, SplineError> {
        if knots.len() < degree + 2 {
            return Err(SplineError::EmptyBasis);
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(SplineError::InvalidKnots("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(SplineError::InvalidKnots("knots must be non-decreasing".into()));
        }
        let lo = knots[0];
        let hi = knots[knots.len() - 1];
        if !(lo < hi) {
            return Err(SplineError::InvalidDomain { lo, hi });
        }
        if knots[degree] != lo || knots[knots.len() - 1 - degree] != hi {
            return Err(SplineError::InvalidKnots(format!(
                "boundary knots must repeat {} times",
                degree + 1
            )));
        }
        Ok(Self { degree, knots })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn basis_count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn domain_lo(&self) -> f64 {
        self.knots[0]
    }

    pub fn domain_hi(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    fn check_domain(&self, x: f64) -> Result<(), SplineError> {
        if !x.is_finite() || x < self.domain_lo() || x > self.domain_hi() {
            return Err(SplineError::OutOfDomain {
                x,
                lo: self.domain_lo(),
                hi: self.domain_hi(),
            });
        }
        Ok(())
    }

    /// Evaluates the `r`-th basis function at `x` via the Cox-de Boor
    /// recursion.
    pub fn eval_basis(&self, r: usize, x: f64) -> Result<f64, SplineError> {
        let count = self.basis_count();
        if r >= count {
            return Err(SplineError::BadIndex { index: r, count });
        }
        self.check_domain(x)?;
        if x == self.domain_hi() {
            // Right-closed convention: the last basis function carries the
            // upper endpoint.
            return Ok(if r == count - 1 { 1.0 } else { 0.0 });
        }
        Ok(cox_de_boor(&self.knots, r, self.degree, x))
    }

    /// All basis values at `x` as a dense row of length `basis_count`.
    pub fn basis_row(&self, x: f64) -> Result<Vec<f64>, SplineError> {
        let (start, band) = self.nonzero_band(x)?;
        let mut row = vec![0.0; self.basis_count()];
        row[start..start + band.len()].copy_from_slice(&band);
        Ok(row)
    }

    /// The at-most `degree + 1` consecutive nonzero basis values at `x`,
    /// returned as `(first_index, values)`. This is the design-matrix
    /// assembly path; `basis_row` scatters it into a dense row.
    pub fn nonzero_band(&self, x: f64) -> Result<(usize, Vec<f64>), SplineError> {
        self.check_domain(x)?;
        let p = self.degree;
        let span = self.find_span(x);
        let t = &self.knots;

        // Triangular scheme (all nonzero basis functions on the span).
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for d in 1..=p {
            left[d] = x - t[span + 1 - d];
            right[d] = t[span + d] - x;
            let mut saved = 0.0;
            for r in 0..d {
                let denom = right[r + 1] + left[d - r];
                let temp = if denom != 0.0 { values[r] / denom } else { 0.0 };
                values[r] = saved + right[r + 1] * temp;
                saved = left[d - r] * temp;
            }
            values[d] = saved;
        }
        Ok((span - p, values))
    }

    /// Index `j` with `t[j] <= x < t[j+1]`, clamped so the upper endpoint
    /// falls in the last non-degenerate interval.
    fn find_span(&self, x: f64) -> usize {
        let p = self.degree;
        let n = self.basis_count();
        if x >= self.knots[n] {
            return n - 1;
        }
        let mut lo = p;
        let mut hi = n;
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if x < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }
}

/// Convenience constructor mirroring [`BasisSpec::make_clamped`].
pub fn make_clamped_spec(
    degree: usize,
    interior_count: usize,
    lo: f64,
    hi: f64,
) -> Result<BasisSpec, SplineError> {
    BasisSpec::make_clamped(degree, interior_count, lo, hi)
}

fn cox_de_boor(t: &[f64], i: usize, k: usize, x: f64) -> f64 {
    if k == 0 {
        return if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 };
    }
    let mut value = 0.0;
    if t[i + k] > t[i] {
        value += (x - t[i]) / (t[i + k] - t[i]) * cox_de_boor(t, i, k - 1, x);
    }
    if t[i + k + 1] > t[i + 1] {
        value += (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]) * cox_de_boor(t, i + 1, k - 1, x);
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clamped_cubic_six_interior() {
        let spec = BasisSpec::make_clamped(3, 6, -5.0, 5.0).unwrap();
        assert_eq!(spec.knots().len(), 14);
        assert_eq!(spec.basis_count(), 10);
        for k in 1..=6 {
            let expected = -5.0 + 10.0 * k as f64 / 7.0;
            assert_abs_diff_eq!(spec.knots()[3 + k], expected, epsilon = 1e-15);
        }
        assert_eq!(spec.domain_lo(), -5.0);
        assert_eq!(spec.domain_hi(), 5.0);
    }

    #[test]
    fn degree_zero_single_interval() {
        let spec = BasisSpec::make_clamped(0, 0, 0.0, 1.0).unwrap();
        assert_eq!(spec.knots(), &[0.0, 1.0]);
        assert_eq!(spec.basis_count(), 1);
        assert_eq!(spec.eval_basis(0, 0.5).unwrap(), 1.0);
        assert_eq!(spec.eval_basis(0, 1.0).unwrap(), 1.0);
        assert_eq!(spec.basis_row(0.3).unwrap(), vec![1.0]);
    }

    #[test]
    fn quadratic_basis_count() {
        let spec = BasisSpec::make_clamped(2, 3, 0.0, 1.0).unwrap();
        assert_eq!(spec.basis_count(), 6);
    }

    #[test]
    fn endpoint_interpolation() {
        let spec = BasisSpec::make_clamped(3, 6, -5.0, 5.0).unwrap();
        let at_lo = spec.basis_row(-5.0).unwrap();
        assert_eq!(at_lo[0], 1.0);
        assert!(at_lo[1..].iter().all(|&v| v == 0.0));
        let at_hi = spec.basis_row(5.0).unwrap();
        assert_eq!(*at_hi.last().unwrap(), 1.0);
        assert!(at_hi[..9].iter().all(|&v| v == 0.0));
        assert_eq!(spec.eval_basis(9, 5.0).unwrap(), 1.0);
        assert_eq!(spec.eval_basis(4, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn partition_of_unity_and_nonnegativity() {
        let spec = BasisSpec::make_clamped(3, 6, -5.0, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = rng.random_range(-5.0..=5.0);
            let row = spec.basis_row(x).unwrap();
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "sum {} at x {}", sum, x);
            assert!(row.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn local_support() {
        for (degree, interior) in [(0, 4), (1, 5), (2, 3), (3, 6)] {
            let spec = BasisSpec::make_clamped(degree, interior, 0.0, 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..200 {
                let x = rng.random_range(0.0..=1.0);
                let row = spec.basis_row(x).unwrap();
                let nonzero = row.iter().filter(|&&v| v != 0.0).count();
                assert!(nonzero <= degree + 1);
            }
        }
    }

    #[test]
    fn row_matches_pointwise_evaluation() {
        let spec = BasisSpec::make_clamped(3, 4, -2.0, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = rng.random_range(-2.0..=3.0);
            let row = spec.basis_row(x).unwrap();
            for (r, &v) in row.iter().enumerate() {
                assert_abs_diff_eq!(v, spec.eval_basis(r, x).unwrap(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn continuity_at_interior_knots() {
        let spec = BasisSpec::make_clamped(3, 6, -5.0, 5.0).unwrap();
        let h = 1e-9;
        for k in 1..=6 {
            let knot = spec.knots()[3 + k];
            for r in 0..spec.basis_count() {
                let below = spec.eval_basis(r, knot - h).unwrap();
                let at = spec.eval_basis(r, knot).unwrap();
                assert!((below - at).abs() <= 1e-6, "basis {} jumps at knot {}", r, knot);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            BasisSpec::make_clamped(3, 2, 1.0, 1.0).unwrap_err(),
            SplineError::InvalidDomain { lo: 1.0, hi: 1.0 }
        );
        assert!(matches!(
            BasisSpec::make_clamped(3, 2, 2.0, -2.0).unwrap_err(),
            SplineError::InvalidDomain { .. }
        ));
        let spec = BasisSpec::make_clamped(3, 2, 0.0, 1.0).unwrap();
        assert!(matches!(
            spec.eval_basis(0, 1.5).unwrap_err(),
            SplineError::OutOfDomain { .. }
        ));
        assert!(matches!(
            spec.eval_basis(99, 0.5).unwrap_err(),
            SplineError::BadIndex { .. }
        ));
        assert!(matches!(
            spec.basis_row(f64::NAN).unwrap_err(),
            SplineError::OutOfDomain { .. }
        ));
    }

    #[test]
    fn from_knots_validates_clamping() {
        assert!(BasisSpec::from_knots(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).is_ok());
        assert!(BasisSpec::from_knots(2, vec![0.0, 0.0, 0.5, 1.0, 1.0, 1.0]).is_err());
        assert!(BasisSpec::from_knots(1, vec![0.0, 1.0, 0.5, 2.0]).is_err());
    }
}
