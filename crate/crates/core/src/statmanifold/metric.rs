use nalgebra::DMatrix;

use super::family::TangentVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    Fisher,
    /// Burbea-Rao entropy metric of order `alpha`.
    Alpha(f64),
    /// Any other symmetric tensor, e.g. a caller-supplied flat metric.
    Other,
}

/// A symmetric `n × n` tensor at a parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    pub entries: DMatrix<f64>,
    pub kind: MetricKind,
}

impl MetricTensor {
    pub fn new(entries: DMatrix<f64>, kind: MetricKind) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Domain(format!(
                "metric must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { point: entries.iter().copied().collect() });
        }
        Ok(Self { entries, kind })
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n), kind: MetricKind::Other }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| (self.entries[(i, j)] - self.entries[(j, i)]).abs() <= tol))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.entries + self.entries.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }

    /// PSD up to an eigenvalue tolerance of `-1e-8`.
    pub fn is_positive_semidefinite(&self) -> bool {
        self.min_eigenvalue() >= -1e-8
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// The quadratic form `Σ_ij F_ij dθ_i dθ_j`.
pub fn rao_line_element(metric: &MetricTensor, v: &TangentVector) -> Result<f64> {
    let n = metric.dim();
    if v.dtheta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.dtheta.len() });
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += metric.entries[(i, j)] * v.dtheta[i] * v.dtheta[j];
        }
    }
    Ok(acc)
}

/// Number of singular values above `tol` times the largest one.
pub fn tensor_rank(metric: &MetricTensor, tol: f64) -> usize {
    let sv = metric.entries.clone().singular_values();
    let largest = sv.max();
    if largest <= 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * largest).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_line_element() {
        let id = MetricTensor::identity(2);
        assert_eq!(rao_line_element(&id, &TangentVector::new(vec![3.0, 4.0])).unwrap(), 25.0);
        assert_eq!(rao_line_element(&id, &TangentVector::zeros(2)).unwrap(), 0.0);
        assert!(matches!(
            rao_line_element(&id, &TangentVector::new(vec![1.0])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn ranks() {
        assert_eq!(tensor_rank(&MetricTensor::identity(3), 1e-12), 3);
        let zero = MetricTensor::new(DMatrix::zeros(3, 3), MetricKind::Other).unwrap();
        assert_eq!(tensor_rank(&zero, 1e-12), 0);
        let ones = MetricTensor::new(DMatrix::from_element(3, 3, 1.0), MetricKind::Other).unwrap();
        assert_eq!(tensor_rank(&ones, 1e-12), 1);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(MetricTensor::new(DMatrix::zeros(2, 3), MetricKind::Other).is_err());
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(MetricTensor::new(m, MetricKind::Other).is_err());
    }

    #[test]
    fn psd_detection() {
        let m = MetricTensor::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]), MetricKind::Other).unwrap();
        assert!(m.is_symmetric(0.0));
        assert!(!m.is_positive_semidefinite());
        assert!((m.min_eigenvalue() + 1.0).abs() < 1e-12);
    }
}
