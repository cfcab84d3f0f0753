use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, relative_error, residual_norm_unchecked};
use crate::matrix::DenseMatrix;

/// A candidate nonnegative factorization `W·H` with an optional cached
/// relative error.
///
/// The cache is cleared by every mutable accessor, so a cached value always
/// belongs to the current factors.
#[derive(Clone, Debug)]
pub struct FactorPair {
    w: DenseMatrix,
    h: DenseMatrix,
    error: Option<f64>,
}

/// Equality compares the factors only, not the cache.
impl PartialEq for FactorPair {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w && self.h == other.h
    }
}

impl FactorPair {
    pub fn new(w: DenseMatrix, h: DenseMatrix) -> Result<Self> {
        if w.cols() != h.rows() {
            return Err(Error::DimensionMismatch(format!(
                "W has {} columns but H has {} rows",
                w.cols(),
                h.rows()
            )));
        }
        if !w.is_nonnegative() || !h.is_nonnegative() {
            return Err(Error::InvalidConfig(
                "factor entries must be nonnegative".into(),
            ));
        }
        Ok(Self { w, h, error: None })
    }

    /// Skips validation; callers guarantee conforming nonnegative factors.
    pub(crate) fn from_parts(w: DenseMatrix, h: DenseMatrix) -> Self {
        debug_assert_eq!(w.cols(), h.rows());
        Self { w, h, error: None }
    }

    pub fn rank(&self) -> usize {
        self.w.cols()
    }

    pub fn w(&self) -> &DenseMatrix {
        &self.w
    }

    pub fn h(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn w_mut(&mut self) -> &mut DenseMatrix {
        self.error = None;
        &mut self.w
    }

    pub fn h_mut(&mut self) -> &mut DenseMatrix {
        self.error = None;
        &mut self.h
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut DenseMatrix, &mut DenseMatrix) {
        self.error = None;
        (&mut self.w, &mut self.h)
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix) {
        (self.w, self.h)
    }

    pub fn cached_error(&self) -> Option<f64> {
        self.error
    }

    /// Relative error against `x`, computed once and cached.
    pub fn relative_error(&mut self, x: &DenseMatrix) -> Result<f64> {
        if let Some(e) = self.error {
            return Ok(e);
        }
        let e = relative_error(x, &self.w, &self.h)?;
        self.error = Some(e);
        Ok(e)
    }

    /// Relative error when `x_norm = ‖X‖_F > 0` is already known and the
    /// shapes are known to conform.
    pub(crate) fn error_with_norm(&mut self, x: &DenseMatrix, x_norm: f64) -> f64 {
        if let Some(e) = self.error {
            return e;
        }
        let e = residual_norm_unchecked(x, &self.w, &self.h) / x_norm;
        self.error = Some(e);
        e
    }

    pub fn check_conforms(&self, x: &DenseMatrix) -> Result<()> {
        if self.w.rows() != x.rows() || self.h.cols() != x.cols() {
            return Err(Error::DimensionMismatch(format!(
                "X is {:?} but W is {:?} and H is {:?}",
                x.shape(),
                self.w.shape(),
                self.h.shape()
            )));
        }
        Ok(())
    }
}

/// `‖X‖_F`, rejecting the zero matrix.
pub(crate) fn nonzero_norm(x: &DenseMatrix) -> Result<f64> {
    let n = frobenius_norm(x);
    if n == 0.0 {
        Err(Error::ZeroMatrix)
    } else {
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_invalidated_by_mutation() {
        let x = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let w = DenseMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let h = DenseMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let mut pair = FactorPair::new(w, h).unwrap();
        assert_eq!(pair.relative_error(&x).unwrap(), 0.0);
        assert_eq!(pair.cached_error(), Some(0.0));
        pair.h_mut()[(0, 0)] = 0.0;
        assert_eq!(pair.cached_error(), None);
        assert!(pair.relative_error(&x).unwrap() > 0.0);
    }

    #[test]
    fn rejects_negative_or_mismatched() {
        let w = DenseMatrix::from_rows(&[[1.0], [-2.0]]).unwrap();
        let h = DenseMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(FactorPair::new(w, h.clone()).is_err());
        let w2 = DenseMatrix::zeros(2, 2);
        assert!(FactorPair::new(w2, h).is_err());
    }
}
