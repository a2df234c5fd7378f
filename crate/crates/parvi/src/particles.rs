//! Particle ensembles as row-major arrays.

use ndarray::Array2;

use crate::error::{Error, Result};

/// N particles in d dimensions, one particle per row.
///
/// A thin wrapper over `Array2<f64>` that pins down the row-per-particle
/// convention and rejects empty or non-finite configurations at the
/// boundaries where ensembles enter the library.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    positions: Array2<f64>,
}

impl ParticleSet {
    /// Wraps an (N, d) array. Fails if N == 0, d == 0, or any entry is
    /// non-finite.
    pub fn new(positions: Array2<f64>) -> Result<Self> {
        if positions.nrows() == 0 {
            return Err(Error::invalid(
                "particle set must contain at least one particle",
            ));
        }
        if positions.ncols() == 0 {
            return Err(Error::invalid("particle dimension must be at least 1"));
        }
        if positions.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("particle positions must be finite"));
        }
        Ok(ParticleSet { positions })
    }

    /// Builds from a flat row-major slice of length n * d.
    pub fn from_rows(n: usize, d: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::mismatch(format!(
                "expected {} values for {} particles in {} dims, got {}",
                n * d,
                n,
                d,
                data.len()
            )));
        }
        let arr = Array2::from_shape_vec((n, d), data.to_vec())
            .map_err(|e| Error::invalid(format!("bad particle shape: {e}")))?;
        ParticleSet::new(arr)
    }

    pub fn len(&self) -> usize {
        self.positions.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.positions.ncols()
    }

    pub fn positions(&self) -> &Array2<f64> {
        &self.positions
    }

    /// Consumes the wrapper; used by solvers that update positions in place
    /// and re-wrap afterwards.
    pub fn into_inner(self) -> Array2<f64> {
        self.positions
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn accepts_valid_positions() {
        let p = ParticleSet::new(array![[0.0, 1.0], [2.0, -3.0]]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.dim(), 2);
    }

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(ParticleSet::new(Array2::zeros((0, 2))).is_err());
        assert!(ParticleSet::new(Array2::zeros((2, 0))).is_err());
        assert!(ParticleSet::new(array![[0.0], [f64::NAN]]).is_err());
        assert!(ParticleSet::new(array![[f64::INFINITY]]).is_err());
    }

    #[test]
    fn from_rows_checks_length() {
        assert!(ParticleSet::from_rows(2, 2, &[1.0, 2.0, 3.0]).is_err());
        let p = ParticleSet::from_rows(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.positions()[[1, 0]], 3.0);
    }
}
