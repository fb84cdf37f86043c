//! Finite-dimensional realizations on a truncated four-mode Fock space tensored with a
//! two-dimensional internal factor carrying `i_eff`.

mod fock;
mod realization;
mod search;

pub use fock::{FockSpace, Mode};
pub use realization::{
    build_realization, consistency_check, emergent_realization, scan_row, ChargeReport, ConsistencyReport,
    InvariantReport, LocalEntry, MatrixRealization, MatrixSnapshot, RealizationConfig, ScanRow, SparseMatrixJson,
    WindowMatrix,
};
pub use search::{violation_search, SearchConfig, SearchOutcome, SearchReport};

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("i_eff needs an even positive dimension, got {0}")]
    OddDimension(usize),
    #[error("cutoff must be at least 4, got {0}")]
    CutoffTooSmall(usize),
    #[error("perturbation scale must be finite and non-negative, got {0}")]
    BadScale(f64),
    #[error("entry outside the Fock cutoff: {0}")]
    OutsideCutoff(String),
    #[error("invalid realization: {0}")]
    Invalid(String),
    #[error("invalid search configuration: {0}")]
    BadSearchConfig(String),
    #[error("symbolic reduction failed: {0}")]
    Symbolic(String),
}

/// `i_eff = i·diag(1,−1,…,1,−1)` on a space of even dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IEffStructure {
    dimension: usize,
}

impl IEffStructure {
    pub fn new(dimension: usize) -> Result<Self, MatrixError> {
        if dimension == 0 || dimension % 2 == 1 {
            return Err(MatrixError::OddDimension(dimension));
        }
        Ok(Self { dimension })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Diagonal entry `p` of `i_eff`.
    pub fn diag(&self, p: usize) -> Complex64 {
        if p % 2 == 0 {
            Complex64::i()
        } else {
            -Complex64::i()
        }
    }

    /// `+1` on the `+i` eigenspace, `−1` on the `−i` one.
    pub fn parity(&self, p: usize) -> i8 {
        if p % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dimension, self.dimension, |p, q| if p == q { self.diag(p) } else { Complex64::new(0.0, 0.0) })
    }

    fn check(&self, m: &DMatrix<Complex64>) -> Result<(), MatrixError> {
        for found in [m.nrows(), m.ncols()] {
            if found != self.dimension {
                return Err(MatrixError::DimensionMismatch { expected: self.dimension, found });
            }
        }
        Ok(())
    }
}

/// `M_eff = (M − i_eff M i_eff)/2`, the part of `M` commuting with `i_eff`.
pub fn effective_projection(m: &DMatrix<Complex64>, s: &IEffStructure) -> Result<DMatrix<Complex64>, MatrixError> {
    s.check(m)?;
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |p, q| (m[(p, q)] - s.diag(p) * m[(p, q)] * s.diag(q)) * 0.5))
}

/// `(M_c, M_a)` with `M_c = M_eff` and `M_a = M − M_eff`.
pub fn split_commuting(
    m: &DMatrix<Complex64>,
    s: &IEffStructure,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), MatrixError> {
    let c = effective_projection(m, s)?;
    let a = m - &c;
    Ok((c, a))
}

/// Frobenius norms of `[M, i_eff]` and `{M, i_eff}`.
pub fn ieff_defects(m: &DMatrix<Complex64>, s: &IEffStructure) -> Result<(f64, f64), MatrixError> {
    s.check(m)?;
    let ie = s.matrix();
    Ok(((m * &ie - &ie * m).norm(), (m * &ie + &ie * m).norm()))
}
