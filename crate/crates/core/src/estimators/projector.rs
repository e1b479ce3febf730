use crate::error::{Error, Result};
use crate::scalar::{creal, dotc, norm_sqr, CMatrix, CVector, Real};

/// Rank-one orthogonal projector `x̂x̂^H/‖x̂‖²`, stored through its unit
/// generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorEstimate<T> {
    unit: CVector<T>,
}

impl<T: Real> ProjectorEstimate<T> {
    /// Fails when `x` is zero (no direction to project on).
    pub fn from_vector(x: &CVector<T>) -> Result<Self> {
        let n2 = norm_sqr(x);
        if !(n2 > T::zero()) || !n2.is_finite() {
            return Err(Error::InvalidParameter("projector generator must be non-zero".into()));
        }
        Ok(Self {
            unit: x / creal(n2.sqrt()),
        })
    }

    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    /// `‖P̂·y‖²`.
    pub fn projected_energy(&self, y: &CVector<T>) -> T {
        dotc(&self.unit, y).norm_sqr()
    }

    pub fn apply(&self, y: &CVector<T>) -> CVector<T> {
        &self.unit * dotc(&self.unit, y)
    }

    /// Dense `M × M` matrix.
    pub fn matrix(&self) -> CMatrix<T> {
        &self.unit * self.unit.adjoint()
    }
}

/// Compressed pseudo-likelihood contribution `‖P̂·ȳ‖² / c̄̄` of one observation.
pub fn compressed_score<T: Real>(p: &ProjectorEstimate<T>, ybar: &CVector<T>, cbar: T) -> Result<T> {
    if !(cbar > T::zero()) {
        return Err(Error::InvalidParameter("symbol energy must be positive".into()));
    }
    if ybar.len() != p.dim() {
        return Err(Error::Dimension("projector and vector lengths differ".into()));
    }
    Ok(p.projected_energy(ybar) / cbar)
}
