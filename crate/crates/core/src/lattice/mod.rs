//! Scaled integer lattices with duals, exact enumeration of lattice points in
//! convex bodies, point sets with integer pre-images, and bracketed maximal
//! tube counting.

pub mod enumerate;
pub mod point_set;
pub mod tube;

pub use enumerate::{enumerate_in_body, project_points, EnumerationBudget};
pub use point_set::PointSet;
pub use tube::{
    max_tube_count, max_tube_mass, max_tube_mass_in_direction, Tube, TubeBracket,
    TubeSearchConfig,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{precondition, Result};

/// A full-rank lattice `B·Z^d` given by its basis matrix (columns are
/// generators). The experiment lattices are scaled integer grids `s·Z^d`,
/// but general invertible bases are supported.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    basis: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl Lattice {
    /// The scaled integer lattice `scale · Z^d`.
    pub fn scaled(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(precondition("dim", "dimension must be positive"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(precondition("scale", format!("must be positive finite, got {scale}")));
        }
        Ok(Self {
            basis: DMatrix::identity(dim, dim) * scale,
            inverse: DMatrix::identity(dim, dim) / scale,
        })
    }

    pub fn from_basis(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != basis.ncols() || basis.nrows() == 0 {
            return Err(crate::Error::Dimension { expected: basis.nrows(), got: basis.ncols() });
        }
        let inverse = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| crate::Error::Degenerate("lattice basis is singular".into()))?;
        Ok(Self { basis, inverse })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub(crate) fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// Volume of a fundamental domain.
    pub fn covolume(&self) -> f64 {
        self.basis.determinant().abs()
    }

    /// The dual lattice: basis = inverse-transpose, so that pairings between
    /// the two lattices are integers.
    pub fn dual(&self) -> Self {
        Self { basis: self.inverse.transpose(), inverse: self.basis.transpose() }
    }

    /// The lattice point with the given integer coordinates.
    pub fn point(&self, coeffs: &[i64]) -> DVector<f64> {
        let z = DVector::from_iterator(coeffs.len(), coeffs.iter().map(|&c| c as f64));
        &self.basis * z
    }
}
