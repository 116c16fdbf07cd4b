//! Enumerated lattice point sets carrying integer pre-images and boundary
//! flags.

use nalgebra::DVector;

/// Result of enumerating lattice points inside a convex body (or of
/// projecting such points to a subspace). Points are stored in the canonical
/// order produced by the enumeration (lexicographic in integer coordinates),
/// together with their integer coordinates in the generating lattice and a
/// flag marking points that sit within the membership margin of the body
/// boundary.
#[derive(Debug, Clone)]
pub struct PointSet {
    points: Vec<DVector<f64>>,
    coeffs: Vec<Vec<i64>>,
    boundary: Vec<bool>,
}

impl PointSet {
    pub(crate) fn new(points: Vec<DVector<f64>>, coeffs: Vec<Vec<i64>>, boundary: Vec<bool>) -> Self {
        debug_assert_eq!(points.len(), coeffs.len());
        debug_assert_eq!(points.len(), boundary.len());
        debug_assert!(coeffs.windows(2).all(|w| w[0] < w[1]), "pre-images must be strictly increasing");
        Self { points, coeffs, boundary }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &DVector<f64> {
        &self.points[i]
    }

    /// Integer coordinates of point `i` in the generating lattice.
    pub fn coeffs(&self, i: usize) -> &[i64] {
        &self.coeffs[i]
    }

    /// Whether point `i` lies within the numerical margin of the body
    /// boundary (it is still counted).
    pub fn on_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    /// Number of points strictly inside the body (farther than the margin
    /// from the boundary).
    pub fn interior_count(&self) -> usize {
        self.len() - self.boundary_count()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.points.iter()
    }
}
