//! Scaled isometric embeddings `ι = λ·Q : R^n → R^N` with `Qᵀ Q = I` and
//! `λ ∈ [1, 2]`, used to place a low-dimensional frequency pattern inside a
//! high-dimensional lattice.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::rotation::Rotation;
use crate::error::{precondition, Result};

#[derive(Debug, Clone)]
pub struct Embedding {
    /// `big_n × n` matrix with orthonormal columns.
    q: DMatrix<f64>,
    scale: f64,
}

impl Embedding {
    /// The identity embedding of R^n into itself (scale 1).
    pub fn identity(n: usize) -> Self {
        Self { q: DMatrix::identity(n, n), scale: 1.0 }
    }

    pub fn try_new(q: DMatrix<f64>, scale: f64) -> Result<Self> {
        if q.ncols() == 0 || q.nrows() < q.ncols() {
            return Err(crate::Error::Dimension { expected: q.ncols(), got: q.nrows() });
        }
        if !(scale >= 1.0 && scale <= 2.0) {
            return Err(precondition("scale", format!("must lie in [1, 2], got {scale}")));
        }
        let gram = q.tr_mul(&q);
        let dev = (&gram - DMatrix::identity(q.ncols(), q.ncols())).abs().max();
        if dev > 1e-12 * q.nrows() as f64 {
            return Err(precondition("q", format!("columns not orthonormal (deviation {dev:.2e})")));
        }
        Ok(Self { q, scale })
    }

    /// Random embedding: `Q` is the first `n` columns of a Haar rotation of
    /// R^N and `λ` is uniform on [1, 2].
    pub fn random(big_n: usize, n: usize, rng: &mut impl Rng) -> Result<Self> {
        if n == 0 || n > big_n {
            return Err(crate::Error::Dimension { expected: n.max(1), got: big_n });
        }
        let g = Rotation::haar(big_n, rng);
        let mut q = DMatrix::zeros(big_n, n);
        for j in 0..n {
            q.set_column(j, &g.column(j));
        }
        let scale = rng.gen_range(1.0..2.0);
        Self::try_new(q, scale)
    }

    /// A random scaled rotation of R^n onto itself (`big_n = n`).
    pub fn random_square(n: usize, rng: &mut impl Rng) -> Result<Self> {
        Self::random(n, n, rng)
    }

    pub fn ambient_dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn source_dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `ι z = λ Q z`.
    pub fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.q * z * self.scale
    }

    /// `ιᵀ x = λ Qᵀ x`.
    pub fn transpose_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.q.tr_mul(x) * self.scale
    }

    /// Component of `x` orthogonal to the image of `ι`.
    pub fn perp_component(&self, x: &DVector<f64>) -> DVector<f64> {
        x - &self.q * self.q.tr_mul(x)
    }

    /// Completes the image frame to a rotation of the ambient space: the
    /// first `n` columns are the columns of `Q`, the remaining ones an
    /// orthonormal basis of the orthogonal complement obtained by
    /// deterministic Gram–Schmidt against the standard basis. Requires
    /// `N > n` (the last complement column absorbs the determinant sign).
    pub fn completed_rotation(&self) -> Result<Rotation> {
        let big_n = self.ambient_dim();
        let n = self.source_dim();
        if big_n == n {
            return Err(precondition("embedding", "frame completion needs a proper subspace"));
        }
        let mut cols: Vec<DVector<f64>> = (0..n).map(|j| self.q.column(j).into_owned()).collect();
        for i in 0..big_n {
            if cols.len() == big_n {
                break;
            }
            let mut v: DVector<f64> = DVector::zeros(big_n);
            v[i] = 1.0;
            // Two Gram–Schmidt passes keep the frame orthonormal to ~1e-15.
            for _ in 0..2 {
                for c in &cols {
                    let d = c.dot(&v);
                    v -= c * d;
                }
            }
            let norm = v.norm();
            if norm > 1e-6 {
                cols.push(v / norm);
            }
        }
        if cols.len() != big_n {
            return Err(crate::Error::Degenerate("frame completion ran out of directions".into()));
        }
        let mut m = DMatrix::zeros(big_n, big_n);
        for (j, c) in cols.iter().enumerate() {
            m.set_column(j, c);
        }
        if m.determinant() < 0.0 {
            let last = big_n - 1;
            for k in 0..big_n {
                m[(k, last)] = -m[(k, last)];
            }
        }
        Rotation::try_new(m)
    }

    /// Norm of the orthogonal component.
    pub fn perp_norm(&self, x: &DVector<f64>) -> f64 {
        self.perp_component(x).norm()
    }
}

/// Gaussian vector helper for isotropic direction sampling.
#[cfg(test)]
pub(crate) fn gaussian_vector(d: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(d, |_, _| super::rotation::standard_normal(rng))
}
