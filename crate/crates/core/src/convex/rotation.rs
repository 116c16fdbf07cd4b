//! Rotations of R^d and Haar-distributed sampling on SO(d).

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{precondition, Result};

/// Tolerance for orthonormality and determinant checks at construction.
const ORTHO_TOL: f64 = 1e-12;

/// An orthogonal matrix with determinant +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    m: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(d: usize) -> Self {
        Self { m: DMatrix::identity(d, d) }
    }

    /// Validates that `m` is orthogonal with determinant +1.
    pub fn try_new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(precondition("matrix", "rotation matrix must be square and nonempty"));
        }
        let d = m.nrows();
        let gram = m.transpose() * &m;
        let dev = (&gram - DMatrix::<f64>::identity(d, d)).abs().max();
        if dev > ORTHO_TOL * (d as f64) {
            return Err(precondition(
                "matrix",
                format!("columns not orthonormal (deviation {dev:.3e})"),
            ));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(precondition("matrix", format!("determinant {det} is not +1")));
        }
        Ok(Self { m })
    }

    /// Haar-distributed rotation: QR of a Gaussian matrix with the R diagonal
    /// sign-corrected (uniform on O(d)), then one column negated if needed to
    /// land in SO(d).
    pub fn haar(d: usize, rng: &mut impl Rng) -> Self {
        assert!(d >= 1, "haar rotation needs d >= 1");
        let g = DMatrix::from_fn(d, d, |_, _| standard_normal(rng));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for i in 0..d {
            if r[(i, i)] < 0.0 {
                for k in 0..d {
                    q[(k, i)] = -q[(k, i)];
                }
            }
        }
        if q.determinant() < 0.0 {
            let last = d - 1;
            for k in 0..d {
                q[(k, last)] = -q[(k, last)];
            }
        }
        Self { m: q }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Column `i`, i.e. the image of the i-th coordinate axis.
    pub fn column(&self, i: usize) -> DVector<f64> {
        self.m.column(i).into_owned()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.m * x
    }

    /// Applies the inverse rotation (the transpose).
    pub fn apply_inverse(&self, x: &DVector<f64>) -> DVector<f64> {
        self.m.tr_mul(x)
    }

    pub fn inverse(&self) -> Rotation {
        Self { m: self.m.transpose() }
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Self { m: &self.m * &other.m }
    }
}

/// One standard normal draw (Box–Muller; the sine half is discarded).
pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
