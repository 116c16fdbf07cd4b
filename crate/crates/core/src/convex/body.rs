//! Convex bodies: oriented boxes, slabs, balls and cylinders with exact
//! membership tests, closed-form volumes, support functions and circumscribed
//! dyadic boxes.

use nalgebra::DVector;

use super::dyadic::DyadicTuple;
use super::rotation::Rotation;
use crate::error::{precondition, Result};

/// Base of a cylinder, living in the first `dim` body axes.
#[derive(Debug, Clone, PartialEq)]
pub enum CylinderBase {
    Ball { radius: f64 },
    Box { halfwidths: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Axis halfwidths in body frame.
    Box { halfwidths: Vec<f64> },
    /// Geometrically a box; kept as a distinct kind for reporting because the
    /// experiments treat thin boxes (slabs) as their own species.
    Slab { halfwidths: Vec<f64> },
    Ball { radius: f64 },
    /// Base over the first `base_dim` body axes, box heights (halfwidths) on
    /// the remaining axes.
    Cylinder { base_dim: usize, base: CylinderBase, heights: Vec<f64> },
}

/// A convex body: `center + orientation · shape`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    center: DVector<f64>,
    orientation: Rotation,
    shape: Shape,
}

fn check_positive(name: &'static str, vals: &[f64]) -> Result<()> {
    if vals.is_empty() {
        return Err(precondition(name, "must be nonempty"));
    }
    for &v in vals {
        if !(v > 0.0 && v.is_finite()) {
            return Err(precondition(name, format!("entries must be positive finite, got {v}")));
        }
    }
    Ok(())
}

impl ConvexBody {
    pub fn bbox(center: DVector<f64>, orientation: Rotation, halfwidths: Vec<f64>) -> Result<Self> {
        check_positive("halfwidths", &halfwidths)?;
        if center.len() != halfwidths.len() || orientation.dim() != halfwidths.len() {
            return Err(crate::Error::Dimension { expected: center.len(), got: halfwidths.len() });
        }
        Ok(Self { center, orientation, shape: Shape::Box { halfwidths } })
    }

    /// Axis-aligned box centered at the origin with side lengths given by a
    /// dyadic tuple (halfwidths are half the sides).
    pub fn dyadic_box(sides: &DyadicTuple) -> Self {
        let hw: Vec<f64> = sides.entries_f64().iter().map(|s| s / 2.0).collect();
        let d = hw.len();
        Self {
            center: DVector::zeros(d),
            orientation: Rotation::identity(d),
            shape: Shape::Box { halfwidths: hw },
        }
    }

    pub fn slab(center: DVector<f64>, orientation: Rotation, halfwidths: Vec<f64>) -> Result<Self> {
        let body = Self::bbox(center, orientation, halfwidths)?;
        let Shape::Box { halfwidths } = body.shape else { unreachable!() };
        Ok(Self { shape: Shape::Slab { halfwidths }, ..body })
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        check_positive("radius", &[radius])?;
        let d = center.len();
        if d == 0 {
            return Err(precondition("center", "dimension must be positive"));
        }
        Ok(Self { center, orientation: Rotation::identity(d), shape: Shape::Ball { radius } })
    }

    pub fn cylinder(
        center: DVector<f64>,
        orientation: Rotation,
        base: CylinderBase,
        heights: Vec<f64>,
    ) -> Result<Self> {
        check_positive("heights", &heights)?;
        let base_dim = match &base {
            CylinderBase::Ball { radius } => {
                check_positive("base radius", &[*radius])?;
                center.len().checked_sub(heights.len()).ok_or_else(|| {
                    precondition("heights", "more height axes than ambient dimensions")
                })?
            }
            CylinderBase::Box { halfwidths } => {
                check_positive("base halfwidths", halfwidths)?;
                halfwidths.len()
            }
        };
        if base_dim == 0 {
            return Err(precondition("base", "cylinder base must have positive dimension"));
        }
        if base_dim + heights.len() != center.len() || orientation.dim() != center.len() {
            return Err(crate::Error::Dimension {
                expected: center.len(),
                got: base_dim + heights.len(),
            });
        }
        Ok(Self { center, orientation, shape: Shape::Cylinder { base_dim, base, heights } })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn orientation(&self) -> &Rotation {
        &self.orientation
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// The body `g·B` (rotated about the origin of the ambient space).
    pub fn rotated(&self, g: &Rotation) -> Self {
        Self {
            center: g.apply(&self.center),
            orientation: g.compose(&self.orientation),
            shape: self.shape.clone(),
        }
    }

    pub fn translated(&self, v: &DVector<f64>) -> Self {
        Self { center: &self.center + v, orientation: self.orientation.clone(), shape: self.shape.clone() }
    }

    /// Signed slack of `x`: nonnegative inside, negative outside; its absolute
    /// value is a lower bound for the distance to the boundary along the
    /// tightest constraint only up to axis scaling, so use it for membership
    /// and margin flagging, not as a metric.
    pub fn slack(&self, x: &DVector<f64>) -> f64 {
        let y = self.orientation.apply_inverse(&(x - &self.center));
        match &self.shape {
            Shape::Box { halfwidths } | Shape::Slab { halfwidths } => halfwidths
                .iter()
                .zip(y.iter())
                .map(|(w, yi)| w - yi.abs())
                .fold(f64::INFINITY, f64::min),
            Shape::Ball { radius } => radius - y.norm(),
            Shape::Cylinder { base_dim, base, heights } => {
                let base_slack = match base {
                    CylinderBase::Ball { radius } => {
                        radius - y.rows(0, *base_dim).norm()
                    }
                    CylinderBase::Box { halfwidths } => halfwidths
                        .iter()
                        .zip(y.iter())
                        .map(|(w, yi)| w - yi.abs())
                        .fold(f64::INFINITY, f64::min),
                };
                let h_slack = heights
                    .iter()
                    .zip(y.iter().skip(*base_dim))
                    .map(|(h, yi)| h - yi.abs())
                    .fold(f64::INFINITY, f64::min);
                base_slack.min(h_slack)
            }
        }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.slack(x) >= 0.0
    }

    /// Volume in closed form.
    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Box { halfwidths } | Shape::Slab { halfwidths } => {
                halfwidths.iter().map(|w| 2.0 * w).product()
            }
            Shape::Ball { radius } => unit_ball_volume(self.dim()) * radius.powi(self.dim() as i32),
            Shape::Cylinder { base_dim, base, heights } => {
                let base_vol = match base {
                    CylinderBase::Ball { radius } => {
                        unit_ball_volume(*base_dim) * radius.powi(*base_dim as i32)
                    }
                    CylinderBase::Box { halfwidths } => {
                        halfwidths.iter().map(|w| 2.0 * w).product()
                    }
                };
                base_vol * heights.iter().map(|h| 2.0 * h).product::<f64>()
            }
        }
    }

    /// Support function `sup_{x ∈ B} ⟨u, x⟩` in the world frame.
    pub fn support(&self, u: &DVector<f64>) -> f64 {
        let d = self.orientation.apply_inverse(u);
        let shape_part = match &self.shape {
            Shape::Box { halfwidths } | Shape::Slab { halfwidths } => {
                halfwidths.iter().zip(d.iter()).map(|(w, di)| w * di.abs()).sum::<f64>()
            }
            Shape::Ball { radius } => radius * d.norm(),
            Shape::Cylinder { base_dim, base, heights } => {
                let base_part = match base {
                    CylinderBase::Ball { radius } => radius * d.rows(0, *base_dim).norm(),
                    CylinderBase::Box { halfwidths } => halfwidths
                        .iter()
                        .zip(d.iter())
                        .map(|(w, di)| w * di.abs())
                        .sum::<f64>(),
                };
                base_part
                    + heights
                        .iter()
                        .zip(d.iter().skip(*base_dim))
                        .map(|(h, di)| h * di.abs())
                        .sum::<f64>()
            }
        };
        u.dot(&self.center) + shape_part
    }

    /// Face constraints `|⟨a, x − center⟩| ≤ c` with `a` a unit vector in the
    /// world frame. Describes boxes and slabs completely and the box part of
    /// cylinders; balls contribute none.
    pub(crate) fn linear_constraints(&self) -> Vec<(DVector<f64>, f64)> {
        let cols = |range: std::ops::Range<usize>, widths: &[f64]| -> Vec<(DVector<f64>, f64)> {
            range
                .zip(widths.iter())
                .map(|(i, &w)| (self.orientation.column(i), w))
                .collect()
        };
        match &self.shape {
            Shape::Box { halfwidths } | Shape::Slab { halfwidths } => {
                cols(0..halfwidths.len(), halfwidths)
            }
            Shape::Ball { .. } => Vec::new(),
            Shape::Cylinder { base_dim, base, heights } => {
                let mut v = match base {
                    CylinderBase::Ball { .. } => Vec::new(),
                    CylinderBase::Box { halfwidths } => cols(0..*base_dim, halfwidths),
                };
                v.extend(cols(*base_dim..*base_dim + heights.len(), heights));
                v
            }
        }
    }

    /// The ball part, if any: orthonormal world-frame directions `q_j` and a
    /// radius with `Σ ⟨q_j, x − center⟩² ≤ r²`.
    pub(crate) fn ball_constraint(&self) -> Option<(Vec<DVector<f64>>, f64)> {
        match &self.shape {
            Shape::Ball { radius } => {
                Some(((0..self.dim()).map(|i| self.orientation.column(i)).collect(), *radius))
            }
            Shape::Cylinder { base_dim, base: CylinderBase::Ball { radius }, .. } => {
                Some(((0..*base_dim).map(|i| self.orientation.column(i)).collect(), *radius))
            }
            _ => None,
        }
    }

    /// Circumscribed dyadic box: side lengths rounded up to powers of two,
    /// sorted nonincreasing (the rotation is permuted to match), plus a scale
    /// `c ≥ 1/(2d)` such that a translate of `c·[dims]` fits inside the body.
    pub fn john_box(&self) -> Result<JohnBox> {
        let d = self.dim();
        // Side lengths per body axis.
        let sides: Vec<f64> = match &self.shape {
            Shape::Box { halfwidths } | Shape::Slab { halfwidths } => {
                halfwidths.iter().map(|w| 2.0 * w).collect()
            }
            Shape::Ball { radius } => vec![2.0 * radius; d],
            Shape::Cylinder { base_dim, base, heights } => {
                let mut s: Vec<f64> = match base {
                    CylinderBase::Ball { radius } => vec![2.0 * radius; *base_dim],
                    CylinderBase::Box { halfwidths } => {
                        halfwidths.iter().map(|w| 2.0 * w).collect()
                    }
                };
                s.extend(heights.iter().map(|h| 2.0 * h));
                s
            }
        };
        let exps: Vec<i64> = sides.iter().map(|&s| ceil_log2(s)).collect();

        // Inner scale: the largest c with a translate of c·[dims] inside the
        // body, computed per kind against the rounded sides.
        let rounded: Vec<f64> = exps.iter().map(|&e| (e as f64).exp2()).collect();
        let inner_scale = match &self.shape {
            Shape::Box { halfwidths } | Shape::Slab { halfwidths } => halfwidths
                .iter()
                .zip(&rounded)
                .map(|(w, s)| 2.0 * w / s)
                .fold(f64::INFINITY, f64::min),
            Shape::Ball { radius } => {
                // Inscribed cube of the ball has side 2r/√d.
                2.0 * radius / ((d as f64).sqrt() * rounded[0])
            }
            Shape::Cylinder { base_dim, base, heights } => {
                let base_scale = match base {
                    CylinderBase::Ball { radius } => {
                        2.0 * radius / ((*base_dim as f64).sqrt() * rounded[0])
                    }
                    CylinderBase::Box { halfwidths } => halfwidths
                        .iter()
                        .zip(&rounded)
                        .map(|(w, s)| 2.0 * w / s)
                        .fold(f64::INFINITY, f64::min),
                };
                let h_scale = heights
                    .iter()
                    .zip(rounded.iter().skip(*base_dim))
                    .map(|(h, s)| 2.0 * h / s)
                    .fold(f64::INFINITY, f64::min);
                base_scale.min(h_scale)
            }
        };
        debug_assert!(inner_scale >= 1.0 / (2.0 * d as f64) - 1e-12);

        // Sort axes so the dyadic tuple is nonincreasing, permuting the
        // orientation columns to match (with a sign flip if the permutation
        // is odd, which leaves the box invariant).
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| exps[j].cmp(&exps[i]).then(i.cmp(&j)));
        let mut m = nalgebra::DMatrix::zeros(d, d);
        for (new_axis, &old_axis) in order.iter().enumerate() {
            m.set_column(new_axis, &self.orientation.column(old_axis));
        }
        if m.determinant() < 0.0 {
            let last = d - 1;
            for k in 0..d {
                m[(k, last)] = -m[(k, last)];
            }
        }
        let dims = DyadicTuple::new(order.iter().map(|&i| exps[i]).collect())?;
        Ok(JohnBox { dims, orientation: Rotation::try_new(m)?, inner_scale })
    }
}

/// Result of [`ConvexBody::john_box`].
#[derive(Debug, Clone)]
pub struct JohnBox {
    /// Side lengths of the circumscribed box, nonincreasing powers of two.
    pub dims: DyadicTuple,
    /// Axis directions matching `dims`.
    pub orientation: Rotation,
    /// A translate of `inner_scale · dims` fits inside the body;
    /// always ≥ 1/(2d).
    pub inner_scale: f64,
}

/// Smallest integer `e` with `2^e ≥ x`, robust at exact powers of two.
fn ceil_log2(x: f64) -> i64 {
    assert!(x > 0.0 && x.is_finite());
    let mut e = x.log2().ceil() as i64;
    while ((e - 1) as f64).exp2() >= x {
        e -= 1;
    }
    while (e as f64).exp2() < x {
        e += 1;
    }
    e
}

/// Volume of the unit ball in R^d via the two-step recurrence.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * std::f64::consts::TAU / d as f64,
    }
}
