//! Depth-first enumeration of lattice points inside convex bodies.
//!
//! Points are generated in integer coordinates with per-level interval
//! tightening driven by the body's face constraints, so thin rotated boxes
//! cost far less than their bounding boxes. Membership at the leaves is the
//! body's exact slack test with a fixed numerical margin; points within the
//! margin of the boundary are counted but flagged. For bodies with dyadic
//! data on scaled integer lattices the slack arithmetic is exact in doubles,
//! so the margin only matters for genuinely irrational configurations
//! (rotated frames, balls).

use nalgebra::{DMatrix, DVector};

use crate::convex::{ConvexBody, Embedding};
use crate::error::{precondition, Result};

use super::point_set::PointSet;
use super::Lattice;

/// Distance (in slack units) under which a point counts as sitting on the
/// body boundary; membership accepts slack ≥ −MARGIN.
pub const MEMBERSHIP_MARGIN: f64 = 1e-9;

/// Interval arithmetic margin, kept strictly wider than the membership
/// margin so pruning never cuts a point the leaf test would accept.
const PRUNE_MARGIN: f64 = 2e-9;

#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    /// Maximum number of accepted points.
    pub max_points: u64,
    /// Maximum number of DFS cells visited (termination guarantee for
    /// degenerate bodies whose bounding boxes dwarf their volume).
    pub max_nodes: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { max_points: 10_000_000, max_nodes: 100_000_000 }
    }
}

impl EnumerationBudget {
    pub fn with_nodes(max_nodes: u64) -> Self {
        Self { max_nodes, ..Self::default() }
    }
}

/// One linear face constraint in integer coordinates: `lo ≤ ⟨alpha, z⟩ ≤ hi`,
/// with suffix interval bounds for the not-yet-fixed coordinates.
struct Row {
    alpha: Vec<f64>,
    lo: f64,
    hi: f64,
    /// `fut_min[k] = Σ_{i ≥ k} min(alpha_i·z_i)` over the root intervals.
    fut_min: Vec<f64>,
    fut_max: Vec<f64>,
}

struct Dfs<'a> {
    lattice: &'a Lattice,
    body: &'a ConvexBody,
    d: usize,
    z_lo: Vec<i64>,
    z_hi: Vec<i64>,
    rows: Vec<Row>,
    /// `row_vals[k][r]` = Σ_{i < k} alpha_i z_i for the current prefix.
    row_vals: Vec<Vec<f64>>,
    z: Vec<i64>,
    /// Unimodular map from the conditioned integer coordinates back to the
    /// caller's basis.
    coeff_map: Option<&'a DMatrix<i64>>,
    budget: EnumerationBudget,
    nodes: u64,
    points: Vec<DVector<f64>>,
    coeffs: Vec<Vec<i64>>,
    boundary: Vec<bool>,
}

impl Dfs<'_> {
    fn run(&mut self) -> Result<()> {
        if (0..self.d).any(|i| self.z_lo[i] > self.z_hi[i]) {
            return Ok(());
        }
        self.descend(0)
    }

    fn budget_error(&self, which: u64) -> crate::Error {
        crate::Error::Budget { budget: which, lower_bound: self.points.len() as u64 }
    }

    fn descend(&mut self, k: usize) -> Result<()> {
        // Tighten the interval for z_k with every row, given the fixed prefix
        // and interval bounds on the future coordinates.
        let mut lo = self.z_lo[k];
        let mut hi = self.z_hi[k];
        for (r, row) in self.rows.iter().enumerate() {
            let a = row.alpha[k];
            if a.abs() < 1e-13 {
                continue;
            }
            let fixed = self.row_vals[k][r];
            let fut_min = row.fut_min[k + 1];
            let fut_max = row.fut_max[k + 1];
            // Feasibility: lo_r ≤ fixed + a·z + fut ≤ hi_r for some admissible fut.
            let (zmin, zmax) = if a > 0.0 {
                ((row.lo - fixed - fut_max) / a, (row.hi - fixed - fut_min) / a)
            } else {
                ((row.hi - fixed - fut_min) / a, (row.lo - fixed - fut_max) / a)
            };
            lo = lo.max((zmin - PRUNE_MARGIN).ceil() as i64);
            hi = hi.min((zmax + PRUNE_MARGIN).floor() as i64);
            if lo > hi {
                return Ok(());
            }
        }

        let span = (hi - lo + 1) as u64;
        self.nodes += span;
        if self.nodes > self.budget.max_nodes {
            return Err(self.budget_error(self.budget.max_nodes));
        }

        for z in lo..=hi {
            self.z[k] = z;
            if k + 1 == self.d {
                let x = self.lattice.basis()
                    * DVector::from_iterator(self.d, self.z.iter().map(|&c| c as f64));
                let slack = self.body.slack(&x);
                if slack >= -MEMBERSHIP_MARGIN {
                    if self.points.len() as u64 >= self.budget.max_points {
                        return Err(self.budget_error(self.budget.max_points));
                    }
                    self.points.push(x);
                    let zc = match self.coeff_map {
                        Some(u) => (0..self.d)
                            .map(|r| (0..self.d).map(|c| u[(r, c)] * self.z[c]).sum())
                            .collect(),
                        None => self.z.clone(),
                    };
                    self.coeffs.push(zc);
                    self.boundary.push(slack <= MEMBERSHIP_MARGIN);
                }
            } else {
                for r in 0..self.rows.len() {
                    self.row_vals[k + 1][r] =
                        self.row_vals[k][r] + self.rows[r].alpha[k] * z as f64;
                }
                self.descend(k + 1)?;
            }
        }
        Ok(())
    }
}

/// Enumerates all lattice points inside `body` (closed, with the membership
/// margin). Coefficients are reported in the caller's basis; internally the
/// basis is conditioned on the body's frame (a unimodular LLL reduction in
/// the John box's axes), without which thin rotated bodies in high dimension
/// make the per-level intervals arbitrarily loose and exhaust the node
/// budget.
pub fn enumerate_in_body(
    lattice: &Lattice,
    body: &ConvexBody,
    budget: EnumerationBudget,
) -> Result<PointSet> {
    let d = lattice.dim();
    if body.dim() != d {
        return Err(crate::Error::Dimension { expected: d, got: body.dim() });
    }
    if let Some(u) = conditioning_transform(lattice, body) {
        let uf = u.map(|x| x as f64);
        let conditioned = Lattice::from_basis(lattice.basis() * uf)?;
        return dfs_enumerate(&conditioned, body, budget, Some(&u));
    }
    dfs_enumerate(lattice, body, budget, None)
}

fn dfs_enumerate(
    lattice: &Lattice,
    body: &ConvexBody,
    budget: EnumerationBudget,
    coeff_map: Option<&DMatrix<i64>>,
) -> Result<PointSet> {
    let d = lattice.dim();
    // Root bounds from the support function: z_i ranges over
    // [−h(−B⁻ᵀe_i), h(B⁻ᵀe_i)].
    let binv = lattice.inverse();
    let mut z_lo = Vec::with_capacity(d);
    let mut z_hi = Vec::with_capacity(d);
    for i in 0..d {
        let u = binv.row(i).transpose();
        let hi = body.support(&u);
        let lo = -body.support(&(-&u));
        z_lo.push((lo - PRUNE_MARGIN).ceil() as i64);
        z_hi.push((hi + PRUNE_MARGIN).floor() as i64);
    }

    // Face constraints in integer coordinates. Ball parts contribute their
    // frame rows as relaxed box constraints; the leaf slack test restores
    // exact membership.
    let mut raw: Vec<(DVector<f64>, f64)> = body.linear_constraints();
    if let Some((frame, radius)) = body.ball_constraint() {
        raw.extend(frame.into_iter().map(|q| (q, radius)));
    }
    let center = body.center();
    let rows: Vec<Row> = raw
        .into_iter()
        .map(|(a, w)| {
            let alpha: Vec<f64> =
                (0..d).map(|k| a.dot(&lattice.basis().column(k).into_owned())).collect();
            let mid = a.dot(center);
            let mut fut_min = vec![0.0; d + 1];
            let mut fut_max = vec![0.0; d + 1];
            for k in (0..d).rev() {
                let c1 = alpha[k] * z_lo[k] as f64;
                let c2 = alpha[k] * z_hi[k] as f64;
                fut_min[k] = fut_min[k + 1] + c1.min(c2);
                fut_max[k] = fut_max[k + 1] + c1.max(c2);
            }
            Row { alpha, lo: mid - w, hi: mid + w, fut_min, fut_max }
        })
        .collect();

    let n_rows = rows.len();
    let mut dfs = Dfs {
        lattice,
        body,
        d,
        z_lo,
        z_hi,
        rows,
        row_vals: vec![vec![0.0; n_rows]; d + 1],
        z: vec![0; d],
        coeff_map,
        budget,
        nodes: 0,
        points: Vec::new(),
        coeffs: Vec::new(),
        boundary: Vec::new(),
    };
    dfs.run()?;
    let Dfs { points, coeffs, boundary, .. } = dfs;
    if coeff_map.is_some() {
        // Restore the canonical (lexicographic in the caller's coordinates)
        // order, so conditioning stays invisible to callers.
        let mut zip: Vec<(Vec<i64>, DVector<f64>, bool)> = coeffs
            .into_iter()
            .zip(points)
            .zip(boundary)
            .map(|((c, p), b)| (c, p, b))
            .collect();
        zip.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut points = Vec::with_capacity(zip.len());
        let mut coeffs = Vec::with_capacity(zip.len());
        let mut boundary = Vec::with_capacity(zip.len());
        for (c, p, b) in zip {
            coeffs.push(c);
            points.push(p);
            boundary.push(b);
        }
        return Ok(PointSet::new(points, coeffs, boundary));
    }
    Ok(PointSet::new(points, coeffs, boundary))
}

/// Unimodular change of integer coordinates that LLL-reduces the basis as
/// seen from the body's John frame, or None when the basis is already
/// reduced there (the common axis-aligned and well-rounded cases).
fn conditioning_transform(lattice: &Lattice, body: &ConvexBody) -> Option<DMatrix<i64>> {
    let d = lattice.dim();
    if d <= 1 {
        return None;
    }
    let john = body.john_box().ok()?;
    let sides = john.dims.entries_f64();
    let mut m = john.orientation.matrix().transpose() * lattice.basis();
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] /= sides[i];
        }
    }
    let u = lll_unimodular(&m)?;
    if u == DMatrix::identity(d, d) {
        None
    } else {
        Some(u)
    }
}

/// Floating-point LLL (δ = 0.99) on the columns of `m`, returning the
/// unimodular transform only. Gives up (None) on degenerate input or if the
/// swap loop fails to settle, in which case enumeration proceeds with the
/// caller's basis.
fn lll_unimodular(m: &DMatrix<f64>) -> Option<DMatrix<i64>> {
    const DELTA: f64 = 0.99;
    let d = m.ncols();
    let mut b = m.clone();
    let mut u = DMatrix::<i64>::from_diagonal_element(d, d, 1);
    let mut k = 1;
    let mut iters = 0u32;
    while k < d {
        iters += 1;
        if iters > 10_000 {
            return None;
        }
        let (mu, _) = gram_schmidt(&b)?;
        for j in (0..k).rev() {
            let q = mu[(k, j)].round();
            if q != 0.0 {
                if !q.is_finite() || q.abs() > 1e12 {
                    return None;
                }
                let col = b.column(j) * q;
                let mut bk = b.column_mut(k);
                bk -= col;
                let qi = q as i64;
                for r in 0..d {
                    u[(r, k)] -= qi * u[(r, j)];
                }
            }
        }
        let (mu, norms) = gram_schmidt(&b)?;
        if norms[k] >= (DELTA - mu[(k, k - 1)].powi(2)) * norms[k - 1] {
            k += 1;
        } else {
            b.swap_columns(k, k - 1);
            u.swap_columns(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Some(u)
}

/// Gram-Schmidt coefficients and squared norms of the orthogonalized
/// columns; None if a column degenerates.
fn gram_schmidt(b: &DMatrix<f64>) -> Option<(DMatrix<f64>, Vec<f64>)> {
    let d = b.ncols();
    let mut star: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut mu = DMatrix::zeros(d, d);
    let mut norms = vec![0.0; d];
    for i in 0..d {
        let mut v = b.column(i).into_owned();
        for j in 0..i {
            let m = b.column(i).dot(&star[j]) / norms[j];
            if !m.is_finite() {
                return None;
            }
            mu[(i, j)] = m;
            v -= &star[j] * m;
        }
        norms[i] = v.norm_squared();
        if !(norms[i] > 0.0) || !norms[i].is_finite() {
            return None;
        }
        star.push(v);
    }
    Some((mu, norms))
}

/// Enumerates `v ∈ L` with `|ιᵀ v| ≤ radius` and `|P⊥ v| ≤ slab` (Euclidean
/// norms) and returns the projected points `ιᵀ v` with their integer
/// pre-images. The slab truncation keeps only lattice vectors near the
/// embedded subspace, which is what makes high-codimension weight sums
/// tractable.
pub fn project_points(
    embedding: &Embedding,
    lattice: &Lattice,
    radius: f64,
    slab: f64,
    budget: EnumerationBudget,
) -> Result<PointSet> {
    let big_n = embedding.ambient_dim();
    let n = embedding.source_dim();
    if lattice.dim() != big_n {
        return Err(crate::Error::Dimension { expected: big_n, got: lattice.dim() });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(precondition("radius", "must be positive finite"));
    }
    // |ιᵀv| = λ|Qᵀv|, so the base constraint is a ball of radius r/λ on the
    // subspace components.
    let base_radius = radius / embedding.scale();

    let ambient = if big_n == n {
        ConvexBody::ball(DVector::zeros(n), base_radius)?
    } else {
        if !(slab > 0.0 && slab.is_finite()) {
            return Err(precondition("slab", "must be positive finite"));
        }
        // Box relaxation of the perpendicular ball: enumerate the cylinder
        // with per-axis heights `slab`, then filter by Euclidean perp norm.
        ConvexBody::cylinder(
            DVector::zeros(big_n),
            embedding.completed_rotation()?,
            crate::convex::CylinderBase::Ball { radius: base_radius },
            vec![slab; big_n - n],
        )?
    };
    let raw = enumerate_in_body(lattice, &ambient, budget)?;

    let mut points = Vec::new();
    let mut coeffs = Vec::new();
    let mut boundary = Vec::new();
    for i in 0..raw.len() {
        let v = raw.point(i);
        let perp_slack = if big_n == n { f64::INFINITY } else { slab - embedding.perp_norm(v) };
        if perp_slack < -MEMBERSHIP_MARGIN {
            continue;
        }
        let slack = perp_slack.min(ambient.slack(v));
        points.push(embedding.transpose_apply(v));
        coeffs.push(raw.coeffs(i).to_vec());
        boundary.push(slack <= MEMBERSHIP_MARGIN);
    }
    Ok(PointSet::new(points, coeffs, boundary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Rotation;
    use crate::rng::trial_rng;
    use nalgebra::DMatrix;
    use rand::Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn integer_grid_in_axis_box() {
        let lat = Lattice::scaled(2, 1.0).unwrap();
        let body =
            ConvexBody::bbox(v(&[0.0, 0.0]), Rotation::identity(2), vec![1.6, 1.6]).unwrap();
        let ps = enumerate_in_body(&lat, &body, EnumerationBudget::default()).unwrap();
        assert_eq!(ps.len(), 9);
        assert_eq!(ps.boundary_count(), 0);
    }

    #[test]
    fn integer_grid_in_rotated_thin_box() {
        // Long axis along (1,1)/√2, halfwidths (2, 0.1): catches the origin
        // and ±(1,1) only.
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let g = Rotation::try_new(DMatrix::from_row_slice(2, 2, &[c, -c, c, c])).unwrap();
        let lat = Lattice::scaled(2, 1.0).unwrap();
        let body = ConvexBody::bbox(v(&[0.0, 0.0]), g, vec![2.0, 0.1]).unwrap();
        let ps = enumerate_in_body(&lat, &body, EnumerationBudget::default()).unwrap();
        assert_eq!(ps.len(), 3);
        let pts: Vec<Vec<i64>> = (0..ps.len()).map(|i| ps.coeffs(i).to_vec()).collect();
        assert_eq!(pts, vec![vec![-1, -1], vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn integer_grid_in_small_ball() {
        let lat = Lattice::scaled(3, 1.0).unwrap();
        let body = ConvexBody::ball(v(&[0.0, 0.0, 0.0]), 1.01).unwrap();
        let ps = enumerate_in_body(&lat, &body, EnumerationBudget::default()).unwrap();
        assert_eq!(ps.len(), 7);
    }

    #[test]
    fn boundary_points_are_flagged() {
        let lat = Lattice::scaled(1, 1.0).unwrap();
        let body = ConvexBody::bbox(v(&[0.0]), Rotation::identity(1), vec![2.0]).unwrap();
        let ps = enumerate_in_body(&lat, &body, EnumerationBudget::default()).unwrap();
        assert_eq!(ps.len(), 5);
        assert_eq!(ps.boundary_count(), 2); // ±2 sit exactly on the boundary
        assert_eq!(ps.interior_count(), 3);
    }

    #[test]
    fn budget_exhaustion_reports_partial_count() {
        let lat = Lattice::scaled(2, 1.0).unwrap();
        let body = ConvexBody::ball(v(&[0.0, 0.0]), 100.0).unwrap();
        let budget = EnumerationBudget { max_points: 1000, max_nodes: 1_000_000 };
        match enumerate_in_body(&lat, &body, budget) {
            Err(crate::Error::Budget { budget: b, lower_bound }) => {
                assert_eq!(b, 1000);
                assert_eq!(lower_bound, 1000);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn thin_rotated_boxes_in_high_dimension_stay_within_budget() {
        // Without basis conditioning these planks exhaust the node budget:
        // the root box has side ~64 in every coordinate while the body is
        // 2⁻⁵ thin in three directions.
        let mut rng = trial_rng(31, 3);
        for trial in 0..5 {
            let g = Rotation::haar(6, &mut rng);
            let hw = vec![32.0, 32.0, 32.0, 1.0 / 32.0, 1.0 / 32.0, 1.0 / 32.0];
            let body = ConvexBody::bbox(DVector::zeros(6), g, hw).unwrap();
            let lat = Lattice::scaled(6, 1.0).unwrap();
            let ps = enumerate_in_body(&lat, &body, EnumerationBudget::default()).unwrap();
            assert!(ps.len() < 1000, "trial {trial}: {} points", ps.len());
            for i in 0..ps.len() {
                assert!((lat.point(ps.coeffs(i)) - ps.point(i)).norm() < 1e-9);
                assert!(body.slack(ps.point(i)) >= -2e-9);
            }
        }
    }

    #[test]
    fn conditioned_coefficients_match_tensor_oracle() {
        // 45° rotations in the (1,2) and (3,4) planes: three lattice points
        // per thin plane factor, nine in the product.
        let c = std::f64::consts::FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            c, -c, 0.0, 0.0,
            c, c, 0.0, 0.0,
            0.0, 0.0, c, -c,
            0.0, 0.0, c, c,
        ]);
        let g = Rotation::try_new(m).unwrap();
        let body = ConvexBody::bbox(DVector::zeros(4), g, vec![2.0, 0.1, 2.0, 0.1]).unwrap();
        let lat = Lattice::scaled(4, 1.0).unwrap();
        let ps = enumerate_in_body(&lat, &body, EnumerationBudget::default()).unwrap();
        assert_eq!(ps.len(), 9);
        for i in 0..ps.len() {
            assert!((lat.point(ps.coeffs(i)) - ps.point(i)).norm() < 1e-12);
        }
    }

    /// |gT ∩ Z^d| = |T ∩ g⁻¹Z^d| for rotated bodies: enumerate the rotated
    /// body on the integer lattice, and the original body on the rotated
    /// lattice.
    #[test]
    fn rotation_consistency() {
        let mut rng = trial_rng(31, 0);
        for trial in 0..20 {
            let d = 2 + (trial % 2);
            let g = Rotation::haar(d, &mut rng);
            let hw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.3..2.5)).collect();
            let center = DVector::from_fn(d, |_, _| rng.gen_range(-0.5..0.5));
            let body = ConvexBody::bbox(center, Rotation::haar(d, &mut rng), hw).unwrap();
            let a = enumerate_in_body(
                &Lattice::scaled(d, 1.0).unwrap(),
                &body.rotated(&g),
                EnumerationBudget::default(),
            )
            .unwrap();
            let b = enumerate_in_body(
                &Lattice::from_basis(g.inverse().matrix().clone()).unwrap(),
                &body,
                EnumerationBudget::default(),
            )
            .unwrap();
            assert_eq!(a.len(), b.len(), "trial {trial}");
        }
    }

    /// Brute force over the root box agrees with the pruned enumeration on
    /// random small bodies.
    #[test]
    fn agrees_with_brute_force() {
        let mut rng = trial_rng(31, 1);
        for trial in 0..300 {
            let d = 1 + (trial % 3);
            let scale = [0.5, 1.0, 0.25][trial % 3];
            let lat = Lattice::scaled(d, scale).unwrap();
            let center = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let body = match trial % 2 {
                0 => ConvexBody::bbox(
                    center,
                    Rotation::haar(d, &mut rng),
                    (0..d).map(|_| rng.gen_range(0.1..1.8)).collect(),
                )
                .unwrap(),
                _ => ConvexBody::ball(center, rng.gen_range(0.2..1.6)).unwrap(),
            };
            let ps = enumerate_in_body(&lat, &body, EnumerationBudget::default()).unwrap();

            // Brute force: scan the support-function box.
            let mut brute = 0usize;
            let binv = lat.inverse();
            let mut ranges = Vec::new();
            for i in 0..d {
                let u = binv.row(i).transpose();
                let hi = body.support(&u) + 1e-9;
                let lo = -body.support(&(-&u)) - 1e-9;
                ranges.push((lo.ceil() as i64, hi.floor() as i64));
            }
            let mut idx = vec![0i64; d];
            fn scan(
                k: usize,
                d: usize,
                ranges: &[(i64, i64)],
                idx: &mut Vec<i64>,
                lat: &Lattice,
                body: &ConvexBody,
                brute: &mut usize,
            ) {
                if k == d {
                    let x = lat.point(idx);
                    if body.slack(&x) >= -MEMBERSHIP_MARGIN {
                        *brute += 1;
                    }
                    return;
                }
                for z in ranges[k].0..=ranges[k].1 {
                    idx[k] = z;
                    scan(k + 1, d, ranges, idx, lat, body, brute);
                }
            }
            scan(0, d, &ranges, &mut idx, &lat, &body, &mut brute);
            assert_eq!(ps.len(), brute, "trial {trial} body {body:?}");
        }
    }

    #[test]
    fn identity_embedding_projects_interval() {
        let e = Embedding::identity(1);
        let lat = Lattice::scaled(1, 1.0).unwrap();
        let ps = project_points(&e, &lat, 2.5, 1.0, EnumerationBudget::default()).unwrap();
        assert_eq!(ps.len(), 5);
        let xs: Vec<f64> = ps.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    /// Projection through a random embedding matches a brute-force filter of
    /// the ambient lattice.
    #[test]
    fn projection_matches_brute_filter() {
        let mut rng = trial_rng(31, 2);
        for trial in 0..10 {
            let e = Embedding::random(4, 2, &mut rng).unwrap();
            let s = [1.0, 0.5][trial % 2];
            let lat = Lattice::scaled(4, s).unwrap();
            let radius = 1.5;
            let slab = 0.8;
            let ps = project_points(&e, &lat, radius, slab, EnumerationBudget::default()).unwrap();

            let mut brute = 0usize;
            let m = (2.5 / s).ceil() as i64;
            for a in -m..=m {
                for b in -m..=m {
                    for c in -m..=m {
                        for d in -m..=m {
                            let x = lat.point(&[a, b, c, d]);
                            if e.transpose_apply(&x).norm() <= radius + MEMBERSHIP_MARGIN
                                && e.perp_norm(&x) <= slab + MEMBERSHIP_MARGIN
                            {
                                brute += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(ps.len(), brute, "trial {trial}");
            // Projected points have pre-images that map back onto them.
            for i in 0..ps.len() {
                let v = lat.point(ps.coeffs(i));
                assert!((e.transpose_apply(&v) - ps.point(i)).norm() < 1e-12);
            }
        }
    }
}
