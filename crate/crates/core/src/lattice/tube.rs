//! Bracketed search for the heaviest tube or slab through a point set.
//!
//! The exact maximum over all tube positions is not computable directly, so
//! the search returns a certified bracket: the lower bound is the count (or
//! mass) of an explicitly constructed witness tube, and the upper bound comes
//! from scanning a direction grid with tubes fattened by the grid's covering
//! radius, so that every admissible tube is dominated by some fattened
//! grid tube.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::error::{precondition, Result};

use super::point_set::PointSet;

/// A tube (`axis_dim = 1`) or slab (`axis_dim = n−1`): the set of points
/// within `radius` of an `axis_dim`-dimensional affine subspace, clipped to
/// `length` along each long direction.
#[derive(Debug, Clone)]
pub struct Tube {
    /// Orthonormal long directions (1 for tubes, n−1 for slabs).
    pub axes: Vec<DVector<f64>>,
    /// A point on the core subspace (center of the witness window).
    pub anchor: DVector<f64>,
    pub radius: f64,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct TubeBracket {
    /// Mass of the witness tube: a certified lower bound for the supremum.
    pub lower: f64,
    /// Certified upper bound from the fattened direction grid (equals the
    /// total mass when the geometry admits no useful covering).
    pub upper: f64,
    pub witness: Tube,
    pub directions_scanned: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TubeSearchConfig {
    /// Number of grid directions (half-turn grid in the plane, integer
    /// directions of max coordinate `grid_level` in R³).
    pub n_dir: usize,
    /// Integer direction grid level for R³ (covering angle ≤ 2/grid_level).
    pub grid_level: i64,
    /// Cap on point-pair candidate directions for the lower bound.
    pub max_pair_candidates: usize,
}

impl Default for TubeSearchConfig {
    fn default() -> Self {
        Self { n_dir: 720, grid_level: 8, max_pair_candidates: 512 }
    }
}

/// Unweighted maximal tube count.
pub fn max_tube_count(
    points: &PointSet,
    axis_dim: usize,
    radius: f64,
    length: f64,
    config: TubeSearchConfig,
) -> Result<TubeBracket> {
    let w = vec![1.0; points.len()];
    max_tube_mass(points, &w, axis_dim, radius, length, config)
}

/// Weighted maximal tube mass.
pub fn max_tube_mass(
    points: &PointSet,
    masses: &[f64],
    axis_dim: usize,
    radius: f64,
    length: f64,
    config: TubeSearchConfig,
) -> Result<TubeBracket> {
    if points.is_empty() {
        return Err(precondition("points", "point set is empty"));
    }
    if masses.len() != points.len() {
        return Err(crate::Error::Dimension { expected: points.len(), got: masses.len() });
    }
    let n = points.point(0).len();
    if !(radius > 0.0) || !(length > 0.0) {
        return Err(precondition("tube", "radius and length must be positive"));
    }
    if n < 2 {
        return Err(precondition("points", "tube search needs ambient dimension ≥ 2"));
    }
    if axis_dim != 1 && axis_dim + 1 != n {
        return Err(precondition("axis_dim", "only lines (1) and hyperplanes (n−1) supported"));
    }

    let extent = points.iter().map(|p| p.norm()).fold(0.0f64, f64::max);
    let total: f64 = masses.iter().sum();

    // Candidate directions for the certified lower bound: the grid plus
    // deterministic point-pair differences (pairs are strided so huge sets
    // stay cheap); for slabs in R³, pair-difference cross products.
    let grid = direction_grid(n, &config)?;
    let mut candidates = grid.clone();
    candidates.extend(pair_directions(points, axis_dim, n, &config));

    let tube_mode = axis_dim == 1;
    // When the length window already covers the whole set, skip the
    // longitudinal machinery (every transverse window is automatically
    // length-admissible).
    let long_active = tube_mode && length < 2.0 * extent;
    let mut best = WindowBest::default();
    for u in &candidates {
        scan_direction(points, masses, u, tube_mode, long_active, radius, length, &mut best, false);
    }
    let witness = make_witness(&best, axis_dim, n, radius, length);

    // Fattened grid scan for the upper bound. A tube at angle ≤ δ from a
    // grid direction stays inside the grid tube with transverse halfwidth
    // radius + δ·(extent + radius) and length length + 2δ·(extent + radius).
    let delta = covering_angle(n, &config);
    let upper = if let Some(delta) = delta {
        let fat = delta * (extent + radius);
        let mut fat_best = WindowBest::default();
        for u in &grid {
            scan_direction(
                points,
                masses,
                u,
                tube_mode,
                long_active,
                radius + fat,
                length + 2.0 * fat,
                &mut fat_best,
                true,
            );
        }
        fat_best.mass.min(total)
    } else {
        total
    };

    Ok(TubeBracket {
        lower: best.mass,
        upper: upper.max(best.mass),
        witness,
        directions_scanned: candidates.len(),
    })
}

/// Maximum number of transverse grid cells promoted to witness anchors in
/// the fixed-direction search.
const MAX_ANCHOR_CELLS: usize = 48;

/// Transverse grid cell index (unused trailing coordinates stay 0).
type Cell = [i64; 4];

/// Certified witness mass for tubes with a fixed axis direction, in ambient
/// dimension 2 through 5: the heaviest window of transverse radius `radius`
/// and longitudinal extent `length` around a line parallel to `direction`
/// that the search can exhibit. The result is a lower bound for the
/// directional supremum. Anchor candidates are the mass centroids of
/// occupied transverse grid cells on two shifted grids, midpoints between
/// neighboring occupied cells, the heaviest single point, and the line
/// through the origin; each anchor is refined with exact disk membership and
/// an exact longitudinal sliding window.
pub fn max_tube_mass_in_direction(
    points: &PointSet,
    masses: &[f64],
    direction: &DVector<f64>,
    radius: f64,
    length: f64,
) -> Result<f64> {
    if points.is_empty() {
        return Err(precondition("points", "point set is empty"));
    }
    if masses.len() != points.len() {
        return Err(crate::Error::Dimension { expected: points.len(), got: masses.len() });
    }
    let n = points.point(0).len();
    if direction.len() != n {
        return Err(crate::Error::Dimension { expected: n, got: direction.len() });
    }
    if !(2..=5).contains(&n) {
        return Err(precondition("points", "directional tube search supports dimensions 2..=5"));
    }
    if !(radius > 0.0) || !(length > 0.0) {
        return Err(precondition("tube", "radius and length must be positive"));
    }
    let norm = direction.norm();
    if norm <= 1e-12 {
        return Err(precondition("tube", "direction must be nonzero"));
    }
    let u = direction / norm;
    let frame = complement_basis(&u);
    let k = n - 1;
    let p = points.len();

    let mut trans: Vec<[f64; 4]> = Vec::with_capacity(p);
    let mut longi: Vec<f64> = Vec::with_capacity(p);
    for pt in points.iter() {
        let mut t = [0.0f64; 4];
        for (c, e) in frame.iter().enumerate() {
            t[c] = pt.dot(e);
        }
        trans.push(t);
        longi.push(pt.dot(&u));
    }

    let h = radius;
    let cell_of = |t: &[f64; 4], off: f64| {
        let mut c = [0i64; 4];
        for a in 0..k {
            c[a] = ((t[a] - off) / h).floor() as i64;
        }
        c
    };

    // Mass, mass-weighted coordinate sums, and members per occupied cell.
    // Accumulation follows point order, so sums are independent of hash
    // iteration order and the search stays bitwise reproducible.
    #[derive(Default)]
    struct CellData {
        mass: f64,
        tsum: [f64; 4],
        members: Vec<u32>,
    }
    let mut grid0: HashMap<Cell, CellData> = HashMap::new();
    let mut grid_half: HashMap<Cell, (f64, [f64; 4])> = HashMap::new();
    for i in 0..p {
        let m = masses[i];
        let d = grid0.entry(cell_of(&trans[i], 0.0)).or_default();
        d.mass += m;
        for a in 0..k {
            d.tsum[a] += m * trans[i][a];
        }
        d.members.push(i as u32);
        let e = grid_half.entry(cell_of(&trans[i], h / 2.0)).or_insert((0.0, [0.0; 4]));
        e.0 += m;
        for a in 0..k {
            e.1[a] += m * trans[i][a];
        }
    }

    // Rank cells by mass with a deterministic tie order.
    let mut ranked: Vec<(f64, Cell, u8)> = grid0
        .iter()
        .map(|(c, d)| (d.mass, *c, 0u8))
        .chain(grid_half.iter().map(|(c, (m, _))| (*m, *c, 1u8)))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    ranked.truncate(MAX_ANCHOR_CELLS);

    let centroid = |mass: f64, tsum: &[f64; 4]| {
        let mut c = [0.0f64; 4];
        if mass > 0.0 {
            for a in 0..k {
                c[a] = tsum[a] / mass;
            }
        }
        c
    };
    let mut anchors: Vec<[f64; 4]> = vec![[0.0; 4]];
    let heaviest = (0..p).max_by(|&a, &b| masses[a].total_cmp(&masses[b])).unwrap_or(0);
    anchors.push(trans[heaviest]);
    for (_, c, g) in &ranked {
        let cen = if *g == 0 {
            let d = &grid0[c];
            centroid(d.mass, &d.tsum)
        } else {
            let (m, s) = &grid_half[c];
            centroid(*m, s)
        };
        anchors.push(cen);
        if *g == 0 {
            // Midpoints with occupied neighbors catch clusters straddling a
            // cell boundary.
            let lo = [c[0] - 1, c[1] - 1, c[2] - 1, c[3] - 1];
            let hi = [c[0] + 1, c[1] + 1, c[2] + 1, c[3] + 1];
            for_each_cell(&lo, &hi, k, |nc| {
                if nc != c {
                    if let Some(nd) = grid0.get(nc) {
                        let ncen = centroid(nd.mass, &nd.tsum);
                        let mut mid = [0.0f64; 4];
                        for a in 0..k {
                            mid[a] = (cen[a] + ncen[a]) / 2.0;
                        }
                        anchors.push(mid);
                    }
                }
            });
        }
    }

    let rr = (radius * (1.0 + 1e-9)).powi(2);
    let span = longi.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - longi.iter().cloned().fold(f64::INFINITY, f64::min);
    let long_active = length < span;
    let mut best = 0.0f64;
    let mut svals: Vec<(f64, f64)> = Vec::new();
    for a in &anchors {
        svals.clear();
        let mut lo = [0i64; 4];
        let mut hi = [0i64; 4];
        for c in 0..k {
            lo[c] = ((a[c] - radius) / h).floor() as i64;
            hi[c] = ((a[c] + radius) / h).floor() as i64;
        }
        for_each_cell(&lo, &hi, k, |cell| {
            if let Some(d) = grid0.get(cell) {
                for &i in &d.members {
                    let i = i as usize;
                    let mut d2 = 0.0;
                    for c in 0..k {
                        let dd = trans[i][c] - a[c];
                        d2 += dd * dd;
                    }
                    if d2 <= rr {
                        svals.push((longi[i], masses[i]));
                    }
                }
            }
        });
        if svals.is_empty() {
            continue;
        }
        if long_active {
            svals.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut slo = 0usize;
            let mut smass = 0.0;
            for shi in 0..svals.len() {
                smass += svals[shi].1;
                while svals[shi].0 - svals[slo].0 > length {
                    smass -= svals[slo].1;
                    slo += 1;
                }
                best = best.max(smass);
            }
        } else {
            best = best.max(svals.iter().map(|x| x.1).sum());
        }
    }
    Ok(best)
}

/// Visits every integer cell in the axis box `lo..=hi` over the first `k`
/// coordinates.
fn for_each_cell(lo: &Cell, hi: &Cell, k: usize, mut f: impl FnMut(&Cell)) {
    let mut cur = *lo;
    loop {
        f(&cur);
        let mut c = 0;
        loop {
            if c == k {
                return;
            }
            cur[c] += 1;
            if cur[c] <= hi[c] {
                break;
            }
            cur[c] = lo[c];
            c += 1;
        }
    }
}

/// Orthonormal basis of the hyperplane perpendicular to the unit vector `u`,
/// built by Gram-Schmidt from the standard basis with the most-aligned
/// coordinate dropped.
fn complement_basis(u: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = u.len();
    let mut drop = 0;
    for i in 1..n {
        if u[i].abs() > u[drop].abs() {
            drop = i;
        }
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    for i in (0..n).filter(|&i| i != drop) {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for _ in 0..2 {
            let d = v.dot(u);
            v -= u * d;
            for b in &basis {
                let d = v.dot(b);
                v -= b * d;
            }
        }
        v /= v.norm();
        basis.push(v);
    }
    basis
}

#[derive(Debug, Clone, Default)]
struct WindowBest {
    mass: f64,
    /// Direction (tube axis or slab normal) realizing the bound.
    dir: Option<DVector<f64>>,
    /// Transverse window center (scalar for slabs/planar tubes; the two
    /// transverse coordinates for tubes in R³).
    t_center: [f64; 2],
    /// Longitudinal window center.
    s_center: f64,
}

/// Slides a window of transverse halfwidth `radius` (and longitudinal extent
/// `length` when `long_active`) over the projections onto `u` and its
/// complement, recording the best mass. With `block_upper` the R³ tube scan
/// switches to covering-block sums (valid upper bounds for arbitrarily
/// positioned tubes); the planar and slab scans are exact maxima over window
/// positions either way.
#[allow(clippy::too_many_arguments)]
fn scan_direction(
    points: &PointSet,
    masses: &[f64],
    u: &DVector<f64>,
    tube_mode: bool,
    long_active: bool,
    radius: f64,
    length: f64,
    best: &mut WindowBest,
    block_upper: bool,
) {
    let n = u.len();
    if tube_mode && n == 3 {
        scan_tube_r3(points, masses, u, radius, length, best, block_upper);
        return;
    }
    // Planar tubes and hyperplane slabs: a single transverse coordinate.
    // For tubes in the plane the transverse direction is u⊥; for slabs the
    // "direction" u IS the normal, so the transverse coordinate is ⟨p, u⟩.
    let transverse: Vec<f64> = if tube_mode {
        debug_assert_eq!(n, 2);
        points.iter().map(|p| -p[1] * u[0] + p[0] * u[1]).collect()
    } else {
        points.iter().map(|p| p.dot(u)).collect()
    };

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| transverse[a].total_cmp(&transverse[b]));

    if !long_active {
        // Pure transverse sliding window; the maximum over all window
        // positions is attained with the left edge at a data point.
        let width = 2.0 * radius;
        let mut lo = 0usize;
        let mut mass = 0.0;
        for hi in 0..order.len() {
            mass += masses[order[hi]];
            while transverse[order[hi]] - transverse[order[lo]] > width {
                mass -= masses[order[lo]];
                lo += 1;
            }
            if mass > best.mass {
                let t_mid = (transverse[order[hi]] + transverse[order[lo]]) / 2.0;
                *best =
                    WindowBest { mass, dir: Some(u.clone()), t_center: [t_mid, 0.0], s_center: 0.0 };
            }
        }
        return;
    }

    // Length-constrained tube in the plane: for each transverse window,
    // slide a longitudinal window. Quadratic in the window size; only used
    // when the length genuinely bites.
    let s_coord: Vec<f64> = points.iter().map(|p| p.dot(u)).collect();
    let width = 2.0 * radius;
    let mut lo = 0usize;
    let mut in_window: Vec<usize> = Vec::new();
    for hi in 0..order.len() {
        in_window.push(order[hi]);
        while transverse[order[hi]] - transverse[order[lo]] > width {
            let pos = in_window.iter().position(|&i| i == order[lo]).unwrap();
            in_window.remove(pos);
            lo += 1;
        }
        let t_mid = (transverse[order[hi]] + transverse[order[lo]]) / 2.0;
        let mut svals: Vec<(f64, f64)> = in_window.iter().map(|&i| (s_coord[i], masses[i])).collect();
        svals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut slo = 0usize;
        let mut smass = 0.0;
        for shi in 0..svals.len() {
            smass += svals[shi].1;
            while svals[shi].0 - svals[slo].0 > length {
                smass -= svals[slo].1;
                slo += 1;
            }
            if smass > best.mass {
                *best = WindowBest {
                    mass: smass,
                    dir: Some(u.clone()),
                    t_center: [t_mid, 0.0],
                    s_center: (svals[shi].0 + svals[slo].0) / 2.0,
                };
            }
        }
    }
}

/// Tube scan in R³ over a transverse cell grid of side 2·radius with aligned
/// longitudinal windows. Lower mode verifies exact membership in a witness
/// tube anchored at each occupied cell center; upper mode sums 2×2 cell
/// blocks over doubled longitudinal windows, which dominates every tube of
/// the given radius and length regardless of position.
fn scan_tube_r3(
    points: &PointSet,
    masses: &[f64],
    u: &DVector<f64>,
    radius: f64,
    length: f64,
    best: &mut WindowBest,
    block_upper: bool,
) {
    let (e1, e2) = complement_frame(u);
    let cell = 2.0 * radius;
    let mut buckets: HashMap<(i64, i64, i64), f64> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let c1 = (p.dot(&e1) / cell).floor() as i64;
        let c2 = (p.dot(&e2) / cell).floor() as i64;
        let cs = (p.dot(u) / length).floor() as i64;
        *buckets.entry((c1, c2, cs)).or_insert(0.0) += masses[i];
    }

    if block_upper {
        // Any transverse disk of radius `radius` fits in an axis square of
        // side 2·radius, which lies inside the 2×2 block of cells containing
        // its lower-left corner; any longitudinal interval of `length` lies
        // inside two adjacent aligned windows.
        for &(c1, c2, cs) in buckets.keys() {
            let mut mass = 0.0;
            for d1 in 0..2 {
                for d2 in 0..2 {
                    for ds in 0..2 {
                        if let Some(&m) = buckets.get(&(c1 + d1, c2 + d2, cs + ds)) {
                            mass += m;
                        }
                    }
                }
            }
            if mass > best.mass {
                let t1c = (c1 as f64 + 1.0) * cell;
                let t2c = (c2 as f64 + 1.0) * cell;
                let sc = (cs as f64 + 1.0) * length;
                *best =
                    WindowBest { mass, dir: Some(u.clone()), t_center: [t1c, t2c], s_center: sc };
            }
        }
        return;
    }

    // Lower mode: anchor a tube at the centroid of each occupied transverse
    // cell, take the points inside the transverse disk exactly, and slide an
    // exact longitudinal window. Quadratic in the point count, which the
    // experiments avoid by using the planar scan or their own bucketing.
    let mut tcells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let c1 = (p.dot(&e1) / cell).floor() as i64;
        let c2 = (p.dot(&e2) / cell).floor() as i64;
        tcells.entry((c1, c2)).or_default().push(i);
    }
    for members in tcells.values() {
        let mut t1c = 0.0;
        let mut t2c = 0.0;
        for &i in members {
            t1c += points.point(i).dot(&e1);
            t2c += points.point(i).dot(&e2);
        }
        t1c /= members.len() as f64;
        t2c /= members.len() as f64;
        let mut svals: Vec<(f64, f64)> = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let d1 = p.dot(&e1) - t1c;
            let d2 = p.dot(&e2) - t2c;
            if d1 * d1 + d2 * d2 <= radius * radius + 1e-12 {
                svals.push((p.dot(u), masses[i]));
            }
        }
        svals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut slo = 0usize;
        let mut smass = 0.0;
        for shi in 0..svals.len() {
            smass += svals[shi].1;
            while svals[shi].0 - svals[slo].0 > length {
                smass -= svals[slo].1;
                slo += 1;
            }
            if smass > best.mass {
                *best = WindowBest {
                    mass: smass,
                    dir: Some(u.clone()),
                    t_center: [t1c, t2c],
                    s_center: (svals[shi].0 + svals[slo].0) / 2.0,
                };
            }
        }
    }
}

fn complement_frame(u: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let n = u.len();
    debug_assert_eq!(n, 3);
    let pick = if u[0].abs() < 0.9 { 0 } else { 1 };
    let mut e1 = DVector::zeros(n);
    e1[pick] = 1.0;
    let d = e1.dot(u);
    e1 -= u * d;
    e1 /= e1.norm();
    let e2 = DVector::from_vec(vec![
        u[1] * e1[2] - u[2] * e1[1],
        u[2] * e1[0] - u[0] * e1[2],
        u[0] * e1[1] - u[1] * e1[0],
    ]);
    (e1, e2)
}

fn direction_grid(n: usize, config: &TubeSearchConfig) -> Result<Vec<DVector<f64>>> {
    match n {
        2 => {
            let m = config.n_dir.max(2);
            Ok((0..m)
                .map(|j| {
                    let th = std::f64::consts::PI * j as f64 / m as f64;
                    DVector::from_vec(vec![th.cos(), th.sin()])
                })
                .collect())
        }
        3 => {
            let m = config.grid_level.max(2);
            let mut dirs = Vec::new();
            for a in -m..=m {
                for b in -m..=m {
                    for c in 0..=m {
                        if c == 0 && (b < 0 || (b == 0 && a <= 0)) {
                            continue; // identify antipodes
                        }
                        if gcd3(a.abs(), b.abs(), c) != 1 {
                            continue;
                        }
                        let v = DVector::from_vec(vec![a as f64, b as f64, c as f64]);
                        let norm = v.norm();
                        dirs.push(v / norm);
                    }
                }
            }
            Ok(dirs)
        }
        _ => Err(precondition("points", "bracketed tube search supports dimensions 2 and 3")),
    }
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    fn gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    gcd(gcd(a, b), c).max(1)
}

/// Covering angle of the direction grid (an upper bound on the angle from
/// any direction to its nearest grid direction), or None when no certified
/// bound is available.
fn covering_angle(n: usize, config: &TubeSearchConfig) -> Option<f64> {
    match n {
        2 => Some(std::f64::consts::PI / (2.0 * config.n_dir.max(2) as f64)),
        // Rounding m·u to the integer grid gives |u − v/|v|| ≤ √3/m, and
        // arcsin(√3/m) ≤ 2/m for m ≥ 4.
        3 if config.grid_level >= 4 => Some(2.0 / config.grid_level as f64),
        _ => None,
    }
}

fn pair_directions(
    points: &PointSet,
    axis_dim: usize,
    n: usize,
    config: &TubeSearchConfig,
) -> Vec<DVector<f64>> {
    let p = points.len();
    if p < 2 || config.max_pair_candidates == 0 {
        return Vec::new();
    }
    let total_pairs = p * (p - 1) / 2;
    let take = config.max_pair_candidates.min(total_pairs);
    let stride = (total_pairs / take).max(1);
    let mut dirs = Vec::with_capacity(take);
    let mut flat = 0usize;
    'outer: for i in 0..p {
        for j in (i + 1)..p {
            if flat % stride == 0 {
                let d = points.point(j) - points.point(i);
                let norm = d.norm();
                if norm > 1e-12 {
                    let dir = d / norm;
                    if axis_dim == 1 {
                        dirs.push(dir);
                    } else if n == 2 {
                        // Slab normal perpendicular to the pair direction.
                        dirs.push(DVector::from_vec(vec![-dir[1], dir[0]]));
                    } else if n == 3 {
                        // Normals from cross products with the previous pair
                        // direction, so slabs through point pairs are found.
                        if let Some(prev) = dirs.last().cloned() {
                            let c = DVector::from_vec(vec![
                                dir[1] * prev[2] - dir[2] * prev[1],
                                dir[2] * prev[0] - dir[0] * prev[2],
                                dir[0] * prev[1] - dir[1] * prev[0],
                            ]);
                            let cn = c.norm();
                            if cn > 1e-9 {
                                dirs.push(c / cn);
                            }
                        } else {
                            dirs.push(dir);
                        }
                    }
                }
                if dirs.len() >= take {
                    break 'outer;
                }
            }
            flat += 1;
        }
    }
    dirs
}

fn make_witness(best: &WindowBest, axis_dim: usize, n: usize, radius: f64, length: f64) -> Tube {
    let dir = best.dir.clone().unwrap_or_else(|| {
        let mut e = DVector::zeros(n);
        e[0] = 1.0;
        e
    });
    let (axes, anchor) = if axis_dim == 1 {
        if n == 2 {
            let perp = DVector::from_vec(vec![-dir[1], dir[0]]);
            (vec![dir.clone()], &perp * best.t_center[0] + &dir * best.s_center)
        } else {
            let (e1, e2) = complement_frame(&dir);
            (
                vec![dir.clone()],
                &e1 * best.t_center[0] + &e2 * best.t_center[1] + &dir * best.s_center,
            )
        }
    } else {
        // Slab: axes span the hyperplane, dir is the normal.
        let axes: Vec<DVector<f64>> = if n == 2 {
            vec![DVector::from_vec(vec![-dir[1], dir[0]])]
        } else {
            let (e1, e2) = complement_frame(&dir);
            vec![e1, e2]
        };
        (axes, &dir * best.t_center[0])
    };
    Tube { axes, anchor, radius, length }
}
