//! Bracketed strip maximal: certified lower/upper bounds for the supremum,
//! over all unit neighborhoods of lines in the plane, of the mass a
//! projected-lattice weight assigns to the strip.
//!
//! The weight's generating sites carry radially symmetric in-plane lumps
//! whose transverse marginal is the kernel bundle's `marg1` profile, so the
//! strip mass of the site decomposition is a sum of one-dimensional marginal
//! integrals. The search brackets the supremum over directions and offsets
//! with a branch-and-bound angular sweep:
//!
//! - per angular interval, sites are binned by their transverse coordinate
//!   at the interval's center direction, and a conservative capture kernel
//!   (upper cumulative marginal tables, widened by the bin width and by the
//!   interval's rotation fattening `δθ·max|q|`) dominates every strip whose
//!   direction lies in the interval;
//! - the interval with the largest bound is refined until the rotation
//!   fattening is negligible; the surviving bound certifies the global
//!   upper, because every other interval's strips stay below its bound;
//! - the lower bound is the exact (lower-table) capture of explicit witness
//!   strips at the winning directions.
//!
//! Only the diagonal site decomposition is bracketed; the nonnegative
//! off-diagonal remainder of the weight is globally bounded by
//! [`Weight::far_mass`] and reported separately by the caller.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{precondition, Result};
use crate::mtlab::bump::WeightKernel;
use crate::mtlab::weight::{Weight, DUAL_CUT};

/// Number of perpendicular-distance classes the capture tables resolve.
const D_CLASSES: usize = 16;
/// Node spacing of the cumulative capture tables (kernel units).
const TAU_STEP: f64 = 1.0 / 32.0;
/// Transverse histogram bin width (plane units).
const BIN_WIDTH: f64 = 0.25;
/// Angular intervals of the initial sweep over `[0, π)`.
const COARSE_DIRECTIONS: usize = 720;
/// An interval is certified once its rotation fattening `δθ·max|q|` is below
/// this transverse length.
const FAT_TARGET: f64 = 0.02;
/// Hard cap on interval evaluations; past it the current maximal bound is
/// returned (still a valid upper bound, just less refined).
const MAX_INTERVAL_EVALS: usize = 20_000;
/// Total mass budget sacrificed to capture-kernel tail trimming.
const TRIM_BUDGET: f64 = 1e-3;
/// Multiplicative guard on the table integrands against interpolation
/// wiggle between stored profile nodes.
const TABLE_SLACK: f64 = 1e-3;

/// Certified bracket for the strip maximal of a weight's site measure.
#[derive(Debug, Clone)]
pub struct StripMaximalBracket {
    /// Exact capture of the best witness strip found: a lower bound for the
    /// supremum.
    pub lower: f64,
    /// Conservative bound dominating every strip in every direction.
    pub upper: f64,
    /// Long direction (radians in `[0, π)`) of the witness strip.
    pub witness_angle: f64,
    /// Signed transverse offset of the witness strip's center line.
    pub witness_offset: f64,
    /// Angular intervals evaluated by the sweep.
    pub directions_scanned: usize,
}

/// Brackets `sup` over 1-neighborhoods of `l`-planes of the site mass of
/// `w`. Planar weights only: `l` must lie in `{1, n−1} = {1}`.
pub fn maximal_l(w: &Weight, l: usize) -> Result<StripMaximalBracket> {
    let n = w.dim();
    if n != 2 {
        return Err(precondition(
            "w",
            format!("strip maximal is implemented for planar weights (n = 2), got n = {n}"),
        ));
    }
    if l != 1 {
        return Err(precondition(
            "l",
            format!("supported plane dimensions are l ∈ {{1, n−1}} = {{1}}, got l = {l}"),
        ));
    }
    let tables = CaptureTables::build(w.kernel());
    let sites = StripSites::collect(w, &tables)?;
    bracket_sites(&sites, &tables, w.embedding().scale())
}

/// Per-class cumulative transverse marginal tables. Class `k` covers
/// perpendicular distances `d ∈ [k, k+1]·Δd`; `hi`/`lo` bracket
/// `∫₀^τ marg1(√(z² + d²)) dz` uniformly over the class.
struct CaptureTables {
    class_width: f64,
    hi: Vec<Vec<f64>>,
    lo: Vec<Vec<f64>>,
    /// Kernel-unit radius of the marginal's support.
    reach: f64,
}

impl CaptureTables {
    fn build(kernel: &WeightKernel) -> Self {
        let marg = &kernel.marg1;
        let step = marg.step();
        let values = marg.values();
        let reach = marg.support();
        let nodes = (reach / TAU_STEP).ceil() as usize + 1;
        let class_width = DUAL_CUT / D_CLASSES as f64;

        // Max/min of the stored marginal over the node window covering
        // `t ∈ [t_lo, t_hi]`, padded one node on each side.
        let window = |t_lo: f64, t_hi: f64| -> (f64, f64) {
            let i0 = ((t_lo / step).floor() as isize - 1).max(0) as usize;
            let i1 = (t_hi / step).ceil() as usize + 1;
            let mut mx = 0.0f64;
            let mut mn = f64::INFINITY;
            for i in i0..=i1 {
                let v = values.get(i).copied().unwrap_or(0.0).max(0.0);
                mx = mx.max(v);
                mn = mn.min(v);
            }
            (mx, mn)
        };

        let mut hi = Vec::with_capacity(D_CLASSES);
        let mut lo = Vec::with_capacity(D_CLASSES);
        for k in 0..D_CLASSES {
            let d1 = k as f64 * class_width;
            let d2 = d1 + class_width;
            let mut f_hi = vec![0.0; nodes];
            let mut f_lo = vec![0.0; nodes];
            for (i, (fh, fl)) in f_hi.iter_mut().zip(f_lo.iter_mut()).enumerate() {
                let tau = i as f64 * TAU_STEP;
                let (mx, mn) = window(tau.hypot(d1), tau.hypot(d2));
                *fh = mx * (1.0 + TABLE_SLACK);
                *fl = (mn * (1.0 - TABLE_SLACK)).max(0.0);
            }
            let mut cum_hi = vec![0.0; nodes];
            let mut cum_lo = vec![0.0; nodes];
            for i in 1..nodes {
                cum_hi[i] = cum_hi[i - 1] + TAU_STEP * f_hi[i - 1].max(f_hi[i]);
                cum_lo[i] = cum_lo[i - 1] + TAU_STEP * f_lo[i - 1].min(f_lo[i]);
            }
            hi.push(cum_hi);
            lo.push(cum_lo);
        }
        Self { class_width, hi, lo, reach }
    }

    fn class_of(&self, d: f64) -> usize {
        ((d / self.class_width) as usize).min(D_CLASSES - 1)
    }

    /// Upper bound for `∫₀^x`, `x ≥ 0` in kernel units.
    fn cum_hi(&self, class: usize, x: f64) -> f64 {
        let t = &self.hi[class];
        let idx = ((x / TAU_STEP).ceil() as usize).min(t.len() - 1);
        t[idx]
    }

    /// Lower bound for `∫₀^x`, `x ≥ 0`.
    fn cum_lo(&self, class: usize, x: f64) -> f64 {
        let t = &self.lo[class];
        let idx = ((x / TAU_STEP) as usize).min(t.len() - 1);
        t[idx]
    }

    /// Signed antiderivative bounds: `Φ(x) = sign(x)·∫₀^{|x|}`.
    fn phi_hi(&self, class: usize, x: f64) -> f64 {
        if x >= 0.0 {
            self.cum_hi(class, x)
        } else {
            -self.cum_lo(class, -x)
        }
    }

    fn phi_lo(&self, class: usize, x: f64) -> f64 {
        if x >= 0.0 {
            self.cum_lo(class, x)
        } else {
            -self.cum_hi(class, -x)
        }
    }

    /// Bounds for the marginal integral over `[a, b]` (kernel units).
    fn capture_hi(&self, class: usize, a: f64, b: f64) -> f64 {
        (self.phi_hi(class, b) - self.phi_lo(class, a)).max(0.0)
    }

    fn capture_lo(&self, class: usize, a: f64, b: f64) -> f64 {
        (self.phi_lo(class, b) - self.phi_hi(class, a)).max(0.0)
    }

    /// Smallest table radius past which the one-sided residual
    /// `∫_τ^∞` (upper table) is at most `level`.
    fn trim_radius(&self, class: usize, level: f64) -> f64 {
        let t = &self.hi[class];
        let last = *t.last().unwrap();
        for (i, v) in t.iter().enumerate() {
            if last - v <= level {
                return i as f64 * TAU_STEP;
            }
        }
        self.reach
    }
}

/// Positive-mass generating sites in sweep-friendly layout.
struct StripSites {
    xs: Vec<f64>,
    ys: Vec<f64>,
    amp: Vec<f64>,
    mass: Vec<f64>,
    class: Vec<u16>,
    /// Largest site radius `max|q|`.
    ext: f64,
    amp_total: f64,
}

impl StripSites {
    fn collect(w: &Weight, tables: &CaptureTables) -> Result<Self> {
        let kernel = w.kernel();
        let pos = w.site_positions();
        let masses = w.site_masses();
        let perp = w.site_perp_distances();
        let mut out = Self {
            xs: Vec::new(),
            ys: Vec::new(),
            amp: Vec::new(),
            mass: Vec::new(),
            class: Vec::new(),
            ext: 0.0,
            amp_total: 0.0,
        };
        for i in 0..w.site_count() {
            let m = masses[i];
            if m <= 0.0 {
                continue;
            }
            let (x, y) = (pos[2 * i], pos[2 * i + 1]);
            let a = m / kernel.psi.eval(perp[i]);
            out.xs.push(x);
            out.ys.push(y);
            out.amp.push(a);
            out.mass.push(m);
            out.class.push(tables.class_of(perp[i]) as u16);
            out.ext = out.ext.max(x.hypot(y));
            out.amp_total += a;
        }
        if out.xs.is_empty() {
            return Err(crate::Error::Degenerate("weight has no positive-mass sites".into()));
        }
        Ok(out)
    }

    fn len(&self) -> usize {
        self.xs.len()
    }
}

/// Queue entry of the angular branch-and-bound: one direction interval with
/// a bound dominating every strip whose direction lies inside it. Ordered by
/// bound (then deterministically by interval start) for the max-heap.
struct Interval {
    bound: f64,
    lo: f64,
    hi: f64,
    /// Histogram bin of the bounding convolution's argmax, seeding the
    /// witness offset search.
    arg_bin: u32,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// Shared scratch for interval evaluations.
struct Sweep<'a> {
    sites: &'a StripSites,
    tables: &'a CaptureTables,
    lambda: f64,
    bins: usize,
    t0: f64,
    acc: Vec<f64>,
    touched: Vec<u32>,
    out: Vec<f64>,
    /// Per-class one-sided trim radius (kernel units) for the capture
    /// kernels; the sacrificed tail mass is covered by `slack`.
    trim: [f64; D_CLASSES],
    slack: f64,
}

impl<'a> Sweep<'a> {
    fn new(sites: &'a StripSites, tables: &'a CaptureTables, lambda: f64) -> Self {
        let bins = (2.0 * (sites.ext + 2.0 * BIN_WIDTH) / BIN_WIDTH).ceil() as usize + 4;
        let t0 = -(sites.ext + 2.0 * BIN_WIDTH) - 2.0 * BIN_WIDTH;
        let level = TRIM_BUDGET / sites.amp_total;
        let mut trim = [0.0; D_CLASSES];
        for (k, t) in trim.iter_mut().enumerate() {
            *t = tables.trim_radius(k, level);
        }
        Self {
            sites,
            tables,
            lambda,
            bins,
            t0,
            acc: vec![0.0; D_CLASSES * bins],
            touched: Vec::new(),
            out: vec![0.0; bins],
            trim,
            slack: TRIM_BUDGET,
        }
    }

    /// Conservative bound for every strip with direction within `delta` of
    /// `theta`, plus the convolution argmax bin for witness seeding.
    fn interval_bound(&mut self, theta: f64, delta: f64) -> (f64, u32) {
        let (s, c) = theta.sin_cos();
        let (ux, uy) = (-s, c);
        let fat = delta * self.sites.ext;
        let rho = 1.0 + fat;
        let inv_h = 1.0 / BIN_WIDTH;

        let mut class_seen = [false; D_CLASSES];
        for i in 0..self.sites.len() {
            let t = self.sites.xs[i] * ux + self.sites.ys[i] * uy;
            let idx = ((t - self.t0) * inv_h) as usize;
            let slot = self.sites.class[i] as usize * self.bins + idx;
            if self.acc[slot] == 0.0 {
                self.touched.push(slot as u32);
            }
            self.acc[slot] += self.sites.amp[i];
            class_seen[self.sites.class[i] as usize] = true;
        }

        self.out.fill(0.0);
        for (k, seen) in class_seen.iter().enumerate() {
            if !*seen {
                continue;
            }
            let half = ((self.trim[k] / self.lambda + rho) * inv_h).ceil() as usize + 1;
            let kern: Vec<f64> = (0..=half)
                .map(|d| {
                    let a = self.lambda * (-((d as f64) + 1.0) * BIN_WIDTH - rho);
                    let b = self.lambda * (-((d as f64) - 1.0) * BIN_WIDTH + rho);
                    self.tables.capture_hi(k, a, b)
                })
                .collect();
            let row = &self.acc[k * self.bins..(k + 1) * self.bins];
            for (c, o) in self.out.iter_mut().enumerate() {
                let mut v = row[c] * kern[0];
                for (d, g) in kern.iter().enumerate().skip(1) {
                    let mut m = 0.0;
                    if c >= d {
                        m += row[c - d];
                    }
                    if c + d < self.bins {
                        m += row[c + d];
                    }
                    v += m * g;
                }
                *o += v;
            }
        }

        let mut best = 0.0f64;
        let mut arg = 0usize;
        for (c, &v) in self.out.iter().enumerate() {
            if v > best {
                best = v;
                arg = c;
            }
        }
        for &slot in &self.touched {
            self.acc[slot as usize] = 0.0;
        }
        self.touched.clear();
        (best + self.slack, arg as u32)
    }

    /// Exact lower-table capture of the best strip at direction `theta` with
    /// offsets scanned around `center`: a certified lower bound for the
    /// supremum, with the realized offset.
    fn witness(&self, theta: f64, center: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let (ux, uy) = (-s, c);
        let ts: Vec<f64> =
            (0..self.sites.len()).map(|i| self.sites.xs[i] * ux + self.sites.ys[i] * uy).collect();
        let mut candidates: Vec<f64> =
            (-16..=16).map(|j| center + j as f64 * BIN_WIDTH / 8.0).collect();
        // The heaviest single site's own transverse coordinate.
        if let Some(i) = (0..self.sites.len())
            .max_by(|&a, &b| self.sites.mass[a].total_cmp(&self.sites.mass[b]))
        {
            candidates.push(ts[i]);
        }
        let mut best = (0.0f64, center);
        for &cand in &candidates {
            let mut v = 0.0;
            for (i, &t) in ts.iter().enumerate() {
                let a = self.lambda * (cand - 1.0 - t);
                let b = self.lambda * (cand + 1.0 - t);
                v += self.sites.amp[i] * self.tables.capture_lo(self.sites.class[i] as usize, a, b);
            }
            if v > best.0 {
                best = (v, cand);
            }
        }
        best
    }

    fn bin_center(&self, bin: u32) -> f64 {
        self.t0 + (bin as f64 + 0.5) * BIN_WIDTH
    }
}

/// Branch-and-bound sweep over strip directions for a prepared site set.
fn bracket_sites(
    sites: &StripSites,
    tables: &CaptureTables,
    lambda: f64,
) -> Result<StripMaximalBracket> {
    let mut sweep = Sweep::new(sites, tables, lambda);
    let width = std::f64::consts::PI / COARSE_DIRECTIONS as f64;
    let mut heap = BinaryHeap::with_capacity(COARSE_DIRECTIONS + 64);
    for j in 0..COARSE_DIRECTIONS {
        let lo = j as f64 * width;
        let (bound, arg_bin) = sweep.interval_bound(lo + 0.5 * width, 0.5 * width);
        heap.push(Interval { bound, lo, hi: lo + width, arg_bin });
    }
    let mut evals = COARSE_DIRECTIONS;

    loop {
        let top = heap.pop().expect("sweep heap cannot be empty");
        let delta = 0.5 * (top.hi - top.lo);
        if delta * sites.ext > FAT_TARGET && evals < MAX_INTERVAL_EVALS {
            let sub = 0.5 * (top.hi - top.lo) / 2.0;
            for j in 0..4 {
                let lo = top.lo + j as f64 * 2.0 * sub;
                let (bound, arg_bin) = sweep.interval_bound(lo + sub, sub);
                heap.push(Interval { bound, lo, hi: lo + 2.0 * sub, arg_bin });
            }
            evals += 4;
            continue;
        }

        // `top` dominates every remaining interval, so its bound is the
        // certified upper bound. Witness its direction and the next few
        // runner-ups for the lower bound.
        let upper = top.bound;
        let mut best = (f64::MIN, 0.0, 0.0);
        let mut cands = vec![top];
        for _ in 0..3 {
            match heap.pop() {
                Some(iv) => cands.push(iv),
                None => break,
            }
        }
        for iv in &cands {
            let theta = 0.5 * (iv.lo + iv.hi);
            let (value, offset) = sweep.witness(theta, sweep.bin_center(iv.arg_bin));
            if value > best.0 {
                best = (value, theta, offset);
            }
        }
        let lower = best.0.max(0.0).min(upper);
        return Ok(StripMaximalBracket {
            lower,
            upper,
            witness_angle: best.1,
            witness_offset: best.2,
            directions_scanned: evals,
        });
    }
}
