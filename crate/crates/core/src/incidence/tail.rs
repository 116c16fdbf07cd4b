//! Empirical tail estimates: lattice-point counts of Haar-rotated bodies and
//! intersection volumes of rotated dyadic boxes.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::convex::{incidence_factor, ConvexBody, DyadicTuple, Rotation};
use crate::error::{precondition, Result};
use crate::lattice::{enumerate_in_body, EnumerationBudget, Lattice};
use crate::rng::trial_rng;
use crate::stats::{fit_line, wilson_interval};

use super::{MIN_TRIALS, WILSON_Z};

/// Points whose relative 95% interval width `(hi − lo)/p̂` is below this
/// enter the log-log slope fit; wider estimates carry no slope information.
pub const MAX_FIT_CI_WIDTH: f64 = 0.5;

/// One threshold of an empirical tail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    /// Event threshold (a count for lattice tails, a volume fraction for
    /// intersection tails).
    pub threshold: f64,
    /// Trials in which the statistic reached the threshold.
    pub events: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Model value this point is compared against (e.g. `K^{-N}`).
    pub reference: f64,
}

/// Empirical tail over a threshold grid with a log-log slope fitted to the
/// well-resolved points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub trials: u64,
    pub master_seed: u64,
    /// Points in increasing threshold order; probabilities are nonincreasing.
    pub points: Vec<TailPoint>,
    /// Slope of `ln p̂` against `ln threshold` over the fitted points, or
    /// `None` when fewer than two points are well resolved.
    pub fitted_slope: Option<f64>,
    /// Number of points that entered the fit.
    pub fit_points: usize,
}

impl TailEstimate {
    pub(crate) fn from_event_counts(
        thresholds: &[f64],
        events: &[u64],
        references: &[f64],
        trials: u64,
        master_seed: u64,
    ) -> Self {
        let points: Vec<TailPoint> = thresholds
            .iter()
            .zip(events)
            .zip(references)
            .map(|((&threshold, &events), &reference)| {
                let p_hat = events as f64 / trials as f64;
                let (ci_low, ci_high) = wilson_interval(events, trials, WILSON_Z);
                TailPoint { threshold, events, p_hat, ci_low, ci_high, reference }
            })
            .collect();
        let fit: Vec<&TailPoint> = points
            .iter()
            .filter(|p| {
                p.events > 0
                    && p.threshold > 0.0
                    && (p.ci_high - p.ci_low) / p.p_hat < MAX_FIT_CI_WIDTH
            })
            .collect();
        let fit_points = fit.len();
        let fitted_slope = if fit_points >= 2 {
            let xs: Vec<f64> = fit.iter().map(|p| p.threshold.ln()).collect();
            let ys: Vec<f64> = fit.iter().map(|p| p.p_hat.ln()).collect();
            Some(fit_line(&xs, &ys).0)
        } else {
            None
        };
        Self { trials, master_seed, points, fitted_slope, fit_points }
    }

    /// The tail point at the given threshold, if it is on the grid.
    pub fn point(&self, threshold: f64) -> Option<&TailPoint> {
        self.points.iter().find(|p| p.threshold == threshold)
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(precondition("trials", format!("need at least {MIN_TRIALS} trials")));
    }
    Ok(())
}

/// Empirical tail of `|gT ∩ Z^N|` over Haar-random rotations `g` of a convex
/// body `T` with `|T| ≤ 1`, on the given count grid. Each point is compared
/// against the model decay `K^{-N}`.
pub fn tail_rotated_body(
    body: &ConvexBody,
    trials: u64,
    count_grid: &[u64],
    master_seed: u64,
) -> Result<TailEstimate> {
    let n = body.dim();
    check_trials(trials)?;
    if count_grid.is_empty() || count_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(precondition("count_grid", "thresholds must be strictly increasing"));
    }
    if count_grid[0] == 0 {
        return Err(precondition("count_grid", "count thresholds start at 1"));
    }
    let volume = body.volume();
    if volume > 1.0 + 1e-9 {
        return Err(precondition(
            "body",
            format!("volume must be at most 1, got {volume:.6}"),
        ));
    }

    let lattice = Lattice::scaled(n, 1.0)?;
    let counts: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            let g = Rotation::haar(n, &mut rng);
            let points = enumerate_in_body(&lattice, &body.rotated(&g), EnumerationBudget::default())?;
            Ok(points.len() as u64)
        })
        .collect::<Result<_>>()?;

    let thresholds: Vec<f64> = count_grid.iter().map(|&k| k as f64).collect();
    let events: Vec<u64> =
        count_grid.iter().map(|&k| counts.iter().filter(|&&c| c >= k).count() as u64).collect();
    let references: Vec<f64> =
        thresholds.iter().map(|&k| k.powi(-(n as i32))).collect();
    Ok(TailEstimate::from_event_counts(&thresholds, &events, &references, trials, master_seed))
}

/// Empirical tail of `|g[s] ∩ [t]| / |s ⋏ t|` over Haar-random rotations,
/// with the intersection volume estimated by quasi–Monte Carlo membership
/// sampling inside `[t]`. The grid entry `λ` contributes the tail point at
/// threshold `1/λ` (intersection at least a `1/λ`-fraction of the meet box),
/// compared against `min(1, (λ ln λ)^{-d}) · I(s⋏t, s⋎t)`.
pub fn intersection_shape_tail(
    s: &DyadicTuple,
    t: &DyadicTuple,
    lambda_grid: &[f64],
    trials: u64,
    samples_per_trial: u32,
    master_seed: u64,
) -> Result<TailEstimate> {
    if s.dim() != t.dim() {
        return Err(crate::Error::Dimension { expected: s.dim(), got: t.dim() });
    }
    check_trials(trials)?;
    if lambda_grid.is_empty() || lambda_grid.iter().any(|&l| !(l >= 1.0)) {
        return Err(precondition("lambda_grid", "entries must be finite and ≥ 1"));
    }
    if lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(precondition("lambda_grid", "entries must be strictly increasing"));
    }
    if samples_per_trial < 100 {
        return Err(precondition("samples_per_trial", "need at least 100 samples"));
    }

    let d = s.dim();
    let s_half: Vec<f64> = s.entries_f64().iter().map(|v| v / 2.0).collect();
    let t_sides = t.entries_f64();
    let t_volume = t.volume().as_f64();
    let meet = s.meet(t)?;
    let meet_volume = meet.volume().as_f64();
    let incidence = incidence_factor(&meet, &s.join(t)?)?.as_f64();

    // Volume fractions of [t] that mark each threshold `|s⋏t|/λ`.
    let cutoffs: Vec<f64> =
        lambda_grid.iter().map(|&l| meet_volume / (l * t_volume)).collect();
    let alphas = kronecker_alphas(d);

    let hits: Vec<Vec<u64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            let g = Rotation::haar(d, &mut rng);
            // Cranley–Patterson rotation of a Kronecker sequence: low
            // discrepancy within a trial, unbiased across trials.
            let shift: Vec<f64> = (0..d).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
            let mut inside = 0u64;
            let mut x = DVector::zeros(d);
            for k in 0..samples_per_trial {
                for j in 0..d {
                    let u = (shift[j] + k as f64 * alphas[j]).fract();
                    x[j] = (u - 0.5) * t_sides[j];
                }
                let y = g.apply_inverse(&x);
                if y.iter().zip(&s_half).all(|(yi, &h)| yi.abs() <= h) {
                    inside += 1;
                }
            }
            let frac = inside as f64 / samples_per_trial as f64;
            cutoffs.iter().map(|&c| u64::from(frac >= c)).collect::<Vec<u64>>()
        })
        .collect();

    let mut events = vec![0u64; lambda_grid.len()];
    for row in &hits {
        for (e, h) in events.iter_mut().zip(row) {
            *e += h;
        }
    }
    // Ascending thresholds 1/λ (descending λ) keep probabilities
    // nonincreasing along the point list.
    let mut order: Vec<usize> = (0..lambda_grid.len()).collect();
    order.reverse();
    let thresholds: Vec<f64> = order.iter().map(|&j| 1.0 / lambda_grid[j]).collect();
    let events: Vec<u64> = order.iter().map(|&j| events[j]).collect();
    let references: Vec<f64> = order
        .iter()
        .map(|&j| {
            let l = lambda_grid[j];
            incidence * (l * l.ln()).powi(-(d as i32)).min(1.0)
        })
        .collect();
    Ok(TailEstimate::from_event_counts(&thresholds, &events, &references, trials, master_seed))
}

/// Kronecker sequence directions: fractional parts of square roots of the
/// first primes, a standard low-discrepancy choice.
fn kronecker_alphas(d: usize) -> Vec<f64> {
    const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (0..d).map(|j| (f64::from(PRIMES[j % PRIMES.len()])).sqrt().fract()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn needle_2d() -> ConvexBody {
        ConvexBody::bbox(DVector::zeros(2), Rotation::identity(2), vec![50.0, 0.005]).unwrap()
    }

    #[test]
    fn symmetric_body_always_contains_the_origin() {
        let ball = ConvexBody::ball(DVector::zeros(2), 0.5).unwrap();
        let tail = tail_rotated_body(&ball, 1_000, &[1], 3).unwrap();
        assert_eq!(tail.points[0].p_hat, 1.0);
        assert_eq!(tail.points[0].events, 1_000);
    }

    #[test]
    fn needle_tail_matches_the_primitive_direction_count() {
        // Volume-1 needle, halfwidths (50, 0.005). Counts ≥ 11 require a
        // primitive lattice direction p with |p| ≤ 10 aligned to within
        // 0.001/|p|, so P ≈ (0.002/π) Σ 1/|p| ≈ 0.0121 over the 10⁻²
        // model value.
        let tail = tail_rotated_body(&needle_2d(), 40_000, &[10], 11).unwrap();
        let p = tail.points[0].p_hat;
        assert!(p > 1e-2 / 8.0 && p < 1e-2 * 8.0, "p = {p}");
        assert!(p > 0.0121 / 2.0 && p < 0.0121 * 2.0, "p = {p}");
        assert!((tail.points[0].reference - 1e-2).abs() < 1e-12);
    }

    #[test]
    fn tail_is_nonincreasing_with_valid_intervals() {
        let tail = tail_rotated_body(&needle_2d(), 5_000, &[1, 3, 7, 15], 5).unwrap();
        for pair in tail.points.windows(2) {
            assert!(pair[1].p_hat <= pair[0].p_hat);
        }
        for p in &tail.points {
            assert!(p.ci_low <= p.p_hat && p.p_hat <= p.ci_high);
            assert!((0.0..=1.0).contains(&p.p_hat));
        }
    }

    #[test]
    fn oversized_bodies_are_rejected() {
        let box2 = ConvexBody::bbox(DVector::zeros(2), Rotation::identity(2), vec![1.0, 1.0])
            .unwrap();
        assert!(tail_rotated_body(&box2, 1_000, &[1], 0).is_err());
    }

    #[test]
    fn doubling_trials_shrinks_intervals_by_about_root_two() {
        // Event with p ≈ 0.2: a (3.2 × 0.3)-box captures ±(1,0) or ±(0,1)
        // often enough to push the count to 3.
        let body = ConvexBody::bbox(DVector::zeros(2), Rotation::identity(2), vec![1.6, 0.15])
            .unwrap();
        let small = tail_rotated_body(&body, 2_000, &[3], 11).unwrap();
        let large = tail_rotated_body(&body, 4_000, &[3], 11).unwrap();
        let w_small = small.points[0].ci_high - small.points[0].ci_low;
        let w_large = large.points[0].ci_high - large.points[0].ci_low;
        let shrink = w_small / w_large;
        assert!(shrink > 1.3 && shrink < 1.5, "shrink = {shrink}");
    }

    #[test]
    fn identical_seeds_reproduce_across_thread_counts() {
        let run = |threads| {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| tail_rotated_body(&needle_2d(), 2_000, &[2, 6], 42).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn slope_fit_uses_only_well_resolved_points() {
        let est = TailEstimate::from_event_counts(
            &[2.0, 4.0, 8.0],
            &[900, 100, 4],
            &[1.0, 1.0, 1.0],
            10_000,
            0,
        );
        // The 4-event point is too noisy to enter the fit.
        assert_eq!(est.fit_points, 2);
        let slope = est.fitted_slope.unwrap();
        let expected = (0.01f64 / 0.09).ln() / 2f64.ln();
        assert!((slope - expected).abs() < 1e-9);

        let empty =
            TailEstimate::from_event_counts(&[2.0, 4.0], &[0, 0], &[1.0, 1.0], 10_000, 0);
        assert!(empty.fitted_slope.is_none());
        assert_eq!(empty.fit_points, 0);
    }

    #[test]
    fn identical_unit_boxes_always_overlap_substantially() {
        let s = DyadicTuple::new(vec![0, 0]).unwrap();
        let tail = intersection_shape_tail(&s, &s, &[2.0, 8.0], 1_000, 400, 7).unwrap();
        // Two rotated unit squares share at least 2(√2−1)² ≈ 0.69 of their
        // volume, so both the λ=2 and λ=8 thresholds fire every trial.
        assert_eq!(tail.point(0.5).unwrap().p_hat, 1.0);
        assert_eq!(tail.point(0.125).unwrap().p_hat, 1.0);
        // I = 1 here, so the reference is the bare (λ ln λ)^{-d} factor.
        let model = (2.0 * 2f64.ln()).powi(-2);
        assert!((tail.point(0.5).unwrap().reference - model).abs() < 1e-12);
    }

    #[test]
    fn plank_meets_small_box_as_the_incidence_factor_predicts() {
        // s = (1, 1/16), t = (1/16, 1/16): the rotated plank is wider than
        // the small box in every direction, so the intersection always
        // carries most of the meet volume, matching I(s⋏t, s⋎t) = 1 (and
        // not the meet/join volume ratio 1/16).
        let s = DyadicTuple::new(vec![0, -4]).unwrap();
        let t = DyadicTuple::new(vec![-4, -4]).unwrap();
        let tail = intersection_shape_tail(&s, &t, &[2.0, 4.0], 2_000, 2_000, 9).unwrap();
        let meet = s.meet(&t).unwrap();
        let join = s.join(&t).unwrap();
        let incidence = incidence_factor(&meet, &join).unwrap().as_f64();
        assert_eq!(incidence, 1.0);
        let p = tail.point(0.5).unwrap().p_hat;
        assert_eq!(p, 1.0);
        assert!(p / incidence <= 8.0 && incidence / p <= 8.0);
    }

    #[test]
    fn interleaved_tuples_put_the_incidence_factor_below_one() {
        // s = (1, 1/64), t = (1/8, 1/32) interleave: I(s⋏t, s⋎t) = 1/4 and
        // the λ=2 event needs the plank to cross the long side of [t],
        // which happens for about a third of the rotations.
        let s = DyadicTuple::new(vec![0, -6]).unwrap();
        let t = DyadicTuple::new(vec![-3, -5]).unwrap();
        let meet = s.meet(&t).unwrap();
        let join = s.join(&t).unwrap();
        let incidence = incidence_factor(&meet, &join).unwrap().as_f64();
        assert_eq!(incidence, 0.25);
        let tail = intersection_shape_tail(&s, &t, &[2.0], 4_000, 2_000, 13).unwrap();
        let p = tail.point(0.5).unwrap().p_hat;
        assert!(p / incidence <= 8.0 && incidence / p <= 8.0, "p = {p}");
        assert!((p - 1.0 / 3.0).abs() < 0.05, "p = {p}");
    }

    #[test]
    fn intersection_tail_is_monotone_in_lambda() {
        let s = DyadicTuple::new(vec![0, -6]).unwrap();
        let t = DyadicTuple::new(vec![-3, -5]).unwrap();
        let tail = intersection_shape_tail(&s, &t, &[1.0, 2.0, 4.0, 8.0], 1_500, 500, 21).unwrap();
        for pair in tail.points.windows(2) {
            assert!(pair[1].p_hat <= pair[0].p_hat);
        }
    }
}
