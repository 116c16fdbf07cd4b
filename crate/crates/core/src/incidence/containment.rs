//! Probability that a Haar-rotated dyadic box sits inside an enlarged copy
//! of another, compared against the exact incidence factor `I(a, b)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::convex::{incidence_factor, DyadicTuple, Rotation};
use crate::error::{precondition, Result};
use crate::rng::trial_rng;
use crate::stats::wilson_interval;

use super::{MIN_TRIALS, WILSON_Z};

/// Enlargement constants swept by default; the middle entry is the
/// conventional choice and the sweep shows the estimate is stable under the
/// constant, as a statement that only holds up to constants must be.
pub const DEFAULT_CONTAINMENT_CONSTANTS: [f64; 3] = [2.0, 4.0, 8.0];

/// Empirical containment probability at one enlargement constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainmentEstimate {
    pub constant: f64,
    pub events: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub trials: u64,
    pub master_seed: u64,
    /// Exact `I(a, b) = ∏ min(a_i⁻¹ b_j, 1)`.
    pub incidence: f64,
    /// One estimate per swept constant, in the order given.
    pub estimates: Vec<ContainmentEstimate>,
}

impl ContainmentReport {
    pub fn at_constant(&self, constant: f64) -> Option<&ContainmentEstimate> {
        self.estimates.iter().find(|e| e.constant == constant)
    }
}

/// Estimates `P[every side vector of g[a] lies in C·[b]]` over Haar-random
/// `g` for each enlargement constant `C` in `constants`, and reports the
/// exact incidence factor `I(a, b)` alongside. Requires `a ≤ C·b` entrywise
/// for the smallest swept constant, mirroring the regime where the
/// containment event is the right probe.
pub fn containment_probability(
    a: &DyadicTuple,
    b: &DyadicTuple,
    trials: u64,
    constants: &[f64],
    master_seed: u64,
) -> Result<ContainmentReport> {
    if a.dim() != b.dim() {
        return Err(crate::Error::Dimension { expected: a.dim(), got: b.dim() });
    }
    if trials < MIN_TRIALS {
        return Err(precondition("trials", format!("need at least {MIN_TRIALS} trials")));
    }
    if constants.is_empty() || constants.iter().any(|&c| !(c >= 1.0)) {
        return Err(precondition("constants", "enlargement constants must be ≥ 1"));
    }
    let c_min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let a_sides = a.entries_f64();
    let b_sides = b.entries_f64();
    if a_sides.iter().zip(&b_sides).any(|(&ai, &bi)| ai > c_min * bi) {
        return Err(precondition(
            "a",
            format!("need a ≤ C·b entrywise at C = {c_min}, got a = {a}, b = {b}"),
        ));
    }

    let d = a.dim();
    // The event at constant C is `max_{i,j} |a_i g_{ji}| / (b_j / 2) ≤ C`,
    // so one rotation yields the whole constant sweep from a single ratio.
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            let g = Rotation::haar(d, &mut rng);
            let m = g.matrix();
            let mut worst = 0.0f64;
            for i in 0..d {
                for j in 0..d {
                    let ratio = (a_sides[i] * m[(j, i)]).abs() / (b_sides[j] / 2.0);
                    worst = worst.max(ratio);
                }
            }
            worst
        })
        .collect();

    let estimates = constants
        .iter()
        .map(|&c| {
            let events = ratios.iter().filter(|&&r| r <= c).count() as u64;
            let p_hat = events as f64 / trials as f64;
            let (ci_low, ci_high) = wilson_interval(events, trials, WILSON_Z);
            ContainmentEstimate { constant: c, events, p_hat, ci_low, ci_high }
        })
        .collect();

    Ok(ContainmentReport {
        trials,
        master_seed,
        incidence: incidence_factor(a, b)?.as_f64(),
        estimates,
    })
}
