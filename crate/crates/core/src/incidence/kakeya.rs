//! Maximal-average scaling for the union of small balls on a coarse grid:
//! how the best directional tube average and the plain norm of the indicator
//! shrink as the ball radius δ drops.
//!
//! The configuration is `X = ⋃ B(c, δ)` over centers `c ∈ δ^{(N−1)/N}Z^N ∩
//! B₁`, probed by tubes of radius δ and length 1. Everything is rescaled by
//! the grid spacing, so the experiment enumerates `Z^N ∩ B_L` with `L =
//! δ^{−(N−1)/N}` and searches tubes of radius `2δ^{1/N}` and length `L`. A
//! ball contributes its full volume whenever its center lies in the fattened
//! tube, giving the directional value `count · (c_N/c_{N−1}) · δ`; the norm
//! of the indicator is exact because the balls are pairwise disjoint.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::convex::{unit_ball_volume, ConvexBody};
use crate::error::{precondition, Result};
use crate::lattice::{enumerate_in_body, max_tube_mass_in_direction, EnumerationBudget, Lattice};
use crate::rng::tagged_rng;
use crate::stats::fit_line;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KakeyaPoint {
    pub delta: f64,
    /// Lattice ball centers enumerated at this scale.
    pub centers: u64,
    /// `L^N` norm of the indicator of the ball union (exact).
    pub f0_norm: f64,
    /// `L^N` norm over the sampled directions of the best tube average.
    pub maximal_norm: f64,
    /// Largest single-direction tube average.
    pub max_direction_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KakeyaSummary {
    pub ambient_dim: usize,
    pub directions: u32,
    pub master_seed: u64,
    pub points: Vec<KakeyaPoint>,
    /// Log-log slope of the maximal norm against δ (expected near 1).
    pub maximal_slope: f64,
    /// Log-log slope of the indicator norm against δ (expected near 1/N).
    pub f0_slope: f64,
}

/// Runs the ball-union maximal experiment over a strictly decreasing list of
/// dyadic exponents (`delta = 2^e`). One direction sample on the sphere is
/// drawn up front and shared across all scales, so the fitted slopes compare
/// like against like. Exponents are capped at `−N` so the balls stay
/// disjoint; ambient dimensions 2–4 are supported (the point budget makes
/// roughly `e ≥ −9` practical at `N = 3` and `e ≥ −6` at `N = 4`).
pub fn kakeya_lattice_experiment(
    ambient_dim: usize,
    delta_exponents: &[i64],
    directions: u32,
    master_seed: u64,
) -> Result<KakeyaSummary> {
    if !(2..=4).contains(&ambient_dim) {
        return Err(precondition("ambient_dim", "supported ambient dimensions are 2..=4"));
    }
    if delta_exponents.len() < 2 {
        return Err(precondition("delta_exponents", "need at least two scales for a slope"));
    }
    if delta_exponents.windows(2).any(|w| w[1] >= w[0]) {
        return Err(precondition("delta_exponents", "exponents must be strictly decreasing"));
    }
    let max_exp = -(ambient_dim as i64);
    if delta_exponents.iter().any(|&e| e > max_exp || e < -10) {
        return Err(precondition(
            "delta_exponents",
            format!("exponents must lie in [-10, {max_exp}] so the balls are disjoint"),
        ));
    }
    if directions < 8 {
        return Err(precondition("directions", "need at least 8 sampled directions"));
    }

    let mut rng = tagged_rng(master_seed, "kakeya-directions");
    let dirs: Vec<DVector<f64>> = (0..directions)
        .map(|_| loop {
            let v = DVector::from_fn(ambient_dim, |_, _| {
                crate::convex::rotation::standard_normal(&mut rng)
            });
            let norm = v.norm();
            if norm > 1e-6 {
                break v / norm;
            }
        })
        .collect();

    let nn = ambient_dim as f64;
    let ball_volume = unit_ball_volume(ambient_dim);
    let section_volume = unit_ball_volume(ambient_dim - 1);
    let lattice = Lattice::scaled(ambient_dim, 1.0)?;

    let mut points = Vec::with_capacity(delta_exponents.len());
    for &e in delta_exponents {
        let delta = (e as f64).exp2();
        let length = delta.powf(-(nn - 1.0) / nn);
        let radius = 2.0 * delta.powf(1.0 / nn);
        let body = ConvexBody::ball(DVector::zeros(ambient_dim), length)?;
        let centers = enumerate_in_body(&lattice, &body, EnumerationBudget::default())?;
        let masses = vec![1.0; centers.len()];
        let values: Vec<f64> = dirs
            .par_iter()
            .map(|v| {
                let count = max_tube_mass_in_direction(&centers, &masses, v, radius, length)?;
                Ok(count * (ball_volume / section_volume) * delta)
            })
            .collect::<Result<_>>()?;
        let mean_pow =
            values.iter().map(|x| x.powi(ambient_dim as i32)).sum::<f64>() / values.len() as f64;
        points.push(KakeyaPoint {
            delta,
            centers: centers.len() as u64,
            f0_norm: (centers.len() as f64 * ball_volume * delta.powi(ambient_dim as i32))
                .powf(1.0 / nn),
            maximal_norm: mean_pow.powf(1.0 / nn),
            max_direction_value: values.iter().cloned().fold(0.0, f64::max),
        });
    }

    let xs: Vec<f64> = points.iter().map(|p| p.delta.ln()).collect();
    let maximal: Vec<f64> = points.iter().map(|p| p.maximal_norm.ln()).collect();
    let f0: Vec<f64> = points.iter().map(|p| p.f0_norm.ln()).collect();
    Ok(KakeyaSummary {
        ambient_dim,
        directions,
        master_seed,
        points,
        maximal_slope: fit_line(&xs, &maximal).0,
        f0_slope: fit_line(&xs, &f0).0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_norm_matches_the_disjoint_ball_volume() {
        let summary = kakeya_lattice_experiment(2, &[-4, -6], 16, 9).unwrap();
        for p in &summary.points {
            let expected =
                (p.centers as f64 * std::f64::consts::PI * p.delta * p.delta).powf(0.5);
            assert!((p.f0_norm - expected).abs() < 1e-12);
            assert!(p.maximal_norm > 0.0);
            assert!(p.max_direction_value >= p.maximal_norm);
        }
    }

    #[test]
    fn planar_slopes_sit_near_their_scaling_exponents() {
        let summary = kakeya_lattice_experiment(2, &[-4, -6, -8], 64, 9).unwrap();
        assert!(
            summary.maximal_slope > 0.5 && summary.maximal_slope < 1.5,
            "maximal slope = {}",
            summary.maximal_slope
        );
        assert!(
            (summary.f0_slope - 0.5).abs() < 0.1,
            "indicator slope = {}",
            summary.f0_slope
        );
    }

    #[test]
    fn experiments_are_reproducible() {
        let a = kakeya_lattice_experiment(3, &[-3, -4], 16, 21).unwrap();
        let b = kakeya_lattice_experiment(3, &[-3, -4], 16, 21).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overlapping_balls_are_rejected() {
        assert!(kakeya_lattice_experiment(4, &[-3, -5], 16, 9).is_err());
        assert!(kakeya_lattice_experiment(3, &[-4, -4], 16, 9).is_err());
        assert!(kakeya_lattice_experiment(3, &[-4, -5], 4, 9).is_err());
    }
}
