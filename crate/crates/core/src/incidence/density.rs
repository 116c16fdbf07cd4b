//! Lattice density of dyadic cylinders erected over random subspaces: how
//! far above volume can the point count of `S ∩ Z^N` climb when `S` ranges
//! over cylinders with base in a random `n`-plane.

use rayon::prelude::*;
use serde::Serialize;

use crate::convex::{ConvexBody, CylinderBase, Rotation};
use crate::error::{precondition, Result};
use crate::lattice::{enumerate_in_body, EnumerationBudget, Lattice};
use crate::rng::trial_rng;
use crate::stats::quantile;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DensityConfig {
    /// Dyadic cylinder shapes sampled per subspace draw.
    pub cylinders_per_trial: u32,
    /// The reported reference exponent is `exponent_multiple · n²/N`.
    pub exponent_multiple: f64,
    /// Cap on the volume exponent of sampled cylinders (`|S| ≤ 2^cap`),
    /// keeping single enumerations inside the point budget.
    pub max_volume_exponent: i64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self { cylinders_per_trial: 4, exponent_multiple: 1.0, max_volume_exponent: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensitySummary {
    pub subspace_dim: usize,
    pub ambient_dim: usize,
    pub scale: f64,
    pub trials: u64,
    pub cylinders_per_trial: u32,
    pub master_seed: u64,
    /// Largest observed density per trial (max over the sampled cylinders).
    pub trial_max_densities: Vec<f64>,
    pub max_density: f64,
    /// 90th percentile of `log_scale` of the per-trial maxima.
    pub quantile90_log_density: f64,
    /// `exponent_multiple · n²/N`, the exponent the quantile is compared to.
    pub reference_exponent: f64,
}

/// Samples uniformly random frames of `R^N`, reading the first `n` columns as
/// a base plane `V` and the rest as height directions, and for each draws
/// dyadic cylinders `S` (base box in `V`, box of heights across `V⊥`)
/// constrained to `B_{1/scale} ⊆ S ⊆ B_scale` and `|S| ≥ 1`. Reports the
/// observed densities `|S ∩ Z^N| / |S|` and the 90th percentile of their
/// `log_scale`, to compare against `exponent_multiple · n²/N`.
pub fn subspace_density_sweep(
    subspace_dim: usize,
    ambient_dim: usize,
    scale: f64,
    trials: u64,
    config: DensityConfig,
    master_seed: u64,
) -> Result<DensitySummary> {
    if subspace_dim == 0 || subspace_dim >= ambient_dim {
        return Err(precondition("subspace_dim", "need 0 < n < N"));
    }
    if !(scale >= 2.0) {
        return Err(precondition("scale", "need scale ≥ 2"));
    }
    if trials == 0 || config.cylinders_per_trial == 0 {
        return Err(precondition("trials", "need at least one trial and one cylinder"));
    }
    // Exponent window: every side at least 2/scale (so S ⊇ B_{1/scale})
    // and at most 2·scale/√N (so S ⊆ B_scale).
    let e_min = (2.0 / scale).log2().ceil() as i64;
    let e_max = (2.0 * scale / (ambient_dim as f64).sqrt()).log2().floor() as i64;
    if e_max < 0 || e_min > e_max || (ambient_dim as i64) * e_max < config.max_volume_exponent.min(1)
    {
        return Err(precondition("scale", "scale too small for the ambient dimension"));
    }

    let trial_max_densities: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            // A Haar frame makes the base plane a uniform random n-subspace
            // *and* the height directions a uniform frame of its complement;
            // completing a random n-frame with orthogonalised standard basis
            // vectors would instead bias the heights toward the lattice axes.
            let orientation = Rotation::haar(ambient_dim, &mut rng);
            let mut best = 0.0f64;
            for _ in 0..config.cylinders_per_trial {
                let exps = sample_exponents(
                    &mut rng,
                    ambient_dim,
                    e_min,
                    e_max,
                    config.max_volume_exponent,
                )?;
                let (count, volume) =
                    cylinder_count(&orientation, &exps, subspace_dim)?;
                best = best.max(count as f64 / volume);
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let max_density = trial_max_densities.iter().cloned().fold(0.0, f64::max);
    let logs: Vec<f64> = trial_max_densities.iter().map(|d| d.ln() / scale.ln()).collect();
    Ok(DensitySummary {
        subspace_dim,
        ambient_dim,
        scale,
        trials,
        cylinders_per_trial: config.cylinders_per_trial,
        master_seed,
        quantile90_log_density: quantile(&logs, 0.9),
        trial_max_densities,
        max_density,
        reference_exponent: config.exponent_multiple * (subspace_dim * subspace_dim) as f64
            / ambient_dim as f64,
    })
}

/// Draws one dyadic exponent vector with entries in `[e_min, e_max]` and sum
/// in `[0, volume_cap]` by rejection.
fn sample_exponents(
    rng: &mut impl rand::Rng,
    ambient_dim: usize,
    e_min: i64,
    e_max: i64,
    volume_cap: i64,
) -> Result<Vec<i64>> {
    for _ in 0..10_000 {
        let exps: Vec<i64> = (0..ambient_dim).map(|_| rng.gen_range(e_min..=e_max)).collect();
        let total: i64 = exps.iter().sum();
        if (0..=volume_cap).contains(&total) {
            return Ok(exps);
        }
    }
    Err(precondition("scale", "no admissible cylinder shape found in 10⁴ draws"))
}

/// Lattice count and volume of the dyadic cylinder whose first
/// `subspace_dim` exponents are base sides (in the orientation's leading
/// frame) and whose remaining exponents are heights.
pub(crate) fn cylinder_count(
    orientation: &Rotation,
    exps: &[i64],
    subspace_dim: usize,
) -> Result<(u64, f64)> {
    let ambient_dim = exps.len();
    let half = |e: i64| (e as f64).exp2() / 2.0;
    let base: Vec<f64> = exps[..subspace_dim].iter().map(|&e| half(e)).collect();
    let heights: Vec<f64> = exps[subspace_dim..].iter().map(|&e| half(e)).collect();
    let body = ConvexBody::cylinder(
        nalgebra::DVector::zeros(ambient_dim),
        orientation.clone(),
        CylinderBase::Box { halfwidths: base },
        heights,
    )?;
    let lattice = Lattice::scaled(ambient_dim, 1.0)?;
    let points = enumerate_in_body(&lattice, &body, EnumerationBudget::default())?;
    Ok((points.len() as u64, body.volume()))
}
