//! Smooth radial bumps with nonnegative Fourier transform, built as the
//! autocorrelation of a mollified ball indicator, plus the derived kernel
//! bundle (frequency kernel, dual-site envelope, perpendicular mass
//! profiles) used by the projected-lattice weights.
//!
//! Writing `u = 1_{B_a} ∗ m_s` with a compactly supported mollifier `m_s`,
//! the bump is `𝔟 = (u ∗ u) / (u ∗ u)(0)`. Its transform is `𝔟̂ = û² ≥ 0`,
//! and that square is exactly how the stored transform is computed, so
//! nonnegativity is structural rather than a numerical accident. The bump
//! equals `1` at the origin, is at least `c_low` on `B_1`, and vanishes
//! outside `B_{2(a+s)} ⊆ B_2`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{precondition, Result};
use crate::mtlab::radial::{
    fourier_oversampled, project, simpson, sphere_area, RadialProfile,
};

/// Grid spacing for spatial bump profiles.
const PROFILE_STEP: f64 = 1.0 / 1024.0;
/// Marginal sampling step for Fourier transforms; gives a usable band of
/// `0.45·4096 ≈ 1843` with a native frequency resolution of `1/256`.
const FOURIER_STEP: f64 = 1.0 / 4096.0;
/// Panels for the angular quadrature inside radial convolutions.
const THETA_PANELS: usize = 256;
/// Frequency reach of stored transforms; beyond it the true transform is
/// below `1e-20` of its peak and evaluates as zero.
const RHO_MAX: f64 = 1408.0;

/// Ball radius and mollifier radius per dimension: fatter in 1-D (surface
/// bumps, support exactly `B_2`), slimmer in higher dimension to keep
/// lattice source counts moderate (support `B_{1.16}`).
fn bump_radii(dim: usize) -> (f64, f64) {
    if dim == 1 {
        (0.75, 0.25)
    } else {
        (0.46, 0.12)
    }
}

/// A smooth radial bump with recorded sandwich constants and a precomputed
/// radial Fourier transform that is nonnegative by construction.
#[derive(Debug, Clone)]
pub struct BumpFunction {
    dim: usize,
    profile: RadialProfile,
    fourier_profile: RadialProfile,
    c_low: f64,
    c_high: f64,
    derivative_bounds: Vec<f64>,
    ball_radius: f64,
    mollifier_radius: f64,
}

impl BumpFunction {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Bump value at radius `r`; `1` at the origin, zero outside the support.
    ///
    /// The grid carries a short zero pad past `2(a+s)`, so interpolation just
    /// outside the edge could leak denormal-scale values; gate it exactly.
    pub fn eval(&self, r: f64) -> f64 {
        if r.abs() >= self.support() {
            return 0.0;
        }
        self.profile.eval(r).max(0.0)
    }

    /// Radial Fourier transform `𝔟̂(ρ)`; nonnegative on its stored grid.
    pub fn fourier_eval(&self, rho: f64) -> f64 {
        self.fourier_profile.eval(rho).max(0.0)
    }

    /// Support radius `2(a+s)`.
    pub fn support(&self) -> f64 {
        2.0 * (self.ball_radius + self.mollifier_radius)
    }

    /// Lower sandwich constant: `𝔟 ≥ c_low` on `B_1`.
    pub fn c_low(&self) -> f64 {
        self.c_low
    }

    /// Upper sandwich constant: `𝔟 ≤ c_high` everywhere (equals `𝔟(0) = 1`).
    pub fn c_high(&self) -> f64 {
        self.c_high
    }

    /// Recorded bound for `sup |𝔟^{(order)}|` of the radial profile,
    /// orders `1..=4`.
    pub fn derivative_bound(&self, order: usize) -> f64 {
        self.derivative_bounds[order - 1]
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn fourier_profile(&self) -> &RadialProfile {
        &self.fourier_profile
    }

    /// `∫_{R^d} 𝔟(|x|) dx`.
    pub fn mass(&self) -> f64 {
        self.profile.integral(self.dim)
    }

    /// `∫_{R^d} 𝔟(|x|)² dx`.
    pub fn l2_mass(&self) -> f64 {
        self.profile.squared().integral(self.dim)
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    pub fn mollifier_radius(&self) -> f64 {
        self.mollifier_radius
    }
}

/// `∫_0^{θ0} sin^k θ dθ` by the exact reduction
/// `I_k = ((k−1) I_{k−2} − sin^{k−1}θ0 cosθ0) / k`.
fn sin_power_integral(k: usize, theta0: f64) -> f64 {
    match k {
        0 => theta0,
        1 => 1.0 - theta0.cos(),
        _ => {
            let (s, c) = (theta0.sin(), theta0.cos());
            ((k as f64 - 1.0) * sin_power_integral(k - 2, theta0) - s.powi(k as i32 - 1) * c)
                / k as f64
        }
    }
}

/// Normalized mollifier profile `m_s(r) = c · exp(−1/(1−(r/s)²))` on `B_s`.
fn mollifier(dim: usize, s: f64) -> RadialProfile {
    let step = s / 512.0;
    let raw = RadialProfile::from_fn(step, 513, |r| {
        let x = r / s;
        if x < 1.0 {
            (-1.0 / (1.0 - x * x)).exp()
        } else {
            0.0
        }
    });
    let mass = raw.integral(dim);
    raw.scaled(mass.recip())
}

/// `u = 1_{B_a} ∗ m_s`, evaluated by reducing the angular integral to the
/// exact `sin^k` primitive and splitting the radial quadrature at the kink
/// `ρ = |a − r|` so each piece is smooth.
fn mollified_indicator(dim: usize, a: f64, s: f64) -> RadialProfile {
    let m = mollifier(dim, s);
    let len = ((a + s) / PROFILE_STEP).ceil() as usize + 2;
    if dim == 1 {
        return RadialProfile::from_fn(PROFILE_STEP, len, |r| {
            // ∫_{r−a}^{r+a} m(|y|) dy clipped to [−s, s].
            let lo = (r - a).max(-s);
            let hi = (r + a).min(s);
            if hi <= lo {
                return 0.0;
            }
            simpson(lo, hi, 512, |y| m.eval(y.abs()))
        });
    }
    let k = dim - 2;
    let full = sin_power_integral(k, std::f64::consts::PI);
    let angular = |r: f64, rho: f64| -> f64 {
        if r == 0.0 || rho == 0.0 {
            return if (r + rho) <= a { full } else { 0.0 };
        }
        let c_star = (r * r + rho * rho - a * a) / (2.0 * r * rho);
        if c_star <= -1.0 {
            full
        } else if c_star >= 1.0 {
            0.0
        } else {
            sin_power_integral(k, c_star.acos())
        }
    };
    let front = sphere_area(dim - 1);
    RadialProfile::from_fn(PROFILE_STEP, len, |r| {
        let integrand = |rho: f64| m.eval(rho) * rho.powi(dim as i32 - 1) * angular(r, rho);
        let kink = (a - r).abs();
        let v = if kink > 0.0 && kink < s {
            simpson(0.0, kink, 256, integrand) + simpson(kink, s, 256, integrand)
        } else {
            simpson(0.0, s, 512, integrand)
        };
        front * v
    })
}

fn build_bump_uncached(dim: usize) -> Result<BumpFunction> {
    if dim == 0 || dim > 16 {
        return Err(precondition("dimension", format!("bump dimension {dim} outside 1..=16")));
    }
    let (a, s) = bump_radii(dim);
    let u = mollified_indicator(dim, a, s);
    let len_b = (2.0 * (a + s) / PROFILE_STEP).ceil() as usize + 2;
    let raw = crate::mtlab::radial::convolve(&u, &u, dim, PROFILE_STEP, len_b, THETA_PANELS);
    let peak = raw.eval(0.0);
    if !(peak > 0.0) {
        return Err(precondition("dimension", "bump autocorrelation degenerated to zero"));
    }
    let profile = raw.map(|v| (v / peak).max(0.0));
    // 𝔟̂ = û²/peak: compute û once on the FFT grid and square it, which
    // keeps the stored transform nonnegative by construction.
    let u_hat = fourier_oversampled(&u, dim, RHO_MAX, FOURIER_STEP)?;
    let fourier_profile = u_hat.map(|v| v * v / peak);
    let c_low = {
        let mut m = f64::INFINITY;
        let steps = 512;
        for i in 0..=steps {
            m = m.min(profile.eval(i as f64 / steps as f64));
        }
        m
    };
    let derivative_bounds = (1..=4).map(|j| profile.derivative_bound(j)).collect();
    Ok(BumpFunction {
        dim,
        profile,
        fourier_profile,
        c_low,
        c_high: 1.0,
        derivative_bounds,
        ball_radius: a,
        mollifier_radius: s,
    })
}

fn bump_cache() -> &'static Mutex<HashMap<usize, Arc<BumpFunction>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<BumpFunction>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Build (or fetch from the process-wide cache) the smooth radial bump in
/// the given dimension: `𝔟(0) = 1`, `𝔟 ≥ c_low` on `B_1`, `supp 𝔟 ⊆ B_2`,
/// and `𝔟̂ ≥ 0`.
pub fn build_bump(dim: usize) -> Result<Arc<BumpFunction>> {
    if let Some(b) = bump_cache().lock().unwrap().get(&dim) {
        return Ok(Arc::clone(b));
    }
    let built = Arc::new(build_bump_uncached(dim)?);
    bump_cache()
        .lock()
        .unwrap()
        .entry(dim)
        .or_insert_with(|| Arc::clone(&built));
    Ok(built)
}

/// Kernel bundle for weights projected from dimension `big_n` down to `n`:
/// the frequency-side evaluation kernel, the dual-site envelope `φ₁ = 𝔟̂`,
/// and the perpendicular mass profiles used for generating-point masses and
/// tube lower bounds. All entries refer to the peak-normalized bump; weight
/// amplitudes are applied by the weight builder.
#[derive(Debug)]
pub struct WeightKernel {
    pub big_n: usize,
    pub n: usize,
    pub bump: Arc<BumpFunction>,
    /// `G₁ = FT_n` of the squared bump profile; the frequency kernel is
    /// `P_n(y) = (R/λ)^n G₁(R|y|/λ)` and `∫_{R^n} P_n = 𝔟(0)² = 1`.
    pub g1: RadialProfile,
    /// Monotone majorant of `|G₁|` for choosing truncation windows.
    pub g1_env: RadialProfile,
    /// `Ψ(t) = ∫_{R^n} φ₁(√(|x|²+t²))² dx`: mass of one dual site at
    /// perpendicular distance `t` (before the `λ^{−n}` and window factors).
    pub psi: RadialProfile,
    /// `M₁(t) = ∫_R φ₁(√(t²+u²))² du`: one-coordinate marginal of the dual
    /// site mass, for strip fractions in tube lower bounds.
    pub marg1: RadialProfile,
    /// `∫_{R^N} 𝔟²`.
    pub i2: f64,
    /// `G₁(0) = ∫_{R^n} 𝔟(|y|)² dy`.
    pub g1_zero: f64,
    /// `Ψ(0)`.
    pub psi_zero: f64,
}

impl WeightKernel {
    /// Smallest radius `ρ` beyond which `|G₁| ≤ tol`.
    pub fn g1_window(&self, tol: f64) -> f64 {
        self.g1_env.radius_where_below(tol)
    }

    /// `φ₁(ρ) = 𝔟̂(ρ) ≥ 0`.
    pub fn phi(&self, rho: f64) -> f64 {
        self.bump.fourier_eval(rho)
    }

    /// Fraction of a dual site's mass (at perpendicular distance `d`) lying
    /// within the strip `|ζ₁| ≤ tau` of its in-plane center (`n = 2`).
    pub fn strip_fraction(&self, tau: f64, d: f64) -> f64 {
        let total = self.psi.eval(d).max(0.0);
        if total <= 0.0 {
            return 0.0;
        }
        let reach = (self.marg1.support().powi(2) - d * d).max(0.0).sqrt();
        let tau = tau.min(reach);
        if tau <= 0.0 {
            return 0.0;
        }
        let q = 2.0 * simpson(0.0, tau, 200, |z| self.marg1.eval((z * z + d * d).sqrt()).max(0.0));
        (q / total).clamp(0.0, 1.0)
    }
}

fn kernel_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<WeightKernel>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<WeightKernel>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Build (or fetch) the kernel bundle for ambient dimension `big_n` and
/// base dimension `n ≥ 1`.
pub fn weight_kernel(big_n: usize, n: usize) -> Result<Arc<WeightKernel>> {
    if n == 0 || n > big_n {
        return Err(precondition("n", format!("base dimension {n} incompatible with ambient {big_n}")));
    }
    if let Some(k) = kernel_cache().lock().unwrap().get(&(big_n, n)) {
        return Ok(Arc::clone(k));
    }
    let bump = build_bump(big_n)?;
    let squared = bump.profile().squared();
    let g1 = fourier_oversampled(&squared, n, RHO_MAX, FOURIER_STEP)?;
    let g1_env = RadialProfile::from_samples(g1.step(), g1.envelope());
    // Coarsened copy of φ₁² for the perpendicular projections: smooth on the
    // scale of the bump support, so a 2^-6 grid loses nothing that matters
    // for mass bookkeeping.
    let phi_sq = {
        let step = 1.0 / 64.0;
        let len = (bump.fourier_profile().support() / step).ceil() as usize + 1;
        RadialProfile::from_fn(step, len, |r| {
            let v = bump.fourier_eval(r);
            v * v
        })
    };
    let psi_len = 24 * 64 + 1;
    let psi = project(&phi_sq, n, 1.0 / 64.0, psi_len);
    let marg1 = if n == 1 {
        phi_sq.clone()
    } else {
        project(&phi_sq, n - 1, 1.0 / 64.0, psi_len)
    };
    let i2 = squared.integral(big_n);
    let g1_zero = squared.integral(n);
    let psi_zero = psi.eval(0.0);
    let kernel = Arc::new(WeightKernel {
        big_n,
        n,
        bump,
        g1,
        g1_env,
        psi,
        marg1,
        i2,
        g1_zero,
        psi_zero,
    });
    kernel_cache()
        .lock()
        .unwrap()
        .entry((big_n, n))
        .or_insert_with(|| Arc::clone(&kernel));
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_one_at_origin_and_vanishes_outside_support() {
        for dim in [1usize, 2, 8] {
            let b = build_bump(dim).unwrap();
            assert!((b.eval(0.0) - 1.0).abs() < 1e-12, "dim {dim}");
            assert!(b.eval(b.support() + 0.01) == 0.0, "dim {dim}");
            assert!(b.eval(2.01) == 0.0, "dim {dim}");
            assert!(b.support() <= 2.0 + 1e-12, "dim {dim}");
        }
        // The 1-D surface bump genuinely fills B_2.
        let b1 = build_bump(1).unwrap();
        assert!(b1.eval(1.95) > 0.0);
    }

    #[test]
    fn bump_dominates_c_low_on_unit_ball() {
        for dim in [1usize, 2, 8] {
            let b = build_bump(dim).unwrap();
            assert!(b.c_low() > 0.0, "dim {dim}: c_low {}", b.c_low());
            for i in 0..=200 {
                let r = i as f64 / 200.0;
                assert!(
                    b.eval(r) >= b.c_low() - 1e-12,
                    "dim {dim} r={r}: {} < {}",
                    b.eval(r),
                    b.c_low()
                );
            }
            assert!(b.c_high() >= b.profile().max_value() - 1e-12);
        }
    }

    #[test]
    fn stored_transform_is_nonnegative_far_out() {
        for dim in [1usize, 2, 8] {
            let b = build_bump(dim).unwrap();
            let mut min = f64::INFINITY;
            let grid = b.fourier_profile();
            for (i, &v) in grid.values().iter().enumerate() {
                if (i as f64) * grid.step() > 1000.0 {
                    break;
                }
                min = min.min(v);
            }
            assert!(min >= -1e-10, "dim {dim}: min transform {min}");
        }
    }

    #[test]
    fn independent_transform_matches_stored_square() {
        // Re-transform the spatial profile directly and compare against the
        // structurally nonnegative stored transform.
        for dim in [1usize, 2] {
            let b = build_bump(dim).unwrap();
            let direct =
                crate::mtlab::radial::fourier(b.profile(), dim, 48.0).unwrap();
            let scale = b.fourier_eval(0.0);
            for i in 0..=192 {
                let rho = i as f64 * 0.25;
                let d = (direct.eval(rho) - b.fourier_eval(rho)).abs();
                assert!(d < 2e-5 * scale, "dim {dim} rho={rho}: diff {d:e}, scale {scale:e}");
            }
        }
    }

    #[test]
    fn plancherel_consistency() {
        for dim in [1usize, 2, 8] {
            let b = build_bump(dim).unwrap();
            let spatial = b.l2_mass();
            let freq = b.fourier_profile().squared().integral(dim);
            assert!(
                (spatial - freq).abs() < 1e-4 * spatial,
                "dim {dim}: {spatial} vs {freq}"
            );
        }
    }

    #[test]
    fn transform_at_zero_is_mass() {
        for dim in [1usize, 8] {
            let b = build_bump(dim).unwrap();
            let mass = b.mass();
            assert!(
                (b.fourier_eval(0.0) - mass).abs() < 1e-6 * mass,
                "dim {dim}: {} vs {mass}",
                b.fourier_eval(0.0)
            );
        }
    }

    #[test]
    fn derivative_bounds_are_finite_and_positive() {
        let b = build_bump(1).unwrap();
        for order in 1..=4 {
            let v = b.derivative_bound(order);
            assert!(v.is_finite() && v > 0.0, "order {order}: {v}");
        }
    }

    #[test]
    fn kernel_masses_are_consistent() {
        let k = weight_kernel(8, 2).unwrap();
        // G₁(0) equals the 2-D mass of the squared profile and the kernel
        // integrates to 𝔟(0)² = 1 after the (R/λ)^n scaling.
        assert!((k.g1.eval(0.0) - k.g1_zero).abs() < 1e-6 * k.g1_zero);
        let g1_mass = k.g1.integral(2);
        assert!((g1_mass - 1.0).abs() < 2e-3, "∫G₁ = {g1_mass}");
        // Ψ(0) = ∫_{R²} φ₁² and Plancherel ties the full perpendicular
        // integral of Ψ back to ∫𝔟².
        let psi0 = k.psi.eval(0.0);
        assert!((psi0 - k.psi_zero).abs() < 1e-12);
        let perp = k.big_n - k.n;
        let total = k.psi.integral(perp.max(1));
        if perp > 0 {
            assert!(
                (total - k.i2).abs() < 5e-3 * k.i2,
                "∫Ψ over perp = {total} vs ∫𝔟² = {}",
                k.i2
            );
        }
    }

    #[test]
    fn strip_fraction_behaves_like_a_fraction() {
        let k = weight_kernel(8, 2).unwrap();
        let half = k.strip_fraction(0.8, 0.3);
        let all = k.strip_fraction(30.0, 0.3);
        assert!(half > 0.0 && half < 1.0, "half {half}");
        assert!(all > 0.97, "all {all}");
        assert!(k.strip_fraction(0.8, 0.3) <= k.strip_fraction(1.6, 0.3) + 1e-12);
    }

    #[test]
    fn envelope_window_shrinks_with_looser_tolerance() {
        let k = weight_kernel(2, 2).unwrap();
        let tight = k.g1_window(1e-12 * k.g1_zero);
        let loose = k.g1_window(1e-6 * k.g1_zero);
        assert!(loose <= tight);
        assert!(loose > 0.0);
        assert!(k.g1_env.eval(0.0) >= k.g1_zero * 0.999);
    }
}

