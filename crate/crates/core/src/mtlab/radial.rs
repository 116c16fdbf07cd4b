//! Radial numerics shared by the weight machinery: sampled radial profiles
//! with cubic interpolation, dimension-reducing marginals, radial
//! convolution, and radial Fourier transforms computed as a zero-padded FFT
//! of the one-dimensional marginal.
//!
//! Every radial function here is represented by its profile on a uniform
//! grid `r = i·step`; values beyond the last sample are treated as zero and
//! the profile is extended evenly through the origin. The Fourier convention
//! is `ĝ(ξ) = ∫ g(x) e^{−2πi x·ξ} dx` throughout the crate.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::convex::unit_ball_volume;
use crate::error::{precondition, Result};

/// Surface area of the unit sphere `S^{d−1} ⊂ R^d` (`d ≥ 1`).
pub fn sphere_area(dim: usize) -> f64 {
    assert!(dim >= 1, "sphere_area needs dim >= 1");
    dim as f64 * unit_ball_volume(dim)
}

/// A radial function sampled on a uniform grid, evaluated by centered cubic
/// interpolation with even reflection at the origin.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    step: f64,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn from_samples(step: f64, values: Vec<f64>) -> Self {
        assert!(step > 0.0 && step.is_finite(), "profile step must be positive");
        assert!(values.len() >= 2, "profile needs at least two samples");
        Self { step, values }
    }

    pub fn from_fn(step: f64, len: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..len).map(|i| f(i as f64 * step)).collect();
        Self::from_samples(step, values)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Radius of the last sample; the profile vanishes beyond it.
    pub fn support(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    /// Sample with even extension at the origin and zero beyond the support.
    fn sample(&self, i: isize) -> f64 {
        let i = i.unsigned_abs();
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Centered 4-point (cubic Lagrange) interpolation.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let x = r / self.step;
        if x >= self.values.len() as f64 {
            return 0.0;
        }
        let i0 = x.floor() as isize;
        let t = x - i0 as f64;
        // Lagrange weights on nodes {-1, 0, 1, 2} relative to i0.
        let (a, b, c, d) = (
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        );
        a * self.sample(i0 - 1) + b * self.sample(i0) + c * self.sample(i0 + 1) + d * self.sample(i0 + 2)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise map of the samples.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { step: self.step, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Profile of the pointwise square.
    pub fn squared(&self) -> Self {
        self.map(|v| v * v)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `∫_{R^d} f(|x|) dx = σ_{d−1} ∫_0^∞ f(r) r^{d−1} dr` by Simpson's rule
    /// on the sample grid.
    pub fn integral(&self, dim: usize) -> f64 {
        let h = self.step;
        let g = |i: usize| {
            let r = i as f64 * h;
            self.values[i] * if dim == 1 { 1.0 } else { r.powi(dim as i32 - 1) }
        };
        sphere_area(dim) * simpson_sum(self.values.len(), h, g)
    }

    /// Monotone decreasing majorant of `|f|`: `env[i] = max_{j ≥ i} |f_j|`.
    pub fn envelope(&self) -> Vec<f64> {
        let mut env = vec![0.0; self.values.len()];
        let mut m: f64 = 0.0;
        for i in (0..self.values.len()).rev() {
            m = m.max(self.values[i].abs());
            env[i] = m;
        }
        env
    }

    /// Smallest grid radius past which `|f|` stays at or below `tol`
    /// (the support radius if the tolerance is never reached).
    pub fn radius_where_below(&self, tol: f64) -> f64 {
        let env = self.envelope();
        match env.iter().position(|&e| e <= tol) {
            Some(i) => i as f64 * self.step,
            None => self.support(),
        }
    }

    /// Sup over the grid of the `order`-th central finite difference divided
    /// by `step^order`; a practical bound for `sup |f^{(order)}|` on smooth
    /// profiles (even extension at the origin).
    pub fn derivative_bound(&self, order: usize) -> f64 {
        assert!(order >= 1 && order <= 6, "derivative_bound supports orders 1..=6");
        let n = self.values.len() as isize;
        let h = self.step.powi(order as i32);
        let mut sup: f64 = 0.0;
        // Central difference: Δ^k f(i) = Σ_j (-1)^j C(k,j) f(i + k/2 - j),
        // evaluated on half-grid offsets via the even extension at the
        // origin. Stencils crossing the outer grid edge are skipped so a
        // truncated tail is not mistaken for a jump to zero.
        let coeffs: Vec<f64> = (0..=order)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(order, j)
            })
            .collect();
        for i in -(order as isize)..n {
            let mut acc = 0.0;
            let mut in_range = true;
            for (j, &c) in coeffs.iter().enumerate() {
                // Offset by order/2 keeps the stencil centered; for odd
                // orders this lands on half-integers, so sample the midpoint
                // average instead.
                let pos = 2 * i + order as isize - 2 * j as isize;
                if pos.abs() / 2 + 1 > n - 1 {
                    in_range = false;
                    break;
                }
                let v = if pos % 2 == 0 {
                    self.sample(pos / 2)
                } else {
                    0.5 * (self.sample((pos - 1) / 2) + self.sample((pos + 1) / 2))
                };
                acc += c * v;
            }
            if in_range {
                sup = sup.max(acc.abs() / h);
            }
        }
        sup
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Simpson's rule for `Σ h·g(i)` over `i = 0..len` (composite; falls back to
/// the trapezoid rule on the final interval when `len` is even).
fn simpson_sum(len: usize, h: f64, g: impl Fn(usize) -> f64) -> f64 {
    if len < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    let panels = (len - 1) / 2;
    for p in 0..panels {
        let i = 2 * p;
        acc += h / 3.0 * (g(i) + 4.0 * g(i + 1) + g(i + 2));
    }
    if (len - 1) % 2 == 1 {
        let i = len - 2;
        acc += h / 2.0 * (g(i) + g(i + 1));
    }
    acc
}

/// Simpson integration of a callable over `[a, b]` with `n` panels
/// (`n` rounded up to even).
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = (n.max(2) + 1) & !1usize;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Marginal of a radial function over `down_by` coordinates:
/// `(P f)(t) = ∫_{R^j} f(√(t² + |z|²)) dz`, itself radial in the remaining
/// coordinates. Integration is cut off where the profile's envelope drops
/// below `1e-18` of its peak.
pub fn project(f: &RadialProfile, down_by: usize, out_step: f64, out_len: usize) -> RadialProfile {
    assert!(down_by >= 1, "project needs down_by >= 1");
    let cutoff = f.radius_where_below(1e-18 * f.max_abs());
    // σ_{j−1} ∫_0^∞ f(√(t²+u²)) u^{j−1} du; σ_0 = sphere_area(1) = 2 covers j = 1.
    let front = sphere_area(down_by);
    let values: Vec<f64> = (0..out_len)
        .map(|i| {
            let t = i as f64 * out_step;
            if t >= cutoff {
                return 0.0;
            }
            let umax = (cutoff * cutoff - t * t).max(0.0).sqrt();
            let n = ((umax / (f.step * 0.5)).ceil() as usize).max(8);
            front
                * simpson(0.0, umax, n, |u| {
                    let r = (t * t + u * u).sqrt();
                    let w = if down_by == 1 { 1.0 } else { u.powi(down_by as i32 - 1) };
                    f.eval(r) * w
                })
        })
        .collect();
    RadialProfile::from_samples(out_step, values)
}

/// Radial convolution `(f ∗ g)(r)` in dimension `dim`, sampled on
/// `out_len` points of spacing `out_step`. Uses
/// `(f∗g)(r) = σ_{d−2} ∫_0^∞ f(s) s^{d−1} ∫_0^π g(√(r²+s²−2rs·cosθ)) sin^{d−2}θ dθ ds`
/// for `d ≥ 2` and the direct line integral for `d = 1`.
pub fn convolve(
    f: &RadialProfile,
    g: &RadialProfile,
    dim: usize,
    out_step: f64,
    out_len: usize,
    theta_panels: usize,
) -> RadialProfile {
    assert!(dim >= 1, "convolve needs dim >= 1");
    if dim == 1 {
        let values: Vec<f64> = (0..out_len)
            .map(|i| {
                let r = i as f64 * out_step;
                let s_max = f.support();
                let n = ((2.0 * s_max / f.step).ceil() as usize).max(8);
                simpson(-s_max, s_max, n, |s| f.eval(s.abs()) * g.eval((r - s).abs()))
            })
            .collect();
        return RadialProfile::from_samples(out_step, values);
    }
    // (f∗g)(r) = σ_{d−2} ∫ f(s) s^{d−1} ∫_0^π g(dist) sin^{d−2}θ dθ ds,
    // with σ_0 = sphere_area(1) = 2 and sin⁰ = 1 covering d = 2.
    let front = sphere_area(dim - 1);
    let s_max = f.support();
    let s_steps = ((s_max / f.step).ceil() as usize).max(8);
    let values: Vec<f64> = (0..out_len)
        .map(|i| {
            let r = i as f64 * out_step;
            let outer = |s: f64| {
                if s == 0.0 {
                    return 0.0;
                }
                let inner = simpson(0.0, std::f64::consts::PI, theta_panels, |theta| {
                    let d2 = r * r + s * s - 2.0 * r * s * theta.cos();
                    let dist = d2.max(0.0).sqrt();
                    let w = if dim == 2 { 1.0 } else { theta.sin().powi(dim as i32 - 2) };
                    g.eval(dist) * w
                });
                f.eval(s) * s.powi(dim as i32 - 1) * inner
            };
            front * simpson(0.0, s_max, s_steps, outer)
        })
        .collect();
    RadialProfile::from_samples(out_step, values)
}

/// Radial Fourier transform in dimension `dim` of a compactly supported
/// profile: reduces to the 1-D marginal, then evaluates
/// `ĝ(ρ) = ∫ p(t) e^{−2πitρ} dt = h·(2·Re FFT − p₀)` on a zero-padded grid.
///
/// The returned profile is sampled at the FFT's native frequency step
/// `1/(L·h) ≤ 1/256` out to `rho_max` (which must stay below the Nyquist
/// frequency `1/(2h)` of the input grid).
pub fn fourier(f: &RadialProfile, dim: usize, rho_max: f64) -> Result<RadialProfile> {
    fourier_oversampled(f, dim, rho_max, f.step)
}

/// Same as [`fourier`] but samples the 1-D marginal on a grid of spacing
/// `fine_step`, raising the usable frequency band to `0.45 / fine_step`
/// irrespective of the profile's own grid.
pub fn fourier_oversampled(
    f: &RadialProfile,
    dim: usize,
    rho_max: f64,
    fine_step: f64,
) -> Result<RadialProfile> {
    let len = (f.support() / fine_step).ceil() as usize + 2;
    let marginal = if dim == 1 {
        RadialProfile::from_fn(fine_step, len, |r| f.eval(r))
    } else {
        project(f, dim - 1, fine_step, len)
    };
    let h = marginal.step;
    if rho_max >= 0.45 / h {
        return Err(precondition(
            "rho_max",
            format!("{rho_max} exceeds the safe band {:.1} of the sample grid", 0.45 / h),
        ));
    }
    let mut l = 1usize;
    while (l as f64) < 256.0 / h || l < 2 * marginal.len() {
        l <<= 1;
        if l > (1 << 24) {
            return Err(precondition("profile", "FFT length would exceed 2^24"));
        }
    }
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); l];
    for (i, &v) in marginal.values.iter().enumerate() {
        buf[i].re = v;
    }
    FftPlanner::new().plan_fft_forward(l).process(&mut buf);
    let d_rho = 1.0 / (l as f64 * h);
    let out_len = (rho_max / d_rho).ceil() as usize + 1;
    let p0 = marginal.values[0];
    let values: Vec<f64> = (0..out_len.min(l / 2)).map(|k| h * (2.0 * buf[k].re - p0)).collect();
    Ok(RadialProfile::from_samples(d_rho, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_reproduces_cubics() {
        // Away from the origin the 4-point rule is exact on cubics.
        let p = RadialProfile::from_fn(0.1, 64, |r| 1.0 + r + r * r - 0.5 * r * r * r);
        for i in 20..500 {
            let r = i as f64 * 0.01;
            let exact = 1.0 + r + r * r - 0.5 * r * r * r;
            assert!((p.eval(r) - exact).abs() < 1e-12, "r={r}");
        }
        // Near the origin the even reflection requires an even integrand.
        let q = RadialProfile::from_fn(0.1, 64, |r| 2.0 - 3.0 * r * r);
        for i in 0..30 {
            let r = i as f64 * 0.005;
            assert!((q.eval(r) - (2.0 - 3.0 * r * r)).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn integral_matches_ball_volume() {
        // f = 1 on B_1 sampled finely; ∫_{R^3} 1_{B_1} = 4π/3.
        let p = RadialProfile::from_fn(1.0 / 4096.0, 4097, |r| if r <= 1.0 { 1.0 } else { 0.0 });
        let v = p.integral(3);
        assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 2e-3, "got {v}");
    }

    #[test]
    fn projection_of_ball_indicator_is_disc_area() {
        // Projecting 1_{B_1} ⊂ R^3 down two coordinates gives π(1−t²).
        let p = RadialProfile::from_fn(1.0 / 2048.0, 2049, |r| if r <= 1.0 { 1.0 } else { 0.0 });
        let m = project(&p, 2, 1.0 / 256.0, 257);
        for i in 0..240 {
            let t = i as f64 / 256.0;
            let exact = std::f64::consts::PI * (1.0 - t * t);
            assert!((m.eval(t) - exact).abs() < 4e-3, "t={t}: {} vs {exact}", m.eval(t));
        }
    }

    #[test]
    fn one_dim_convolution_of_boxes_is_triangle() {
        let b = RadialProfile::from_fn(1.0 / 512.0, 513, |r| if r <= 1.0 { 1.0 } else { 0.0 });
        let tri = convolve(&b, &b, 1, 1.0 / 256.0, 600, 4);
        for &(r, exact) in &[(0.0, 2.0), (0.5, 1.5), (1.0, 1.0), (1.5, 0.5), (2.1, 0.0)] {
            assert!((tri.eval(r) - exact).abs() < 6e-3, "r={r}: {}", tri.eval(r));
        }
    }

    #[test]
    fn convolution_mass_is_product_of_masses() {
        let f = RadialProfile::from_fn(1.0 / 512.0, 300, |r| (1.0 - 2.0 * r).max(0.0));
        let g = RadialProfile::from_fn(1.0 / 512.0, 420, |r| if r <= 0.7 { 1.0 - r } else { 0.0 });
        let c = convolve(&f, &g, 3, 1.0 / 512.0, 700, 96);
        let lhs = c.integral(3);
        let rhs = f.integral(3) * g.integral(3);
        assert!((lhs - rhs).abs() < 2e-4 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn fourier_of_triangle_is_squared_sinc() {
        // (1−|t|)_+ has 1-D transform (sin πρ / πρ)².
        let tri = RadialProfile::from_fn(1.0 / 2048.0, 2049, |r| (1.0 - r).max(0.0));
        let ft = fourier(&tri, 1, 64.0).unwrap();
        for &rho in &[0.0, 0.37, 1.0, 2.5, 7.25, 31.0] {
            let exact = if rho == 0.0 {
                1.0
            } else {
                let s = (std::f64::consts::PI * rho).sin() / (std::f64::consts::PI * rho);
                s * s
            };
            // The kinks of the triangle limit the Riemann sum to O(h²).
            assert!((ft.eval(rho) - exact).abs() < 5e-7, "rho={rho}: {} vs {exact}", ft.eval(rho));
        }
    }

    #[test]
    fn fourier_at_zero_is_total_mass() {
        let p = RadialProfile::from_fn(1.0 / 1024.0, 900, |r| (0.8 - r).max(0.0).powi(2));
        let ft = fourier(&p, 3, 16.0).unwrap();
        let mass = p.integral(3);
        assert!((ft.eval(0.0) - mass).abs() < 1e-7 * mass, "{} vs {mass}", ft.eval(0.0));
    }

    #[test]
    fn envelope_is_monotone_majorant() {
        let p = RadialProfile::from_fn(0.01, 1000, |r| (r * 7.0).sin() * (-r).exp());
        let env = p.envelope();
        for i in 1..env.len() {
            assert!(env[i] <= env[i - 1] + 1e-15);
            assert!(env[i] >= p.values()[i].abs());
        }
    }

    #[test]
    fn derivative_bound_tracks_known_slope() {
        let p = RadialProfile::from_fn(1.0 / 512.0, 2049, |r| (1.0 + r * r).recip());
        // sup |f'| for 1/(1+r²) is 3√3/8 ≈ 0.6495 at r = 1/√3.
        let b1 = p.derivative_bound(1);
        assert!(b1 > 0.64 && b1 < 0.66, "got {b1}");
    }
}
