//! Angular and kinetic collision kernels and their cutoff approximations.

use crate::error::{Error, Result};
use crate::quadrature::{angular_edges, gl_panels};
use crate::real::Real;

/// Restitution coefficient with the derived half-sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Restitution<T> {
    e: T,
}

impl<T: Real> Restitution<T> {
    pub fn new(e: T) -> Result<Self> {
        if !(e > T::zero() && e <= T::one()) {
            return Err(Error::InvalidParameter {
                name: "e",
                value: e.to_f64_lossy(),
                constraint: "e ∈ (0,1] (restitution coefficient)",
            });
        }
        Ok(Self { e })
    }

    #[inline]
    pub fn e(&self) -> T {
        self.e
    }

    #[inline]
    pub fn a_plus(&self) -> T {
        (T::one() + self.e) / T::lit(2.0)
    }

    #[inline]
    pub fn a_minus(&self) -> T {
        (T::one() - self.e) / T::lit(2.0)
    }
}

/// Non-cutoff angular kernel `b(cos θ) = K θ^{-1-2s} / sin θ` on (0, π/2].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularKernel<T> {
    s: T,
    strength: T,
}

impl<T: Real> AngularKernel<T> {
    pub fn new(s: T, strength: T) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::InvalidParameter {
                name: "s",
                value: s.to_f64_lossy(),
                constraint: "s ∈ (0,1) (angular singularity order)",
            });
        }
        if !(strength >= T::zero() && strength.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "K",
                value: strength.to_f64_lossy(),
                constraint: "K ≥ 0 (angular kernel strength)",
            });
        }
        Ok(Self { s, strength })
    }

    #[inline]
    pub fn s(&self) -> T {
        self.s
    }

    #[inline]
    pub fn strength(&self) -> T {
        self.strength
    }

    /// `b` at deviation angle θ ∈ (0, π/2].
    pub fn b(&self, theta: T) -> Result<T> {
        if !(theta > T::zero() && theta <= T::FRAC_PI_2() * T::lit(1.0 + 1e-12)) {
            return Err(Error::Domain {
                what: "angular kernel",
                value: theta.to_f64_lossy(),
                domain: "(0, π/2]",
            });
        }
        Ok(self.b_unchecked(theta))
    }

    #[inline]
    pub fn b_unchecked(&self, theta: T) -> T {
        self.strength * theta.powf(-T::one() - T::lit(2.0) * self.s) / theta.sin()
    }

    /// `sin θ · b(cos θ) = K θ^{-1-2s}`.
    #[inline]
    pub fn b_sin(&self, theta: T) -> T {
        self.strength * theta.powf(-T::one() - T::lit(2.0) * self.s)
    }
}

impl AngularKernel<f64> {
    /// `∫_0^{π/2} sin^{α₀}(θ/2) b(cos θ) sin θ dθ`.
    pub fn weighted_angular_integral(&self, alpha0: f64) -> Result<f64> {
        let a = self.weighted_angular_integral_with(alpha0, 24)?;
        let b = self.weighted_angular_integral_with(alpha0, 48)?;
        let rel = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        if rel > 1e-9 {
            return Err(Error::Quadrature { achieved: rel, requested: 1e-9 });
        }
        Ok(b)
    }

    /// Same integral with a fixed number of Gauss nodes per panel.
    ///
    /// The interval below the last geometric edge is closed with the leading
    /// term of the small-angle expansion.
    pub fn weighted_angular_integral_with(&self, alpha0: f64, nodes: usize) -> Result<f64> {
        let threshold = 2.0 * self.s;
        if !(alpha0 > threshold) {
            return Err(Error::Divergent { alpha0, threshold });
        }
        let depth = 40;
        let edges = angular_edges(depth, &[]);
        let f = |t: f64| (0.5 * t).sin().powf(alpha0) * self.b_sin(t);
        let body = gl_panels(f, &edges[1..], nodes);
        let t0 = edges[1];
        let p = alpha0 - threshold;
        let tail = self.strength * 0.5f64.powf(alpha0) * t0.powf(p) / p;
        Ok(body + tail)
    }
}

/// Angular kernel capped at the integer level `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffAngularKernel<T> {
    base: AngularKernel<T>,
    n: u32,
    theta_cap: T,
}

impl<T: Real> CutoffAngularKernel<T> {
    pub fn new(base: AngularKernel<T>, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                constraint: "n ≥ 1 (cutoff level)",
            });
        }
        let theta_cap = cap_angle(&base, T::from_u32(n).unwrap());
        Ok(Self { base, n, theta_cap })
    }

    #[inline]
    pub fn base(&self) -> &AngularKernel<T> {
        &self.base
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Angle below which the cap is active (0 when it never is, π/2 when
    /// it always is).
    #[inline]
    pub fn cap_angle(&self) -> T {
        self.theta_cap
    }

    /// `min{b(θ), n}`, with the cap value at θ = 0.
    #[inline]
    pub fn bn(&self, theta: T) -> T {
        let cap = T::from_u32(self.n).unwrap();
        if theta <= self.theta_cap {
            cap
        } else {
            self.base.b_unchecked(theta).min(cap)
        }
    }
}

/// Solves `b(θ) = n`; `b` is strictly decreasing on (0, π/2].
fn cap_angle<T: Real>(b: &AngularKernel<T>, n: T) -> T {
    let half_pi = T::FRAC_PI_2();
    if b.strength() == T::zero() {
        return T::zero();
    }
    if b.b_unchecked(half_pi) >= n {
        return half_pi;
    }
    let mut lo = T::zero();
    let mut hi = half_pi;
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if b.b_unchecked(mid) > n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `2π ∫_0^{π/2} b(θ) sin θ dθ` for a bounded profile by fixed Gauss panels,
/// compared at two resolutions.
pub fn hemisphere_mass<F: Fn(f64) -> f64>(b: F, breakpoints: &[f64]) -> Result<f64> {
    let edges = angular_edges(40, breakpoints);
    let f = |t: f64| b(t) * t.sin();
    let coarse = gl_panels(f, &edges, 12);
    let fine = gl_panels(f, &edges, 24);
    let rel = (coarse - fine).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if rel > 1e-11 && (coarse - fine).abs() > 1e-300 {
        return Err(Error::Quadrature { achieved: rel, requested: 1e-11 });
    }
    Ok(2.0 * std::f64::consts::PI * fine)
}

impl CutoffAngularKernel<f64> {
    /// `∫_{S²} bₙ dσ` over the hemisphere θ ≤ π/2.
    pub fn sphere_mass(&self) -> Result<f64> {
        hemisphere_mass(|t| self.bn(t), &[self.theta_cap])
    }
}

/// Hard-potential kinetic kernel `Φ(r) = r^γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KineticKernel<T> {
    gamma: T,
}

impl<T: Real> KineticKernel<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::zero() && gamma <= T::lit(2.0)) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma.to_f64_lossy(),
                constraint: "γ ∈ (0,2] (hard-potential range)",
            });
        }
        Ok(Self { gamma })
    }

    #[inline]
    pub fn gamma(&self) -> T {
        self.gamma
    }

    #[inline]
    pub fn phi(&self, r: T) -> T {
        r.powf(self.gamma)
    }
}

#[inline]
fn bump_h<T: Real>(t: T) -> T {
    if t > T::zero() {
        (-t.recip()).exp()
    } else {
        T::zero()
    }
}

/// Smooth transition: 1 on [0, 1], 0 on [2, ∞).
#[inline]
pub fn smooth_cutoff<T: Real>(x: T) -> T {
    let x = x.abs();
    if x <= T::one() {
        return T::one();
    }
    let two = T::lit(2.0);
    if x >= two {
        return T::zero();
    }
    let a = bump_h(two - x);
    let b = bump_h(x - T::one());
    a / (a + b)
}

/// `Φₙ(r) = r^γ φ_c(r/n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifiedKineticKernel<T> {
    base: KineticKernel<T>,
    n: u32,
}

impl<T: Real> MollifiedKineticKernel<T> {
    pub fn new(base: KineticKernel<T>, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                constraint: "n ≥ 1 (cutoff level)",
            });
        }
        Ok(Self { base, n })
    }

    #[inline]
    pub fn base(&self) -> &KineticKernel<T> {
        &self.base
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn gamma(&self) -> T {
        self.base.gamma
    }

    #[inline]
    pub fn phi_n(&self, r: T) -> T {
        let n = T::from_u32(self.n).unwrap();
        if r <= n {
            return self.base.phi(r);
        }
        self.base.phi(r) * smooth_cutoff(r / n)
    }

    /// `(2n)^γ`, an upper bound of `Φₙ`.
    #[inline]
    pub fn majorant(&self) -> T {
        (T::lit(2.0) * T::from_u32(self.n).unwrap()).powf(self.base.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn kernel() -> AngularKernel<f64> {
        AngularKernel::new(0.25, 1.0).unwrap()
    }

    #[test]
    fn restitution_relations() {
        for e in [0.3f64, 0.5, 0.8, 1.0] {
            let r = Restitution::new(e).unwrap();
            assert_relative_eq!(r.a_plus() + r.a_minus(), 1.0);
            assert_relative_eq!(r.a_plus().powi(2) - r.a_minus().powi(2), e, epsilon = 1e-15);
        }
        assert_eq!(Restitution::new(1.0).unwrap().a_minus(), 0.0);
        assert!(Restitution::new(1.2).is_err());
        assert!(Restitution::new(0.0).is_err());
    }

    #[test]
    fn b_at_right_angle() {
        let expected = FRAC_PI_2.powf(-1.5);
        assert_relative_eq!(kernel().b(FRAC_PI_2).unwrap(), expected, max_relative = 1e-15);
        assert_relative_eq!(expected, 0.50794, max_relative = 1e-4);
        assert!(kernel().b(FRAC_PI_4).unwrap() > expected);
        assert!(kernel().b(0.0).is_err());
        let zero = AngularKernel::new(0.4, 0.0).unwrap();
        assert_eq!(zero.b(0.3).unwrap(), 0.0);
    }

    #[test]
    fn b_is_generic_over_f32() {
        let k = AngularKernel::<f32>::new(0.25, 1.0).unwrap();
        let v = k.b(std::f32::consts::FRAC_PI_2).unwrap();
        assert!((v - 0.50794).abs() < 1e-4);
    }

    #[test]
    fn bn_caps() {
        let bn = CutoffAngularKernel::new(kernel(), 10).unwrap();
        assert_eq!(bn.bn(1e-3), 10.0);
        assert_eq!(bn.bn(0.0), 10.0);
        assert_relative_eq!(bn.bn(FRAC_PI_2), FRAC_PI_2.powf(-1.5), max_relative = 1e-15);
        let tc = bn.cap_angle();
        assert_relative_eq!(kernel().b(tc).unwrap(), 10.0, max_relative = 1e-12);
        // Continuity at the cap.
        assert_relative_eq!(bn.bn(tc * (1.0 + 1e-12)), 10.0, max_relative = 1e-9);
    }

    #[test]
    fn bn_tends_to_b() {
        let t = 0.01;
        let b = kernel().b(t).unwrap();
        let big = CutoffAngularKernel::new(kernel(), 1 << 20).unwrap();
        assert_eq!(big.bn(t), b);
    }

    #[test]
    fn sphere_mass_of_constant_kernel() {
        let c = 0.7;
        let m = hemisphere_mass(|_| c, &[]).unwrap();
        assert_relative_eq!(m, 2.0 * PI * c, max_relative = 1e-14);
    }

    #[test]
    fn sphere_mass_matches_brute_force() {
        // Oracle: composite Simpson in θ on either side of the cap angle.
        let bn = CutoffAngularKernel::new(kernel(), 1).unwrap();
        let simpson = |a: f64, b: f64, m: usize| {
            let h = (b - a) / m as f64;
            let f = |t: f64| bn.bn(t) * t.sin();
            let mut s = f(a) + f(b);
            for k in 1..m {
                s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let tc = bn.cap_angle();
        let coarse = simpson(0.0, tc, 2000) + simpson(tc, FRAC_PI_2, 2000);
        let fine = simpson(0.0, tc, 4000) + simpson(tc, FRAC_PI_2, 4000);
        assert!((coarse - fine).abs() / fine < 1e-8);
        assert_relative_eq!(bn.sphere_mass().unwrap(), 2.0 * PI * fine, max_relative = 1e-8);
    }

    #[test]
    fn sphere_mass_grows_with_n() {
        let mut prev = 0.0;
        for k in 0..=12 {
            let m = CutoffAngularKernel::new(kernel(), 1 << k).unwrap().sphere_mass().unwrap();
            assert!(m.is_finite());
            assert!(m > prev);
            prev = m;
        }
        // b sinθ ~ θ^{-1.5} and the cap angle ~ n^{-0.4}: mass grows like n^{0.2}.
        assert!(prev > 10.0);
    }

    #[test]
    fn weighted_integral() {
        let k = kernel();
        let v = k.weighted_angular_integral(2.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let a = k.weighted_angular_integral_with(2.0, 16).unwrap();
        let b = k.weighted_angular_integral_with(2.0, 32).unwrap();
        assert!((a - b).abs() / b < 1e-8);
        assert!(matches!(k.weighted_angular_integral(0.4), Err(Error::Divergent { .. })));
        assert!(k.weighted_angular_integral(1.0).unwrap() > v);
    }

    #[test]
    fn weighted_integral_near_threshold() {
        // For α₀ = 2s + p the leading behavior is K 2^{-α₀} θ^{p-1}, integrable.
        let k = kernel();
        let v = k.weighted_angular_integral(0.6).unwrap();
        // Oracle: exact integral of the leading term over (0, π/2].
        let lead = 0.5f64.powf(0.6) * FRAC_PI_2.powf(0.1) / 0.1;
        assert!(v > 0.9 * lead && v < 1.1 * lead, "{v} vs {lead}");
    }

    #[test]
    fn phin_profile() {
        let k = MollifiedKineticKernel::new(KineticKernel::new(1.0).unwrap(), 4).unwrap();
        assert_eq!(k.phi_n(2.0), 2.0);
        assert_eq!(k.phi_n(10.0), 0.0);
        let x: f64 = 1.5;
        let h = |t: f64| (-1.0 / t).exp();
        let oracle = 6.0 * h(2.0 - x) / (h(2.0 - x) + h(x - 1.0));
        assert_relative_eq!(k.phi_n(6.0), oracle, max_relative = 1e-15);
        assert!(k.phi_n(6.0) > 0.0 && k.phi_n(6.0) < 6.0);
        assert!(KineticKernel::new(0.0).is_err());
        assert!(KineticKernel::new(2.5).is_err());
    }
}
