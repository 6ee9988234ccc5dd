//! Convex weights ψ used in the Povzner functional.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightKind {
    /// ψ(x) = x, a test weight for which the functional reduces to the
    /// energy loss.
    Linear,
    /// ψ₁(x) = x^{1+κ/2}
    Psi1,
    /// ψ₂(x) = (1+x)^{1+κ/2} − 1
    Psi2,
    /// ψ₂ on [0, m] continued by its tangent line beyond m.
    Truncated,
}

/// A convex weight with closed-form first and second derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightFunction<T> {
    kind: WeightKind,
    kappa: T,
    m: T,
}

impl<T: Real> WeightFunction<T> {
    pub fn linear() -> Self {
        Self { kind: WeightKind::Linear, kappa: T::zero(), m: T::zero() }
    }

    pub fn psi1(kappa: T) -> Result<Self> {
        Ok(Self { kind: WeightKind::Psi1, kappa: check_kappa(kappa)?, m: T::zero() })
    }

    pub fn psi2(kappa: T) -> Result<Self> {
        Ok(Self { kind: WeightKind::Psi2, kappa: check_kappa(kappa)?, m: T::zero() })
    }

    pub fn truncated(kappa: T, m: T) -> Result<Self> {
        if !(m > T::zero() && m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m.to_f64_lossy(),
                constraint: "m > 0 (truncation level)",
            });
        }
        Ok(Self { kind: WeightKind::Truncated, kappa: check_kappa(kappa)?, m })
    }

    #[inline]
    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    #[inline]
    pub fn kappa(&self) -> T {
        self.kappa
    }

    #[inline]
    pub fn m(&self) -> T {
        self.m
    }

    #[inline]
    fn p(&self) -> T {
        T::one() + self.kappa / T::lit(2.0)
    }

    #[inline]
    fn psi2_value(&self, x: T) -> T {
        (self.p() * x.ln_1p()).exp_m1()
    }

    #[inline]
    fn psi2_d1(&self, x: T) -> T {
        self.p() * (T::one() + x).powf(self.kappa / T::lit(2.0))
    }

    #[inline]
    fn psi2_d2(&self, x: T) -> T {
        let p = self.p();
        p * (p - T::one()) * (T::one() + x).powf(p - T::lit(2.0))
    }

    /// ψ(x); negative round-off in the argument is clamped to zero.
    #[inline]
    pub fn value(&self, x: T) -> T {
        let x = x.max(T::zero());
        match self.kind {
            WeightKind::Linear => x,
            WeightKind::Psi1 => x.powf(self.p()),
            WeightKind::Psi2 => self.psi2_value(x),
            WeightKind::Truncated => {
                if x <= self.m {
                    self.psi2_value(x)
                } else {
                    self.tangent(x)
                }
            }
        }
    }

    #[inline]
    pub fn d1(&self, x: T) -> T {
        let x = x.max(T::zero());
        match self.kind {
            WeightKind::Linear => T::one(),
            WeightKind::Psi1 => self.p() * x.powf(self.kappa / T::lit(2.0)),
            WeightKind::Psi2 => self.psi2_d1(x),
            WeightKind::Truncated => self.psi2_d1(x.min(self.m)),
        }
    }

    #[inline]
    pub fn d2(&self, x: T) -> T {
        let x = x.max(T::zero());
        match self.kind {
            WeightKind::Linear => T::zero(),
            WeightKind::Psi1 => {
                let p = self.p();
                p * (p - T::one()) * x.powf(p - T::lit(2.0))
            }
            WeightKind::Psi2 => self.psi2_d2(x),
            WeightKind::Truncated => {
                if x <= self.m {
                    self.psi2_d2(x)
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Tangent line of ψ₂ at m: `C(m)x + ψ₂(m) − C(m)m`.
    #[inline]
    pub fn tangent(&self, x: T) -> T {
        let c = self.psi2_d1(self.m);
        c * (x - self.m) + self.psi2_value(self.m)
    }

    /// `ψ_{κ,m} − p_{κ,m}`: C¹, supported on [0, m].
    pub fn compact_part(&self, x: T) -> T {
        if x >= self.m {
            T::zero()
        } else {
            self.psi2_value(x) - self.tangent(x)
        }
    }

    /// Derivative of [`Self::compact_part`].
    pub fn compact_part_d1(&self, x: T) -> T {
        if x >= self.m {
            T::zero()
        } else {
            self.psi2_d1(x) - self.psi2_d1(self.m)
        }
    }

    /// `ψ(x+y) − ψ(x) − ψ(y)` evaluated without catastrophic cancellation.
    pub fn superadditivity_gap(&self, x: T, y: T) -> T {
        let (small, big) = if x <= y { (x, y) } else { (y, x) };
        let p = self.p();
        match self.kind {
            WeightKind::Linear => T::zero(),
            WeightKind::Psi1 => {
                if big == T::zero() {
                    return T::zero();
                }
                big.powf(p) * (p * (small / big).ln_1p()).exp_m1() - small.powf(p)
            }
            WeightKind::Psi2 => {
                (T::one() + big).powf(p) * (p * (small / (T::one() + big)).ln_1p()).exp_m1() - self.psi2_value(small)
            }
            WeightKind::Truncated => self.value(x + y) - self.value(x) - self.value(y),
        }
    }

    /// Growth factor with `ψ'(ax) ≤ η₁(a)ψ'(x)` for a ≥ 1.
    ///
    /// For ψ₂: `(1+ax)^{κ/2} ≤ (a(1+x))^{κ/2}` since a ≥ 1, so `a^{κ/2}`
    /// works for every kind here.
    pub fn eta1(&self, a: T) -> T {
        match self.kind {
            WeightKind::Linear => T::one(),
            _ => a.powf(self.kappa / T::lit(2.0)),
        }
    }

    /// Factor with `ψ''(ax) ≤ η₂(a)ψ''(x)` for a ≥ 1.
    ///
    /// For κ ≥ 2 the same argument as for η₁ applies to `(1+ax)^{κ/2−1}`;
    /// for κ < 2 the exponent is negative and the factor 1 ≤ a^{κ/2} suffices.
    pub fn eta2(&self, a: T) -> T {
        self.eta1(a)
    }
}

fn check_kappa<T: Real>(kappa: T) -> Result<T> {
    if !(kappa > T::zero() && kappa.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            value: kappa.to_f64_lossy(),
            constraint: "κ > 0 (weight exponent)",
        });
    }
    Ok(kappa)
}

/// Values of the two-sided superadditivity estimate at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexityCheck<T> {
    pub lhs: T,
    pub upper: T,
    pub lower: T,
}

impl<T: Real> ConvexityCheck<T> {
    /// `lower ≤ lhs ≤ upper` up to relative round-off.
    pub fn holds(&self) -> bool {
        let slack = T::lit(1e-12) * (self.lhs.abs() + self.upper.abs() + self.lower.abs());
        self.lower <= self.lhs + slack && self.lhs <= self.upper + slack
    }
}

/// `lhs = ψ(x+y)−ψ(x)−ψ(y)`, `upper = Ã(xψ'(y)+yψ'(x))` with `Ã = η₁(2)`,
/// `lower = b̃·x·y·ψ''(x+y)` with `b̃ = 1/(2η₂(2))`.
pub fn appendix_convexity_check<T: Real>(psi: &WeightFunction<T>, x: T, y: T) -> ConvexityCheck<T> {
    let two = T::lit(2.0);
    let a_tilde = psi.eta1(two);
    let b_tilde = T::one() / (two * psi.eta2(two));
    ConvexityCheck {
        lhs: psi.superadditivity_gap(x, y),
        upper: a_tilde * (x * psi.d1(y) + y * psi.d1(x)),
        // x·y·ψ''(x+y) → 0 at the origin even where ψ''(0) is infinite.
        lower: if x * y == T::zero() { T::zero() } else { b_tilde * x * y * psi.d2(x + y) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms() {
        let p1 = WeightFunction::psi1(2.0).unwrap();
        assert_eq!(p1.value(3.0), 9.0);
        assert_eq!(p1.d1(3.0), 6.0);
        assert_eq!(p1.d2(3.0), 2.0);
        let p2 = WeightFunction::psi2(2.0).unwrap();
        assert_relative_eq!(p2.value(3.0), 15.0, max_relative = 1e-15);
        assert_relative_eq!(p2.d1(3.0), 8.0, max_relative = 1e-15);
        assert_relative_eq!(p2.d2(3.0), 2.0, max_relative = 1e-15);
        assert!(WeightFunction::psi1(0.0).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        for w in [
            WeightFunction::psi1(0.5).unwrap(),
            WeightFunction::psi2(3.0).unwrap(),
            WeightFunction::truncated(1.0, 5.0).unwrap(),
        ] {
            for x in [0.3, 1.7, 4.0, 9.0] {
                let h = 1e-5;
                let fd1 = (w.value(x + h) - w.value(x - h)) / (2.0 * h);
                let fd2 = (w.d1(x + h) - w.d1(x - h)) / (2.0 * h);
                assert_relative_eq!(w.d1(x), fd1, max_relative = 1e-8);
                assert_relative_eq!(w.d2(x), fd2, max_relative = 1e-6, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn truncated_is_c1_at_m() {
        let w = WeightFunction::truncated(1.5, 4.0).unwrap();
        let m = 4.0f64;
        // One-sided closed forms at x = m agree exactly.
        assert_eq!(w.psi2_value(m), w.tangent(m));
        assert_eq!(w.compact_part(m), 0.0);
        assert!(w.compact_part(m * (1.0 - 1e-12)).abs() < 1e-9);
        assert_eq!(w.compact_part_d1(m), 0.0);
        assert!(w.compact_part_d1(m * (1.0 - 1e-12)).abs() < 1e-9);
        assert_eq!(w.compact_part(7.0), 0.0);
        // The tangent below a convex function: the compact part is nonnegative.
        for x in [0.0, 1.0, 2.5, 3.9] {
            assert!(w.compact_part(x) >= 0.0);
        }
    }

    #[test]
    fn truncated_increases_to_psi2() {
        let psi2 = WeightFunction::psi2(1.0).unwrap();
        let x = 12.0;
        let mut prev = f64::NEG_INFINITY;
        for m in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let v = WeightFunction::truncated(1.0, m).unwrap().value(x);
            assert!(v >= prev && v <= psi2.value(x) + 1e-12);
            prev = v;
        }
        assert_eq!(prev, psi2.value(x));
    }

    #[test]
    fn appendix_quadratic_case() {
        let w = WeightFunction::psi1(2.0).unwrap();
        let (x, y) = (3.0, 5.0);
        let c = appendix_convexity_check(&w, x, y);
        assert_relative_eq!(c.lhs, 2.0 * x * y, max_relative = 1e-14);
        assert_relative_eq!(c.upper, 2.0 * 4.0 * x * y, max_relative = 1e-14);
        assert_relative_eq!(c.lower, 0.25 * 2.0 * x * y, max_relative = 1e-14);
        assert!(c.holds());
    }

    #[test]
    fn appendix_at_zero() {
        let w = WeightFunction::psi1(1.0).unwrap();
        let c = appendix_convexity_check(&w, 0.0, 2.5);
        assert_eq!((c.lhs, c.upper, c.lower), (0.0, 0.0, 0.0));
        let w2 = WeightFunction::psi2(1.0).unwrap();
        let c2 = appendix_convexity_check(&w2, 0.0, 2.5);
        assert_eq!(c2.lhs, 0.0);
        assert_eq!(c2.lower, 0.0);
        assert!(c2.holds());
    }

    #[test]
    fn gap_matches_naive_where_stable() {
        for w in [WeightFunction::psi1(1.0).unwrap(), WeightFunction::psi2(0.5).unwrap()] {
            let (x, y) = (2.0, 3.0);
            let naive = w.value(x + y) - w.value(x) - w.value(y);
            assert_relative_eq!(w.superadditivity_gap(x, y), naive, max_relative = 1e-13);
        }
    }

    #[test]
    fn convexity_check_at_origin() {
        for k in [0.5, 1.0, 3.0] {
            for w in [WeightFunction::psi1(k).unwrap(), WeightFunction::psi2(k).unwrap()] {
                let c = appendix_convexity_check(&w, 0.0, 0.0);
                assert!(c.holds(), "{c:?}");
                assert!(appendix_convexity_check(&w, 0.0, 2.0).holds());
            }
        }
    }
}
