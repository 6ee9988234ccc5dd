//! Inelastic collision maps, the angle chart (θ,φ) ↔ (χ,μ) ↔ (B,η) and its
//! Jacobians.

use crate::error::{Error, Result};
use crate::kernels::Restitution;
use crate::real::Real;
use crate::vec3::Vec3;

/// Pre-collision velocities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityPair<T> {
    pub v: Vec3<T>,
    pub v_star: Vec3<T>,
}

impl<T: Real> VelocityPair<T> {
    pub fn new(v: Vec3<T>, v_star: Vec3<T>) -> Self {
        Self { v, v_star }
    }

    #[inline]
    pub fn v_plus(&self) -> Vec3<T> {
        self.v + self.v_star
    }

    #[inline]
    pub fn v_minus(&self) -> Vec3<T> {
        self.v - self.v_star
    }

    #[inline]
    pub fn energy(&self) -> T {
        self.v.norm_sq() + self.v_star.norm_sq()
    }
}

/// Post-collision velocities with the energy change of the collision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PostCollisionPair<T> {
    pub v_prime: Vec3<T>,
    pub v_star_prime: Vec3<T>,
    pub delta_e: T,
}

impl<T: Real> PostCollisionPair<T> {
    fn unchanged(pair: &VelocityPair<T>) -> Self {
        Self { v_prime: pair.v, v_star_prime: pair.v_star, delta_e: T::zero() }
    }

    #[inline]
    pub fn energy(&self) -> T {
        self.v_prime.norm_sq() + self.v_star_prime.norm_sq()
    }
}

/// `−(1−e²)/2 · (1 − v̂₋·σ)/2 · |v−v*|²`.
#[inline]
pub fn energy_loss<T: Real>(pair: &VelocityPair<T>, sigma: Vec3<T>, e: &Restitution<T>) -> T {
    let vm = pair.v_minus();
    let Some(dir) = vm.normalized() else {
        return T::zero();
    };
    let two = T::lit(2.0);
    let ee = e.e();
    -(T::one() - ee * ee) / two * (T::one() - dir.dot(sigma)) / two * vm.norm_sq()
}

/// σ-representation of the collision law.
#[inline]
pub fn post_collide_sigma<T: Real>(pair: &VelocityPair<T>, sigma: Vec3<T>, e: &Restitution<T>) -> PostCollisionPair<T> {
    let vm = pair.v_minus();
    let speed = vm.norm();
    if speed == T::zero() {
        return PostCollisionPair::unchanged(pair);
    }
    let half = T::lit(0.5);
    let c = pair.v_plus() * half;
    let w = vm * (e.a_minus() * half) + sigma * (e.a_plus() * half * speed);
    let ee = e.e();
    let delta_e = -(T::one() - ee * ee) * T::lit(0.25) * (T::one() - (vm / speed).dot(sigma)) * speed * speed;
    PostCollisionPair { v_prime: c + w, v_star_prime: c - w, delta_e }
}

/// `λ(cos χ) = a₋cos χ + √(a₋²(cos²χ − 1) + a₊²)`.
#[inline]
pub fn lambda_of_chi<T: Real>(cos_chi: T, e: &Restitution<T>) -> T {
    let b = cos_chi.max(-T::one()).min(T::one());
    let am = e.a_minus();
    let ap = e.a_plus();
    am * b + (ap * ap - am * am * (T::one() - b) * (T::one() + b)).sqrt()
}

/// Unit vector ω with `λω = a₊σ + a₋v̂₋`, and λ.
#[inline]
pub fn omega_from_sigma<T: Real>(sigma: Vec3<T>, dir_minus: Vec3<T>, e: &Restitution<T>) -> (Vec3<T>, T) {
    let raw = sigma * e.a_plus() + dir_minus * e.a_minus();
    let lambda = raw.norm();
    (raw / lambda, lambda)
}

/// Center-of-momentum representation `v' = (v₊ + λ|v₋|ω)/2`.
pub fn post_collide_omega<T: Real>(pair: &VelocityPair<T>, omega: Vec3<T>, e: &Restitution<T>) -> PostCollisionPair<T> {
    let vm = pair.v_minus();
    let speed = vm.norm();
    if speed == T::zero() {
        return PostCollisionPair::unchanged(pair);
    }
    let dir = vm / speed;
    let cos_chi = omega.dot(dir);
    let lambda = lambda_of_chi(cos_chi, e);
    let half = T::lit(0.5);
    let c = pair.v_plus() * half;
    let w = omega * (half * lambda * speed);
    let v_prime = c + w;
    let v_star_prime = c - w;
    // λ² − 1 = −(1−e²)(1−A)/2 with A the cosine of the σ-angle.
    let delta_e = (lambda * lambda - T::one()) * speed * speed * half;
    PostCollisionPair { v_prime, v_star_prime, delta_e }
}

/// Lower end of the admissible χ-range, `a₋/√(a₊²+a₋²)`.
#[inline]
pub fn b_lower<T: Real>(e: &Restitution<T>) -> T {
    let am = e.a_minus();
    am / e.a_plus().hypot(am)
}

/// Values of the χ → θ substitution at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiPoint<T> {
    /// B = cos χ
    pub b: T,
    /// A = cos θ
    pub a: T,
    /// 1 − A, computed without cancellation.
    pub one_minus_a: T,
    pub lambda: T,
    pub da_db: T,
}

impl<T: Real> ChiPoint<T> {
    /// θ recovered without arccos ill-conditioning near zero.
    #[inline]
    pub fn theta(&self) -> T {
        T::lit(2.0) * (self.one_minus_a / T::lit(2.0)).sqrt().min(T::one()).asin()
    }

    /// sin θ.
    #[inline]
    pub fn sin_theta(&self) -> T {
        (self.one_minus_a * (T::lit(2.0) - self.one_minus_a)).max(T::zero()).sqrt()
    }
}

/// Chart values at `B = 1 − u`, with u ∈ [0, 1 − B₀].
pub fn chi_point_from_u<T: Real>(u: T, e: &Restitution<T>) -> ChiPoint<T> {
    let ap = e.a_plus();
    let am = e.a_minus();
    let b = T::one() - u;
    let one_minus_b2 = u * (T::lit(2.0) - u);
    let r = (ap * ap - am * am * one_minus_b2).max(T::zero()).sqrt();
    let lambda = am * b + r;
    let one_minus_a = one_minus_b2 * (am + (ap * ap + am * am * b * b) / (ap + b * r)) / ap;
    let a = T::one() - one_minus_a;
    let da_db = lambda * lambda / (ap * r);
    ChiPoint { b, a, one_minus_a, lambda, da_db }
}

/// `A = cos θ` as a function of `B = cos χ`.
pub fn theta_from_b<T: Real>(b: T, e: &Restitution<T>) -> Result<T> {
    let lo = b_lower(e);
    if !(b >= lo - T::lit(1e-12) && b <= T::one() + T::lit(1e-12)) {
        return Err(Error::Domain {
            what: "cos χ",
            value: b.to_f64_lossy(),
            domain: "[a₋/√(a₊²+a₋²), 1]",
        });
    }
    let lambda = lambda_of_chi(b, e);
    Ok(((lambda * b - e.a_minus()) / e.a_plus()).max(T::zero()).min(T::one()))
}

/// `dA/dB = [a₋B + √(a₋²(B²−1)+a₊²)]² / (a₊√(a₋²(B²−1)+a₊²))`.
#[inline]
pub fn da_db<T: Real>(b: T, e: &Restitution<T>) -> T {
    let ap = e.a_plus();
    let am = e.a_minus();
    let r = (am * am * (b * b - T::one()) + ap * ap).sqrt();
    let l = am * b + r;
    l * l / (ap * r)
}

/// Inverse substitution: `cos χ` from `A = cos θ`.
#[inline]
pub fn b_from_a<T: Real>(a: T, e: &Restitution<T>) -> T {
    let ap = e.a_plus();
    let am = e.a_minus();
    let lambda = (ap * ap + am * am + T::lit(2.0) * ap * am * a).sqrt();
    (ap * a + am) / lambda
}

/// `1 − cos χ` from θ, without cancellation.
#[inline]
pub fn one_minus_b_from_theta<T: Real>(theta: T, e: &Restitution<T>) -> T {
    let ap = e.a_plus();
    let am = e.a_minus();
    let a = theta.cos();
    let s = theta.sin();
    let lambda = (ap * ap + am * am + T::lit(2.0) * ap * am * a).sqrt();
    ap * ap * s * s / (lambda * (lambda + ap * a + am))
}

/// Orthonormal frame (v̂₋, ĵ, ĥ) with ĵ ∝ v × v*.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairFrame<T> {
    pub dir_minus: Vec3<T>,
    pub j: Vec3<T>,
    pub h: Vec3<T>,
    pub collinear: bool,
}

impl<T: Real> PairFrame<T> {
    /// `None` when v = v*.
    pub fn new(pair: &VelocityPair<T>) -> Option<Self> {
        let dir_minus = pair.v_minus().normalized()?;
        let cross = pair.v.cross(pair.v_star);
        let scale = pair.v.norm() * pair.v_star.norm();
        let (j, collinear) = if scale > T::zero() && cross.norm() > T::lit(1e-14) * scale {
            (cross / cross.norm(), false)
        } else {
            (dir_minus.any_orthogonal(), true)
        };
        let h = dir_minus.cross(j);
        Some(Self { dir_minus, j, h, collinear })
    }

    /// `σ = cos θ v̂₋ + sin θ (cos φ ĵ + sin φ ĥ)`.
    #[inline]
    pub fn sigma(&self, theta: T, phi: T) -> Vec3<T> {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        self.dir_minus * ct + (self.j * cp + self.h * sp) * st
    }
}

/// Coordinates of one collision in every chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleChart<T> {
    pub theta: T,
    pub phi: T,
    pub chi: T,
    pub mu: T,
    pub beta: T,
    /// cos θ
    pub a: T,
    /// cos χ
    pub b: T,
    pub eta: T,
    pub eta0: T,
    pub lambda: T,
    pub y: T,
    pub z: T,
}

#[inline]
fn angle_between<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Builds every chart coordinate for a pair and a scattering direction.
pub fn build_chart<T: Real>(pair: &VelocityPair<T>, sigma: Vec3<T>, e: &Restitution<T>) -> Result<AngleChart<T>> {
    let frame = PairFrame::new(pair).ok_or(Error::Domain {
        what: "chart",
        value: 0.0,
        domain: "v ≠ v*",
    })?;
    let vp = pair.v_plus();
    let vp_dir = vp.normalized().ok_or(Error::Domain {
        what: "chart",
        value: 0.0,
        domain: "v + v* ≠ 0",
    })?;
    let vm = pair.v_minus();
    let theta = angle_between(frame.dir_minus, sigma);
    let mut phi = sigma.dot(frame.h).atan2(sigma.dot(frame.j));
    if phi < T::zero() {
        phi += T::TAU();
    }
    let (omega, lambda) = omega_from_sigma(sigma, frame.dir_minus, e);
    let chi = angle_between(frame.dir_minus, omega);
    let mu = angle_between(vp_dir, omega);
    let beta = angle_between(vp_dir, frame.dir_minus);
    let b = omega.dot(frame.dir_minus);
    let eta = omega.dot(vp_dir) - beta.cos() * b;
    let eta0 = beta.sin() * e.a_plus() * theta.sin() / lambda;
    let y = (vp.norm_sq() + lambda * lambda * vm.norm_sq()) / T::lit(4.0);
    let z = lambda * vp.norm() * vm.norm() / T::lit(2.0);
    debug_assert!(eta.abs() <= eta0 + T::lit(1e-10));
    Ok(AngleChart { theta, phi, chi, mu, beta, a: sigma.dot(frame.dir_minus), b, eta, eta0, lambda, y, z })
}

impl<T: Real> AngleChart<T> {
    /// `|∂φ/∂μ|` in the unreduced form.
    pub fn dphi_dmu_full(&self, e: &Restitution<T>) -> T {
        let ap = e.a_plus();
        let am = e.a_minus();
        let lc = self.lambda * self.b - am;
        let sb = self.beta.sin();
        let d = sb * sb * (ap * ap - lc * lc) - self.lambda * self.lambda * self.eta * self.eta;
        self.lambda * self.mu.sin().abs() / d.sqrt()
    }

    /// `|∂φ/∂μ| = |sin μ| / √(η₀² − η²)`.
    pub fn dphi_dmu_reduced(&self) -> T {
        self.mu.sin().abs() / (self.eta0 * self.eta0 - self.eta * self.eta).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    fn close(a: Vec3<f64>, b: Vec3<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn elastic_head_on() {
        let e = Restitution::new(1.0).unwrap();
        let p = VelocityPair::new(v(1.0, 0.0, 0.0), v(-1.0, 0.0, 0.0));
        let out = post_collide_sigma(&p, v(0.0, 1.0, 0.0), &e);
        assert!(close(out.v_prime, v(0.0, 1.0, 0.0), 1e-15));
        assert!(close(out.v_star_prime, v(0.0, -1.0, 0.0), 1e-15));
        assert_eq!(out.delta_e, 0.0);
    }

    #[test]
    fn inelastic_head_on() {
        let e = Restitution::new(0.5).unwrap();
        let p = VelocityPair::new(v(1.0, 0.0, 0.0), v(-1.0, 0.0, 0.0));
        let sigma = v(0.0, 1.0, 0.0);
        let out = post_collide_sigma(&p, sigma, &e);
        assert!(close(out.v_prime, v(0.25, 0.75, 0.0), 1e-15));
        assert!(close(out.v_star_prime, v(-0.25, -0.75, 0.0), 1e-15));
        assert_relative_eq!(out.delta_e, -0.75, max_relative = 1e-15);
        assert_relative_eq!(out.energy() - p.energy(), -0.75, max_relative = 1e-14);
        assert_relative_eq!(energy_loss(&p, sigma, &e), -0.75, max_relative = 1e-15);
    }

    #[test]
    fn equal_velocities_are_a_no_op() {
        let e = Restitution::new(0.3).unwrap();
        let p = VelocityPair::new(v(0.3, -1.0, 2.0), v(0.3, -1.0, 2.0));
        let out = post_collide_sigma(&p, v(0.0, 0.0, 1.0), &e);
        assert_eq!(out.v_prime, p.v);
        assert_eq!(out.v_star_prime, p.v_star);
        assert_eq!(out.delta_e, 0.0);
        assert_eq!(post_collide_omega(&p, v(0.0, 0.0, 1.0), &e).delta_e, 0.0);
    }

    #[test]
    fn energy_loss_vanishes_when_expected() {
        let p = VelocityPair::new(v(1.0, 2.0, 0.5), v(-0.3, 0.1, 0.0));
        let dir = p.v_minus().normalized().unwrap();
        assert_eq!(energy_loss(&p, v(0.0, 0.6, 0.8), &Restitution::new(1.0).unwrap()), 0.0);
        assert!(energy_loss(&p, dir, &Restitution::new(0.4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn lambda_special_values() {
        for e in [0.3f64, 0.5, 0.8, 1.0] {
            let r = Restitution::new(e).unwrap();
            assert_relative_eq!(lambda_of_chi(1.0, &r), 1.0, epsilon = 1e-15);
            assert_relative_eq!(lambda_of_chi(0.0, &r), e.sqrt(), epsilon = 1e-15);
        }
        let r = Restitution::new(1.0).unwrap();
        for b in [-0.7, 0.0, 0.4, 1.0] {
            assert_eq!(lambda_of_chi(b, &r), 1.0);
        }
    }

    #[test]
    fn omega_identity_collision() {
        let e = Restitution::new(1.0).unwrap();
        let p = VelocityPair::new(v(1.0, 2.0, 0.5), v(-0.3, 0.1, 0.0));
        let dir = p.v_minus().normalized().unwrap();
        let out = post_collide_omega(&p, dir, &e);
        assert!(close(out.v_prime, p.v, 1e-15));
        assert!(close(out.v_star_prime, p.v_star, 1e-15));
    }

    #[test]
    fn chart_endpoints() {
        let e = Restitution::new(0.5).unwrap();
        assert_eq!(theta_from_b(1.0, &e).unwrap(), 1.0);
        let lo = b_lower(&e);
        assert_relative_eq!(lo, 0.25 / 0.625f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(lo, 0.316228, max_relative = 1e-6);
        assert!(theta_from_b(lo, &e).unwrap().abs() < 1e-15);
        assert!(theta_from_b(lo - 0.01, &e).is_err());
    }

    #[test]
    fn elastic_jacobian_is_one() {
        let e = Restitution::new(1.0).unwrap();
        for b in [0.0, 0.3, 0.9, 1.0] {
            assert_relative_eq!(da_db(b, &e), 1.0, epsilon = 1e-15);
            assert_relative_eq!(theta_from_b(b, &e).unwrap(), b, epsilon = 1e-15);
        }
    }

    #[test]
    fn u_parametrization_matches_direct_formulas() {
        for e in [0.3f64, 0.5, 0.8, 1.0] {
            let r = Restitution::new(e).unwrap();
            let lo = b_lower(&r);
            for k in 0..=20 {
                let b = lo + (1.0 - lo) * k as f64 / 20.0;
                let p = chi_point_from_u(1.0 - b, &r);
                assert_relative_eq!(p.a, theta_from_b(b, &r).unwrap(), epsilon = 1e-13);
                assert_relative_eq!(p.da_db, da_db(b, &r), max_relative = 1e-13);
                assert_relative_eq!(p.lambda, lambda_of_chi(b, &r), max_relative = 1e-14);
                assert_relative_eq!(b_from_a(p.a, &r), b, epsilon = 1e-13);
            }
            // Near B = 1 the cancellation-free 1 − A agrees with the θ round trip.
            let theta = 1e-7;
            let u = one_minus_b_from_theta(theta, &r);
            let p = chi_point_from_u(u, &r);
            assert_relative_eq!(p.theta(), theta, max_relative = 1e-8);
        }
    }
}
