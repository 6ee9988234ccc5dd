//! Two independent quadratures of the Povzner functional and its H + G split.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::Result;
use crate::geometry::{chi_point_from_u, one_minus_b_from_theta, post_collide_sigma, b_lower, PairFrame, VelocityPair};
use crate::kernels::{CutoffAngularKernel, Restitution};
use crate::quadrature::{angular_edges, even_periodic_half, integrate, periodic_trapezoid, Estimate, Tolerance};

use super::weights::WeightFunction;

/// Inputs shared by every route.
#[derive(Clone, Copy, Debug)]
pub struct PovznerInput {
    pub pair: VelocityPair<f64>,
    pub psi: WeightFunction<f64>,
    pub bn: CutoffAngularKernel<f64>,
    pub e: Restitution<f64>,
}

const GEOMETRIC_DEPTH: u32 = 12;
const OUTER_REL: f64 = 1e-10;

impl PovznerInput {
    fn psi0(&self) -> f64 {
        self.psi.value(self.pair.v.norm_sq()) + self.psi.value(self.pair.v_star.norm_sq())
    }

    /// Magnitude used for absolute tolerances.
    fn scale(&self) -> f64 {
        let w = self.pair.energy();
        (self.psi0() + self.psi.value(w)).max(f64::MIN_POSITIVE)
    }

    fn outer_tol(&self) -> Tolerance {
        Tolerance { abs: 1e-13 * self.scale(), rel: OUTER_REL, max_intervals: 4000 }
    }

    fn inner_tol(&self) -> f64 {
        1e-14 * self.scale()
    }
}

/// `∫_{θ≤π/2} bₙ [ψ(|v'|²)+ψ(|v*'|²)−ψ(|v|²)−ψ(|v*|²)] dσ` in (θ, φ).
pub fn k_direct(inp: &PovznerInput) -> Result<Estimate> {
    let Some(frame) = PairFrame::new(&inp.pair) else {
        return Ok(Estimate::default());
    };
    let psi0 = inp.psi0();
    let tol = inp.inner_tol();
    let edges = angular_edges(GEOMETRIC_DEPTH, &[inp.bn.cap_angle()]);
    integrate(
        |theta| {
            let weight = inp.bn.bn(theta) * theta.sin();
            if weight == 0.0 {
                return 0.0;
            }
            let inner = periodic_trapezoid(
                |phi| {
                    let sigma = frame.sigma(theta, phi);
                    let out = post_collide_sigma(&inp.pair, sigma, &inp.e);
                    inp.psi.value(out.v_prime.norm_sq()) + inp.psi.value(out.v_star_prime.norm_sq()) - psi0
                },
                2.0 * PI,
                16,
                tol,
            );
            weight * inner.value
        },
        &edges,
        inp.outer_tol(),
    )
}

/// Quantities of the transformed chart that depend only on the pair.
#[derive(Clone, Copy, Debug)]
struct PairScalars {
    vp2: f64,
    vm2: f64,
    vp_vm: f64,
    cos_beta: f64,
    sin_beta: f64,
}

impl PairScalars {
    fn new(pair: &VelocityPair<f64>) -> Self {
        let vp = pair.v_plus();
        let vm = pair.v_minus();
        let (np, nm) = (vp.norm(), vm.norm());
        let (cos_beta, sin_beta) = if np > 0.0 && nm > 0.0 {
            let c = vp.dot(vm) / (np * nm);
            let s = vp.cross(vm).norm() / (np * nm);
            (c, s)
        } else {
            (1.0, 0.0)
        };
        Self { vp2: vp.norm_sq(), vm2: vm.norm_sq(), vp_vm: np * nm, cos_beta, sin_beta }
    }
}

/// Chart values at one outer node `B = 1 − u`.
#[derive(Clone, Copy, Debug)]
struct OuterNode {
    /// `bₙ(A(B))·dA/dB`
    weight: f64,
    y: f64,
    z: f64,
    /// cos β · B
    c: f64,
    eta0: f64,
}

fn outer_node(inp: &PovznerInput, ps: &PairScalars, u: f64) -> OuterNode {
    let cp = chi_point_from_u(u, &inp.e);
    let weight = inp.bn.bn(cp.theta()) * cp.da_db;
    let l = cp.lambda;
    OuterNode {
        weight,
        y: 0.25 * (ps.vp2 + l * l * ps.vm2),
        z: 0.5 * l * ps.vp_vm,
        c: ps.cos_beta * cp.b,
        eta0: ps.sin_beta * inp.e.a_plus() * cp.sin_theta() / l,
    }
}

/// Breakpoints in u = 1 − B matching the angular panels and the cap angle.
fn u_edges(inp: &PovznerInput) -> Vec<f64> {
    let top = 1.0 - b_lower(&inp.e);
    let mut e: Vec<f64> = angular_edges(GEOMETRIC_DEPTH, &[inp.bn.cap_angle()])
        .into_iter()
        .map(|t| if t >= FRAC_PI_2 { top } else { one_minus_b_from_theta(t, &inp.e) })
        .collect();
    e.sort_by(f64::total_cmp);
    e.dedup();
    e
}

/// The functional in the (B, η) chart with η = η₀ cos τ.
pub fn k_transformed(inp: &PovznerInput) -> Result<Estimate> {
    if inp.pair.v_minus().norm() == 0.0 {
        return Ok(Estimate::default());
    }
    let ps = PairScalars::new(&inp.pair);
    let psi0 = inp.psi0();
    let tol = inp.inner_tol();
    integrate(
        |u| {
            let nd = outer_node(inp, &ps, u);
            if nd.weight == 0.0 {
                return 0.0;
            }
            let inner = even_periodic_half(
                |tau| {
                    let cm = nd.c + nd.eta0 * tau.cos();
                    inp.psi.value(nd.y + nd.z * cm) + inp.psi.value(nd.y - nd.z * cm) - psi0
                },
                8,
                tol,
            );
            2.0 * nd.weight * inner.value
        },
        &u_edges(inp),
        inp.outer_tol(),
    )
}

/// The H + G split of the transformed functional.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HgSplit {
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub g: f64,
    pub error: f64,
}

/// Computes `h = h₁ − h₂` and `g` (the twice-integrated-by-parts remainder).
pub fn hg_decompose(inp: &PovznerInput) -> Result<HgSplit> {
    if inp.pair.v_minus().norm() == 0.0 {
        return Ok(HgSplit::default());
    }
    let ps = PairScalars::new(&inp.pair);
    let psi0 = inp.psi0();
    let edges = u_edges(inp);
    let tol = inp.outer_tol();
    let psi = &inp.psi;
    let h1 = integrate(
        |u| {
            let nd = outer_node(inp, &ps, u);
            2.0 * PI * nd.weight * (psi.value(2.0 * nd.y) - psi0)
        },
        &edges,
        tol,
    )?;
    let h2 = integrate(
        |u| {
            let nd = outer_node(inp, &ps, u);
            let gap = psi.value(2.0 * nd.y) - psi.value(nd.y + nd.z * nd.c) - psi.value(nd.y - nd.z * nd.c);
            2.0 * PI * nd.weight * gap
        },
        &edges,
        tol,
    )?;
    let g = if matches!(psi.kind(), super::weights::WeightKind::Linear) {
        Estimate::default()
    } else {
        integrate(|u| g_integrand(inp, &ps, u), &edges, tol)?
    };
    Ok(HgSplit {
        h: h1.value - h2.value,
        h1: h1.value,
        h2: h2.value,
        g: g.value,
        error: h1.error + h2.error + g.error,
    })
}

fn g_integrand(inp: &PovznerInput, ps: &PairScalars, u: f64) -> f64 {
    let nd = outer_node(inp, ps, u);
    if nd.weight == 0.0 || nd.eta0 == 0.0 || nd.z == 0.0 {
        return 0.0;
    }
    let psi = &inp.psi;
    let f = |tau: f64| {
        let (s, c) = tau.sin_cos();
        let w = (s - tau * c) * s;
        if w == 0.0 {
            return 0.0;
        }
        let d = nd.eta0 * c;
        let (c1, c2) = (nd.c + d, nd.c - d);
        w * (psi.d2(nd.y + nd.z * c1) + psi.d2(nd.y - nd.z * c1) + psi.d2(nd.y + nd.z * c2) + psi.d2(nd.y - nd.z * c2))
    };
    // The weight vanishes like τ³ at 0, so the endpoint is harmless.
    let inner = integrate(f, &[0.0, FRAC_PI_2], Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 200 })
        .map(|e| e.value)
        .unwrap_or_else(|_| crate::quadrature::gl_panels(f, &[0.0, 0.25, 0.5, 1.0, FRAC_PI_2], 40));
    2.0 * nd.weight * nd.z * nd.z * nd.eta0 * nd.eta0 * inner
}

/// Every route at one input point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PovznerReport {
    pub k_direct: f64,
    pub k_transformed: f64,
    pub h_value: f64,
    pub h1: f64,
    pub h2: f64,
    pub g_value: f64,
    pub quadrature_error_estimate: f64,
}

impl PovznerReport {
    /// `|k_direct − k_transformed| / max(1, |k_direct|)`.
    pub fn route_delta(&self) -> f64 {
        (self.k_direct - self.k_transformed).abs() / self.k_direct.abs().max(1.0)
    }

    /// `|h + g − k_transformed| / max(1, |k_transformed|)`.
    pub fn decomposition_delta(&self) -> f64 {
        (self.h_value + self.g_value - self.k_transformed).abs() / self.k_transformed.abs().max(1.0)
    }
}

pub fn povzner_report(inp: &PovznerInput) -> Result<PovznerReport> {
    let kd = k_direct(inp)?;
    let kt = k_transformed(inp)?;
    let hg = hg_decompose(inp)?;
    Ok(PovznerReport {
        k_direct: kd.value,
        k_transformed: kt.value,
        h_value: hg.h,
        h1: hg.h1,
        h2: hg.h2,
        g_value: hg.g,
        quadrature_error_estimate: kd.error + kt.error + hg.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::AngularKernel;
    use crate::quadrature::gl_panels;
    use crate::vec3::Vec3;
    use approx::assert_relative_eq;

    fn input(v: [f64; 3], w: [f64; 3], psi: WeightFunction<f64>, e: f64, n: u32) -> PovznerInput {
        PovznerInput {
            pair: VelocityPair::new(Vec3::from_array(v), Vec3::from_array(w)),
            psi,
            bn: CutoffAngularKernel::new(AngularKernel::new(0.25, 1.0).unwrap(), n).unwrap(),
            e: Restitution::new(e).unwrap(),
        }
    }

    /// `−(1−e²)|v₋|²/4 · 2π ∫ bₙ (1−cos θ) sin θ dθ`
    fn linear_oracle(inp: &PovznerInput) -> f64 {
        let edges = angular_edges(40, &[inp.bn.cap_angle()]);
        let i = gl_panels(|t| inp.bn.bn(t) * (1.0 - t.cos()) * t.sin(), &edges, 30);
        let e = inp.e.e();
        -(1.0 - e * e) * inp.pair.v_minus().norm_sq() / 4.0 * 2.0 * PI * i
    }

    #[test]
    fn linear_weight_elastic_is_zero() {
        let inp = input([1.0, 0.5, -0.2], [-0.3, 0.2, 0.9], WeightFunction::linear(), 1.0, 4);
        assert!(k_direct(&inp).unwrap().value.abs() < 1e-12);
        assert!(k_transformed(&inp).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn linear_weight_matches_energy_loss_oracle() {
        for e in [0.3, 0.8] {
            let inp = input([1.0, 0.5, -0.2], [-0.3, 0.2, 0.9], WeightFunction::linear(), e, 16);
            let oracle = linear_oracle(&inp);
            assert!(oracle < 0.0);
            assert_relative_eq!(k_direct(&inp).unwrap().value, oracle, max_relative = 1e-8);
            assert_relative_eq!(k_transformed(&inp).unwrap().value, oracle, max_relative = 1e-8);
        }
    }

    #[test]
    fn equal_velocities_give_zero() {
        let inp = input([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], WeightFunction::psi1(1.0).unwrap(), 0.5, 4);
        assert_eq!(k_direct(&inp).unwrap().value, 0.0);
        assert_eq!(k_transformed(&inp).unwrap().value, 0.0);
    }

    #[test]
    fn routes_agree() {
        for (e, psi) in [(0.5, WeightFunction::psi1(1.0).unwrap()), (1.0, WeightFunction::psi2(3.0).unwrap())] {
            let inp = input([1.3, -0.4, 0.2], [0.1, 0.8, -1.1], psi, e, 4);
            let r = povzner_report(&inp).unwrap();
            assert!(r.route_delta() < 1e-8, "{r:?}");
            assert!(r.decomposition_delta() < 1e-8, "{r:?}");
            assert!(r.g_value >= 0.0);
        }
    }

    #[test]
    fn collinear_pair_is_handled() {
        let inp = input([2.0, 0.0, 0.0], [0.5, 0.0, 0.0], WeightFunction::psi1(3.0).unwrap(), 0.5, 16);
        let r = povzner_report(&inp).unwrap();
        assert!(r.route_delta() < 1e-8, "{r:?}");
        assert_eq!(r.g_value, 0.0);
        assert!(r.decomposition_delta() < 1e-8, "{r:?}");
    }

    #[test]
    fn g_vanishes_with_a_particle_at_rest() {
        let inp = input([2.0, 1.0, 0.0], [0.0, 0.0, 0.0], WeightFunction::psi1(1.0).unwrap(), 0.5, 4);
        let hg = hg_decompose(&inp).unwrap();
        assert_eq!(hg.g, 0.0);
        assert!(hg.h <= 0.0);
    }

    #[test]
    fn small_kappa_makes_g_vanish() {
        let mut last = f64::INFINITY;
        for kappa in [1e-1, 1e-2, 1e-3] {
            let inp = input([1.0, 0.2, 0.0], [0.0, 1.0, 0.3], WeightFunction::psi1(kappa).unwrap(), 0.5, 4);
            let r = povzner_report(&inp).unwrap();
            assert!(r.g_value < last);
            last = r.g_value;
            assert!(r.g_value.abs() < 2.0 * kappa * r.k_transformed.abs().max(1.0));
        }
    }

    #[test]
    fn orthogonal_equal_speed_pair() {
        // Y² − Z² = ((1−λ²)(|v|²+|v*|²))²/16 when v·v* = 0 and |v| = |v*|.
        let pair = VelocityPair::new(Vec3::new(1.5, 0.0, 0.0), Vec3::new(0.0, 1.5, 0.0));
        let ps = PairScalars::new(&pair);
        let inp = input([1.5, 0.0, 0.0], [0.0, 1.5, 0.0], WeightFunction::psi1(1.0).unwrap(), 0.3, 4);
        for u in [0.0, 0.1, 0.4] {
            let nd = outer_node(&inp, &ps, u);
            let l = chi_point_from_u(u, &inp.e).lambda;
            let expect = ((1.0 - l * l) * pair.energy()).powi(2) / 16.0;
            assert_relative_eq!(nd.y * nd.y - nd.z * nd.z, expect, epsilon = 1e-13);
        }
    }
}
