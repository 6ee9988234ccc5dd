use kinetics_core::dsmc::{init_ensemble, step, CollisionModel, InitialLaw, ParticleEnsemble};
use kinetics_core::fourier::{default_xi_grid, empirical_cf, kalpha_distance, split_frequency, CharFuncSample};
use kinetics_core::geometry::{
    b_from_a, build_chart, chi_point_from_u, da_db, energy_loss, omega_from_sigma, one_minus_b_from_theta, post_collide_omega,
    post_collide_sigma, theta_from_b, PairFrame, VelocityPair,
};
use kinetics_core::kernels::{AngularKernel, CutoffAngularKernel, KineticKernel, MollifiedKineticKernel, Restitution};
use kinetics_core::povzner::{appendix_convexity_check, k_direct, k_transformed, PovznerInput, WeightFunction};
use kinetics_core::Vec3;
use num_complex::Complex64;
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3<f64>> {
    vec3(1.0).prop_filter_map("nonzero", |v| if v.norm() > 1e-3 { v.normalized() } else { None })
}

fn restitution() -> impl Strategy<Value = Restitution<f64>> {
    (0.05f64..=1.0).prop_map(|e| Restitution::new(e).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn collisions_conserve_momentum_and_lose_energy(v in vec3(5.0), w in vec3(5.0), sigma in unit(), e in restitution()) {
        let pair = VelocityPair::new(v, w);
        let out = post_collide_sigma(&pair, sigma, &e);
        let scale = 1.0 + pair.energy();
        prop_assert!((out.v_prime + out.v_star_prime - v - w).norm() <= 1e-13 * scale);
        let de = out.energy() - pair.energy();
        prop_assert!(de <= 1e-13 * scale);
        prop_assert!((de - out.delta_e).abs() <= 1e-12 * scale);
        prop_assert!((out.delta_e - energy_loss(&pair, sigma, &e)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn elastic_collisions_conserve_energy(v in vec3(5.0), w in vec3(5.0), sigma in unit()) {
        let pair = VelocityPair::new(v, w);
        let out = post_collide_sigma(&pair, sigma, &Restitution::new(1.0).unwrap());
        prop_assert!((out.energy() - pair.energy()).abs() <= 1e-12 * (1.0 + pair.energy()));
    }

    #[test]
    fn sigma_and_omega_routes_agree(v in vec3(5.0), w in vec3(5.0), sigma in unit(), e in restitution()) {
        let pair = VelocityPair::new(v, w);
        prop_assume!(pair.v_minus().norm() > 1e-6);
        let dir = pair.v_minus().normalized().unwrap();
        prop_assume!(sigma.dot(dir) >= 0.0);
        let (omega, lambda) = omega_from_sigma(sigma, dir, &e);
        prop_assert!((omega.norm() - 1.0).abs() < 1e-13);
        prop_assert!(lambda > 0.0);
        let a = post_collide_sigma(&pair, sigma, &e);
        let b = post_collide_omega(&pair, omega, &e);
        let scale = 1.0 + pair.v_minus().norm() + pair.v_plus().norm();
        prop_assert!((a.v_prime - b.v_prime).norm() <= 1e-12 * scale);
        prop_assert!((a.v_star_prime - b.v_star_prime).norm() <= 1e-12 * scale);
    }

    #[test]
    fn chart_round_trips(u in 0.0f64..1.0, e in restitution()) {
        let b0 = kinetics_core::geometry::b_lower(&e);
        let u = u * (1.0 - b0);
        let p = chi_point_from_u(u, &e);
        prop_assert!((p.a - theta_from_b(p.b, &e).unwrap()).abs() < 1e-12);
        prop_assert!((b_from_a(p.a, &e) - p.b).abs() < 1e-10);
        let t = p.theta();
        let omb = one_minus_b_from_theta(t, &e);
        prop_assert!((omb - u).abs() <= 1e-12 * (u + 1e-300) + 1e-15);
        prop_assert!((p.da_db - da_db(p.b, &e)).abs() <= 1e-12 * p.da_db);
    }

    #[test]
    fn jacobian_matches_finite_differences(b in 0.0f64..1.0, e in restitution()) {
        let b0 = kinetics_core::geometry::b_lower(&e);
        let b = b0 + (1.0 - b0) * (0.02 + 0.96 * b);
        let h = 1e-6;
        let fd = (theta_from_b(b + h, &e).unwrap() - theta_from_b(b - h, &e).unwrap()) / (2.0 * h);
        prop_assert!((fd - da_db(b, &e)).abs() <= 1e-6 * da_db(b, &e));
    }

    #[test]
    fn eta_stays_inside_its_range(v in vec3(5.0), w in vec3(5.0), theta in 0.01f64..1.5707, phi in 0.0f64..6.283, e in restitution()) {
        let pair = VelocityPair::new(v, w);
        prop_assume!(pair.v_minus().norm() > 1e-3 && pair.v_plus().norm() > 1e-3);
        let frame = PairFrame::new(&pair).unwrap();
        let c = build_chart(&pair, frame.sigma(theta, phi), &e).unwrap();
        prop_assert!(c.eta.abs() <= c.eta0 + 1e-12);
        prop_assert!(c.lambda > 0.0 && c.lambda <= 1.0 + 1e-12);
    }

    #[test]
    fn mollified_kernel_bounds(gamma in 0.01f64..=2.0, n in 1u32..64, x in 0.0f64..3.0) {
        let k = MollifiedKineticKernel::new(KineticKernel::new(gamma).unwrap(), n).unwrap();
        let r = x * n as f64;
        let v = k.phi_n(r);
        prop_assert!(v >= 0.0 && v <= k.majorant() * (1.0 + 1e-14));
        prop_assert!(v <= r.powf(gamma) * (1.0 + 1e-14));
        if x <= 1.0 { prop_assert_eq!(v, r.powf(gamma)); }
        if x >= 2.0 { prop_assert_eq!(v, 0.0); }
    }

    #[test]
    fn frequency_split_adds_up(xi in vec3(3.0), sigma in unit(), e in restitution()) {
        let (p, m) = split_frequency(xi, sigma, &e);
        prop_assert!((p + m - xi).norm() <= 1e-14 * (1.0 + xi.norm()));
    }

    #[test]
    fn convexity_estimate_holds(kappa in 0.1f64..4.0, x in 0.0f64..50.0, y in 0.0f64..50.0) {
        for psi in [WeightFunction::psi1(kappa).unwrap(), WeightFunction::psi2(kappa).unwrap()] {
            let c = appendix_convexity_check(&psi, x, y);
            prop_assert!(c.holds(), "{:?} κ={} x={} y={}: {:?}", psi.kind(), kappa, x, y, c);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn empirical_cf_invariants(seed in any::<u64>(), n in 2usize..400, t in 0.1f64..4.0) {
        let ens = init_ensemble(&InitialLaw::Maxwellian { temperature: t }, n, seed).unwrap();
        let g = default_xi_grid();
        let s = empirical_cf(&ens.velocities, &g).unwrap();
        prop_assert_eq!(s.values[0], Complex64::new(1.0, -0.0));
        for (k, xi) in g.iter().enumerate() {
            prop_assert!(s.values[k].norm() <= 1.0 + 1e-12);
            let j = g.iter().position(|y| *y == -*xi).unwrap();
            prop_assert_eq!(s.values[j], s.values[k].conj());
        }
    }

    #[test]
    fn kalpha_triangle_inequality(seeds in (any::<u64>(), any::<u64>(), any::<u64>()), alpha in 0.05f64..=2.0) {
        let g = default_xi_grid();
        let cf = |seed| {
            let ens = init_ensemble(&InitialLaw::Maxwellian { temperature: 1.0 }, 64, seed).unwrap();
            empirical_cf(&ens.velocities, &g).unwrap()
        };
        let (a, b, c): (CharFuncSample, CharFuncSample, CharFuncSample) = (cf(seeds.0), cf(seeds.1), cf(seeds.2));
        let ab = kalpha_distance(&a, &b, alpha).unwrap().value;
        let bc = kalpha_distance(&b, &c, alpha).unwrap().value;
        let ac = kalpha_distance(&a, &c, alpha).unwrap().value;
        prop_assert!(ac <= ab + bc + 1e-14);
        prop_assert!((ab - kalpha_distance(&b, &a, alpha).unwrap().value).abs() < 1e-15);
    }

    #[test]
    fn dsmc_step_conserves_momentum(seed in any::<u64>(), e in 0.3f64..=1.0) {
        let model = CollisionModel::from_params(e, 1.0, 0.25, 1.0, 4).unwrap();
        let mut ens: ParticleEnsemble = init_ensemble(&InitialLaw::Maxwellian { temperature: 1.0 }, 500, seed).unwrap();
        let e0 = kinetics_core::dsmc::energy(&ens.velocities);
        for _ in 0..5 {
            step(&mut ens, &model, model.max_dt()).unwrap();
        }
        let p = kinetics_core::dsmc::mean_velocity(&ens.velocities);
        prop_assert!(p.norm() < 1e-13);
        prop_assert!(kinetics_core::dsmc::energy(&ens.velocities) <= e0 * (1.0 + 1e-13));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn povzner_routes_agree(v in vec3(4.0), w in vec3(4.0), e in 0.2f64..=1.0, kappa in 0.2f64..3.0, which in 0usize..3) {
        let pair = VelocityPair::new(v, w);
        prop_assume!(pair.v_minus().norm() > 1e-2 && pair.v_plus().norm() > 1e-2);
        let psi = match which {
            0 => WeightFunction::linear(),
            1 => WeightFunction::psi1(kappa).unwrap(),
            _ => WeightFunction::psi2(kappa).unwrap(),
        };
        let bn = CutoffAngularKernel::new(AngularKernel::new(0.25, 1.0).unwrap(), 16).unwrap();
        let inp = PovznerInput { pair, psi, bn, e: Restitution::new(e).unwrap() };
        let a = k_direct(&inp).unwrap().value;
        let b = k_transformed(&inp).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{} vs {}", a, b);
    }
}
