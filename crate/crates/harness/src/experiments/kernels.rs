//! Kernel tables and the per-collision physics audit.

use kinetics_core::dsmc::rng::{stream, MONTE_CARLO};
use kinetics_core::dsmc::theta_table::DEFAULT_NODES;
use kinetics_core::dsmc::{unit_vector, ThetaTable};
use kinetics_core::geometry::{energy_loss, post_collide_sigma, VelocityPair};
use kinetics_core::kernels::Restitution;
use kinetics_core::Vec3;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentSpec, KernelReportParams};
use crate::criteria::{COLLISION_ENERGY, COLLISION_MOMENTUM, ELASTIC_LOSS};
use crate::error::Result;
use crate::output::{csv_bytes, num, Artifact, Outcome};

const CHUNK: usize = 8192;
/// Restitution values cycled through by the collision audit.
pub const AUDIT_E: [f64; 4] = [0.3, 0.5, 0.8, 1.0];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CollisionAudit {
    pub collisions: usize,
    /// max |Δp| / (|v| + |v*|)
    pub momentum: f64,
    /// max |ΔE − closed form| / E
    pub energy: f64,
    /// max |closed-form loss| at e = 1
    pub elastic_loss: f64,
    /// max |ΔE| / E at e = 1
    pub elastic_energy: f64,
}

impl CollisionAudit {
    fn merge(self, o: Self) -> Self {
        Self {
            collisions: self.collisions + o.collisions,
            momentum: self.momentum.max(o.momentum),
            energy: self.energy.max(o.energy),
            elastic_loss: self.elastic_loss.max(o.elastic_loss),
            elastic_energy: self.elastic_energy.max(o.elastic_energy),
        }
    }
}

fn gaussian<R: Rng>(rng: &mut R, scale: f64) -> Vec3<f64> {
    let mut g = || rng.sample::<f64, _>(StandardNormal) * scale;
    Vec3::new(g(), g(), g())
}

/// Random pairs with speeds over four decades and uniform σ.
pub fn collision_audit(count: usize, seed: u64) -> CollisionAudit {
    let es: Vec<Restitution<f64>> = AUDIT_E.iter().map(|&e| Restitution::new(e).unwrap()).collect();
    (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, MONTE_CARLO, c as u64);
            let mut a = CollisionAudit::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                let scale = 10f64.powf(rng.random_range(-2.0..2.0));
                let pair = VelocityPair::new(gaussian(&mut rng, scale), gaussian(&mut rng, scale));
                let sigma = unit_vector(&mut rng);
                let e = &es[i % es.len()];
                let out = post_collide_sigma(&pair, sigma, e);
                let loss = energy_loss(&pair, sigma, e);
                let e0 = pair.energy();
                let de = out.energy() - e0;
                let p_scale = pair.v.norm() + pair.v_star.norm();
                a.momentum = a.momentum.max((out.v_prime + out.v_star_prime - pair.v - pair.v_star).norm() / p_scale);
                a.energy = a.energy.max((de - loss).abs() / e0);
                if e.e() == 1.0 {
                    a.elastic_loss = a.elastic_loss.max(loss.abs());
                    a.elastic_energy = a.elastic_energy.max(de.abs() / e0);
                }
                a.collisions += 1;
            }
            a
        })
        .reduce(CollisionAudit::default, CollisionAudit::merge)
}

pub fn run(spec: &ExperimentSpec, p: &KernelReportParams) -> Result<Outcome> {
    let model = super::model(&spec.kernel)?;
    let base = model.bn.base();
    let mut artifacts = Vec::new();

    let half_pi = std::f64::consts::FRAC_PI_2;
    let m = p.profile_points - 1;
    let rows = (0..=m).map(|k| {
        let theta = 1e-4 * (half_pi / 1e-4).powf(k as f64 / m as f64);
        vec![num(theta), num(base.b_unchecked(theta)), num(model.bn.bn(theta))]
    });
    artifacts.push(Artifact::new("profile.csv", csv_bytes(&["theta", "b", "b_n"], rows)?));

    let table = ThetaTable::new(&model.bn, DEFAULT_NODES)?;
    let rows = table.nodes().map(|(t, c)| vec![num(t), num(c)]);
    artifacts.push(Artifact::new("theta_table.csv", csv_bytes(&["theta", "cdf"], rows)?));

    let alpha: Vec<_> = p
        .alpha0
        .iter()
        .map(|&a| match base.weighted_angular_integral(a) {
            Ok(v) => json!({ "alpha0": a, "value": v }),
            Err(e) => json!({ "alpha0": a, "error": e.to_string() }),
        })
        .collect();

    let audit = collision_audit(p.collisions, spec.seed);
    let checks = vec![
        COLLISION_MOMENTUM.check(audit.momentum, format!("{} collisions", audit.collisions)),
        COLLISION_ENERGY.check(audit.energy, format!("e cycled over {AUDIT_E:?}")),
        ELASTIC_LOSS.check(audit.elastic_loss, format!("max |dE|/E at e = 1: {:e}", audit.elastic_energy)),
    ];
    let summary = json!({
        "cap_angle": model.bn.cap_angle(),
        "sphere_mass": model.sphere_mass(),
        "majorant_rate": model.lambda_major(),
        "max_dt": model.max_dt(),
        "weighted_angular_integrals": alpha,
        "collision_audit": audit,
    });
    artifacts.push(Artifact::json("kernels.json", &summary)?);
    Ok(Outcome { artifacts, summary, checks })
}
