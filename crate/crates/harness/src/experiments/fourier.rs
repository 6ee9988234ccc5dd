//! Fourier-side diagnostics: decay of the mollified kernel transform, the
//! Bobylev residual against particle runs, and the time modulus of the
//! empirical characteristic function across cutoff levels.

use kinetics_core::dsmc::{init_ensemble, step, time_grid, CollisionModel, InitialLaw};
use kinetics_core::fourier::{
    bobylev_consistency, decay_report, default_probes, default_xi_grid, empirical_cf, equicontinuity_diagnostic, BobylevOptions,
    ConsistencyConfig, DecayReport,
};
use kinetics_core::kernels::{KineticKernel, MollifiedKineticKernel};
use kinetics_core::Vec3;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentSpec, FourierParams, KernelParams};
use crate::criteria::{Check, BOBYLEV_Z, DECAY_BOUNDED, EQUICONTINUITY_GROWTH};
use crate::error::Result;
use crate::output::{csv_bytes, num, Artifact, Outcome};

#[derive(Clone, Debug, Serialize)]
pub struct DecaySummary {
    pub gamma: f64,
    pub n: u32,
    pub fitted_constant: f64,
    pub mid_max: f64,
    pub tail_max: f64,
    pub derivative_constant: f64,
    pub derivative_mid_max: f64,
    pub derivative_tail_max: f64,
}

pub fn decay_reports(p: &FourierParams) -> Result<Vec<DecayReport>> {
    let mut out = Vec::new();
    for &g in &p.decay_gammas {
        for &n in &p.decay_ns {
            let k = MollifiedKineticKernel::new(KineticKernel::new(g)?, n)?;
            out.push(decay_report(&k, p.decay_points)?);
        }
    }
    Ok(out)
}

/// Tail-to-mid ratio; a tail that vanishes outright counts as bounded.
fn growth(mid: f64, tail: f64) -> f64 {
    if tail == 0.0 {
        0.0
    } else {
        tail / mid
    }
}

pub fn decay_checks(reports: &[DecayReport]) -> Vec<Check> {
    let mut checks = Vec::new();
    for r in reports {
        checks.push(DECAY_BOUNDED.check(
            growth(r.mid_max, r.tail_max),
            format!("gamma = {}, n = {}, fitted constant {:.6e}", r.gamma, r.n, r.constant),
        ));
        checks.push(DECAY_BOUNDED.check(
            growth(r.derivative_mid_max, r.derivative_tail_max),
            format!("first derivative, gamma = {}, n = {}, fitted constant {:.6e}", r.gamma, r.n, r.derivative_constant),
        ));
    }
    checks
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub xi: [f64; 3],
    pub rhs_estimate: [f64; 2],
    pub stderr: f64,
    pub rhs_flagged: bool,
    pub fd_derivative: [f64; 2],
    pub fd_stderr: f64,
    pub z_score: f64,
}

pub fn consistency(model: &CollisionModel, p: &FourierParams, seed: u64) -> Result<Vec<ProbeRow>> {
    let cfg = ConsistencyConfig {
        initial: InitialLaw::Maxwellian { temperature: p.temperature },
        particles: p.particles,
        replicas: p.replicas,
        delta: p.delta,
        probes: p.probes.as_ref().map_or_else(default_probes, |v| v.iter().map(|a| Vec3::from_array(*a)).collect()),
        seed,
        rhs: BobylevOptions {
            cos_strata: p.cos_strata,
            phi_strata: p.phi_strata,
            sweeps: p.sweeps,
            batches: p.batches,
            seed,
            tolerance: p.rhs_tolerance,
        },
        table_cells: p.table_cells,
    };
    Ok(bobylev_consistency(model, &cfg)?
        .into_iter()
        .map(|r| ProbeRow {
            xi: r.xi.to_array(),
            rhs_estimate: [r.rhs.re, r.rhs.im],
            stderr: r.rhs_stderr,
            rhs_flagged: r.rhs_flagged,
            fd_derivative: [r.fd.re, r.fd.im],
            fd_stderr: r.fd_stderr,
            z_score: r.z_score,
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusRow {
    pub n: u32,
    pub modulus: f64,
    pub time: f64,
    pub xi: [f64; 3],
}

/// Same initial ensemble for every n; φ sampled at equally spaced times.
pub fn equicontinuity(k: &KernelParams, p: &FourierParams, seed: u64) -> Result<Vec<ModulusRow>> {
    let grid = default_xi_grid();
    let gaps = p.equicontinuity_samples - 1;
    let interval = p.equicontinuity_t_final / gaps as f64;
    let mut rows = Vec::new();
    for &n in &p.equicontinuity_ns {
        let model = CollisionModel::from_params(k.e, k.gamma, k.s, k.strength, n)?;
        let (steps, dt) = time_grid(interval, model.max_dt());
        let mut ens = init_ensemble(&InitialLaw::Maxwellian { temperature: p.temperature }, p.equicontinuity_particles, seed)?;
        let mut series = vec![empirical_cf(&ens.velocities, &grid)?];
        let mut times = vec![0.0];
        for j in 1..=gaps {
            for _ in 0..steps {
                step(&mut ens, &model, dt)?;
            }
            series.push(empirical_cf(&ens.velocities, &grid)?);
            times.push(j as f64 * interval);
        }
        let m = equicontinuity_diagnostic(&series, &times)?;
        rows.push(ModulusRow { n, modulus: m.modulus, time: times[m.pair], xi: m.xi.to_array() });
    }
    Ok(rows)
}

pub fn run(spec: &ExperimentSpec, p: &FourierParams) -> Result<Outcome> {
    let reports = decay_reports(p)?;
    let mut checks = decay_checks(&reports);
    let decay_csv = csv_bytes(
        &["gamma", "n", "zeta", "phi_hat", "ratio", "derivative", "derivative_ratio"],
        reports.iter().flat_map(|r| {
            r.rows.iter().map(move |row| {
                vec![num(r.gamma), r.n.to_string(), num(row.zeta), num(row.value), num(row.ratio), num(row.derivative), num(row.derivative_ratio)]
            })
        }),
    )?;
    let decay: Vec<DecaySummary> = reports
        .iter()
        .map(|r| DecaySummary {
            gamma: r.gamma,
            n: r.n,
            fitted_constant: r.constant,
            mid_max: r.mid_max,
            tail_max: r.tail_max,
            derivative_constant: r.derivative_constant,
            derivative_mid_max: r.derivative_mid_max,
            derivative_tail_max: r.derivative_tail_max,
        })
        .collect();

    let model = super::model(&spec.kernel)?;
    let probes = consistency(&model, p, spec.seed)?;
    for r in &probes {
        checks.push(BOBYLEV_Z.check(r.z_score, format!("xi = {:?}", r.xi)));
    }

    let moduli = equicontinuity(&spec.kernel, p, spec.seed)?;
    let first = moduli.first().map_or(f64::NAN, |m| m.modulus);
    let largest = moduli.iter().map(|m| m.modulus).fold(f64::NEG_INFINITY, f64::max);
    checks.push(EQUICONTINUITY_GROWTH.check(
        largest / first,
        format!("n = {:?}", moduli.iter().map(|m| m.n).collect::<Vec<_>>()),
    ));

    let summary = json!({
        "decay": decay,
        "probes": probes,
        "equicontinuity": moduli,
    });
    let artifacts = vec![
        Artifact::new("lemma_decay.csv", decay_csv),
        Artifact::json("fourier.json", &json!({ "probes": probes }))?,
        Artifact::json("equicontinuity.json", &moduli)?,
    ];
    Ok(Outcome { artifacts, summary, checks })
}
