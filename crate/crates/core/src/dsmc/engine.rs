//! Nanbu-type acceptance–rejection stepping of the cutoff dynamics.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{post_collide_sigma, VelocityPair};
use crate::kernels::{AngularKernel, CutoffAngularKernel, KineticKernel, MollifiedKineticKernel, Restitution};

use super::ensemble::{init_ensemble, InitialLaw, ParticleEnsemble};
use super::moments::MomentSeries;
use super::rng::{self as streams, stream};
use super::snapshot::Snapshot;
use super::theta_table::{ThetaTable, DEFAULT_NODES};

/// Largest admissible `dt·Λ`.
pub const MAJORANT_LIMIT: f64 = 0.1;

/// Kernels and the precomputed sampling data of one cutoff level.
#[derive(Clone, Debug)]
pub struct CollisionModel {
    pub e: Restitution<f64>,
    pub bn: CutoffAngularKernel<f64>,
    pub phi: MollifiedKineticKernel<f64>,
    mass: f64,
    majorant: f64,
    table: ThetaTable,
    gamma_kind: GammaKind,
    n_f: f64,
}

#[derive(Clone, Copy, Debug)]
enum GammaKind {
    One,
    Two,
    General(f64),
}

impl CollisionModel {
    pub fn new(e: Restitution<f64>, bn: CutoffAngularKernel<f64>, phi: MollifiedKineticKernel<f64>) -> Result<Self> {
        let mass = bn.sphere_mass()?;
        let table = ThetaTable::new(&bn, DEFAULT_NODES)?;
        let g = phi.gamma();
        let gamma_kind = if g == 1.0 {
            GammaKind::One
        } else if g == 2.0 {
            GammaKind::Two
        } else {
            GammaKind::General(g)
        };
        Ok(Self { e, bn, phi, mass, majorant: phi.majorant(), table, gamma_kind, n_f: phi.n() as f64 })
    }

    /// Builds the model from scalar parameters.
    pub fn from_params(e: f64, gamma: f64, s: f64, strength: f64, n: u32) -> Result<Self> {
        let bn = CutoffAngularKernel::new(AngularKernel::new(s, strength)?, n)?;
        let phi = MollifiedKineticKernel::new(KineticKernel::new(gamma)?, n)?;
        Self::new(Restitution::new(e)?, bn, phi)
    }

    /// `∫ bₙ dσ`
    pub fn sphere_mass(&self) -> f64 {
        self.mass
    }

    /// `Λ = ∫bₙdσ · (2n)^γ`
    pub fn lambda_major(&self) -> f64 {
        self.mass * self.majorant
    }

    pub fn max_dt(&self) -> f64 {
        MAJORANT_LIMIT / self.lambda_major()
    }

    #[inline]
    fn phi_n(&self, r: f64) -> f64 {
        if r <= self.n_f {
            match self.gamma_kind {
                GammaKind::One => r,
                GammaKind::Two => r * r,
                GammaKind::General(g) => r.powf(g),
            }
        } else {
            self.phi.phi_n(r)
        }
    }

    /// Deviation angle from a uniform variate.
    #[inline]
    pub fn sample_theta(&self, u: f64) -> f64 {
        self.table.sample(u)
    }
}

/// Counts of one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub candidates: u64,
    pub accepted: u64,
    pub energy_change: f64,
}

/// Advances the ensemble by `dt`.
///
/// Candidate pairs ~ Poisson(N·dt·Λ/2); each is accepted with probability
/// `Φₙ(|v−v*|)/(2n)^γ`. The step draws from its own stream, keyed by the
/// ensemble seed and step index.
pub fn step(ens: &mut ParticleEnsemble, model: &CollisionModel, dt: f64) -> Result<StepStats> {
    let limit = model.max_dt();
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::TimeStep { dt, limit });
    }
    let n = ens.len();
    let mut rng = stream(ens.seed, streams::STEP, ens.steps);
    let mean = n as f64 * dt * model.lambda_major() / 2.0;
    let candidates = if mean > 0.0 { Poisson::new(mean).map_err(|_| Error::TimeStep { dt, limit })?.sample(&mut rng) as u64 } else { 0 };
    let mut stats = StepStats { candidates, ..Default::default() };
    let vs = &mut ens.velocities;
    for _ in 0..candidates {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (v, w) = (vs[i], vs[j]);
        let vm = v - w;
        let r = vm.norm();
        let u: f64 = rng.random();
        if u * model.majorant >= model.phi_n(r) || r == 0.0 {
            continue;
        }
        let theta = model.sample_theta(rng.random());
        let phi = 2.0 * PI * rng.random::<f64>();
        let dir = vm / r;
        let e1 = dir.any_orthogonal();
        let e2 = dir.cross(e1);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let sigma = dir * ct + (e1 * cp + e2 * sp) * st;
        let out = post_collide_sigma(&VelocityPair::new(v, w), sigma, &model.e);
        vs[i] = out.v_prime;
        vs[j] = out.v_star_prime;
        stats.accepted += 1;
        stats.energy_change += out.delta_e;
    }
    ens.steps += 1;
    ens.time += dt;
    ens.collisions += stats.accepted;
    Ok(stats)
}

/// Parameters of one simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub e: f64,
    pub gamma: f64,
    pub s: f64,
    pub strength: f64,
    pub n: u32,
    pub particles: usize,
    pub t_final: f64,
    pub seed: u64,
    pub initial: InitialLaw,
    pub moment_orders: Vec<f64>,
    /// Time between moment records.
    pub cadence: f64,
    /// Times at which velocity snapshots are kept.
    pub snapshot_times: Vec<f64>,
    /// Fraction of the majorant limit used as time step, in (0, 1].
    pub dt_fraction: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        Restitution::new(self.e)?;
        KineticKernel::new(self.gamma)?;
        AngularKernel::new(self.s, self.strength)?;
        if self.n == 0 {
            return Err(Error::InvalidParameter { name: "n", value: 0.0, constraint: "n ≥ 1 (cutoff level)" });
        }
        if self.particles < 2 {
            return Err(Error::InvalidParameter { name: "N", value: self.particles as f64, constraint: "N ≥ 2 particles" });
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter { name: "t_final", value: self.t_final, constraint: "t_final ≥ 0" });
        }
        if !(self.cadence > 0.0) {
            return Err(Error::InvalidParameter { name: "cadence", value: self.cadence, constraint: "cadence > 0" });
        }
        if !(self.dt_fraction > 0.0 && self.dt_fraction <= 1.0) {
            return Err(Error::InvalidParameter { name: "dt_fraction", value: self.dt_fraction, constraint: "dt_fraction ∈ (0,1]" });
        }
        self.initial.validate()
    }

    pub fn model(&self) -> Result<CollisionModel> {
        CollisionModel::from_params(self.e, self.gamma, self.s, self.strength, self.n)
    }
}

/// Result of [`run`].
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub series: MomentSeries,
    pub snapshots: Vec<Snapshot>,
    pub dt: f64,
    pub steps: u64,
    pub candidates: u64,
    pub accepted: u64,
}

/// Time grid of a run: step count and step length.
pub fn time_grid(t_final: f64, max_dt: f64) -> (u64, f64) {
    if t_final == 0.0 {
        return (0, max_dt);
    }
    let steps = (t_final / max_dt).ceil().max(1.0) as u64;
    (steps, t_final / steps as f64)
}

/// Evolves a freshly initialized ensemble to `t_final`.
pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let model = cfg.model()?;
    let ens = init_ensemble(&cfg.initial, cfg.particles, cfg.seed)?;
    run_from(cfg, &model, ens)
}

/// Evolves a given ensemble with a prepared model.
pub fn run_from(cfg: &SimConfig, model: &CollisionModel, mut ens: ParticleEnsemble) -> Result<RunOutput> {
    let (steps, dt) = time_grid(cfg.t_final, model.max_dt() * cfg.dt_fraction);
    let stride = ((cfg.cadence / dt).round() as u64).max(1);
    let mut series = MomentSeries::new(&cfg.moment_orders);
    let mut snaps: Vec<f64> = cfg.snapshot_times.iter().copied().filter(|t| *t <= cfg.t_final).collect();
    snaps.sort_by(f64::total_cmp);
    let mut snapshots = Vec::new();
    let mut next_snap = 0;
    let take_snaps = |ens: &ParticleEnsemble, time: f64, next: &mut usize, out: &mut Vec<Snapshot>| {
        while *next < snaps.len() && snaps[*next] <= time + 0.5 * dt {
            out.push(Snapshot { time, seed: ens.seed, velocities: ens.velocities.clone() });
            *next += 1;
        }
    };
    let start = ens.steps;
    series.record(&ens.velocities, ens.time, ens.collisions);
    take_snaps(&ens, ens.time, &mut next_snap, &mut snapshots);
    let (mut cand, mut acc) = (0, 0);
    for k in 1..=steps {
        let st = step(&mut ens, model, dt)?;
        cand += st.candidates;
        acc += st.accepted;
        // Time from the step count avoids accumulated rounding.
        ens.time = (ens.steps - start) as f64 * dt;
        if k % stride == 0 || k == steps {
            series.record(&ens.velocities, ens.time, ens.collisions);
        }
        take_snaps(&ens, ens.time, &mut next_snap, &mut snapshots);
    }
    Ok(RunOutput { series, snapshots, dt, steps, candidates: cand, accepted: acc })
}
