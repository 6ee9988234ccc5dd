//! A single particle run with moment records, snapshots and the
//! dissipation/conservation audit.

use kinetics_core::dsmc::{dissipation_check, run as run_dsmc, write_snapshot, RunOutput, SimConfig};
use serde_json::json;

use crate::config::{ExperimentSpec, KernelParams, SimulateParams};
use crate::criteria::{Check, ELASTIC_ENERGY, ENERGY_MONOTONE, MOMENTUM_DRIFT};
use crate::error::Result;
use crate::output::{Artifact, Outcome};

pub fn sim_config(k: &KernelParams, p: &SimulateParams, seed: u64) -> SimConfig {
    SimConfig {
        e: k.e,
        gamma: k.gamma,
        s: k.s,
        strength: k.strength,
        n: k.n,
        particles: p.particles,
        t_final: p.t_final,
        seed,
        initial: p.initial.law(),
        moment_orders: p.moment_orders.clone(),
        cadence: p.cadence.unwrap_or(p.t_final / 100.0),
        snapshot_times: p.snapshot_times.clone(),
        dt_fraction: p.dt_fraction,
    }
}

/// Energy and momentum checks of one run; the elastic check applies at e = 1.
pub fn dissipation_checks(out: &RunOutput, e: f64) -> Vec<Check> {
    let d = dissipation_check(&out.series);
    let mut checks = vec![
        ENERGY_MONOTONE.check(d.max_energy_increase.max(d.max_energy_excess), format!("{} records", out.series.records.len())),
        MOMENTUM_DRIFT.check(d.max_momentum_drift, ""),
    ];
    if e == 1.0 {
        checks.push(ELASTIC_ENERGY.check(d.max_energy_change, ""));
    }
    checks
}

pub fn run(spec: &ExperimentSpec, p: &SimulateParams) -> Result<Outcome> {
    let cfg = sim_config(&spec.kernel, p, spec.seed);
    let out = run_dsmc(&cfg)?;
    let mut artifacts = vec![Artifact::new("moments.csv", out.series.to_csv_string())];
    for (k, s) in out.snapshots.iter().enumerate() {
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, s)?;
        artifacts.push(Artifact::new(format!("snapshots/snapshot_{k:03}.bin"), bytes));
    }
    let d = dissipation_check(&out.series);
    let checks = dissipation_checks(&out, spec.kernel.e);
    let last = out.series.records.last();
    let summary = json!({
        "dt": out.dt,
        "steps": out.steps,
        "candidates": out.candidates,
        "accepted": out.accepted,
        "final_energy": last.map(|r| r.energy),
        "max_energy_increase": d.max_energy_increase,
        "max_energy_excess": d.max_energy_excess,
        "max_energy_change": d.max_energy_change,
        "max_momentum_drift": d.max_momentum_drift,
        "snapshot_times": out.snapshots.iter().map(|s| s.time).collect::<Vec<_>>(),
    });
    Ok(Outcome { artifacts, summary, checks })
}
