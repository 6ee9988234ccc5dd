//! Povzner sweep: route equivalence, H + G decomposition, fitted constants
//! per (e, κ, n, ψ) cell and the convexity sandwich.

use std::f64::consts::PI;

use kinetics_core::dsmc::rng::{stream, MONTE_CARLO};
use kinetics_core::dsmc::unit_vector;
use kinetics_core::geometry::VelocityPair;
use kinetics_core::kernels::{AngularKernel, CutoffAngularKernel, Restitution};
use kinetics_core::povzner::{
    appendix_convexity_check, check_g_bound, check_h_bound, fit_cell, k_direct, k_transformed, povzner_report, GridPoint, PovznerInput,
    PovznerReport, WeightFunction,
};
use kinetics_core::Vec3;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentSpec, KernelParams, PovznerParams, WeightName};
use crate::criteria::{Check, CONVEXITY, DECOMPOSITION, POVZNER_FEASIBLE, POVZNER_MARGIN, ROUTE_EQUIVALENCE};
use crate::error::{HarnessError, Result};
use crate::output::{csv_bytes, num, Artifact, Outcome};

fn weight(name: WeightName, kappa: f64) -> Result<WeightFunction<f64>> {
    Ok(match name {
        WeightName::Linear => WeightFunction::linear(),
        WeightName::Psi1 => WeightFunction::psi1(kappa)?,
        WeightName::Psi2 => WeightFunction::psi2(kappa)?,
    })
}

fn input(k: &KernelParams, pair: VelocityPair<f64>, psi: WeightFunction<f64>, e: f64, n: u32) -> Result<PovznerInput> {
    Ok(PovznerInput {
        pair,
        psi,
        bn: CutoffAngularKernel::new(AngularKernel::new(k.s, k.strength)?, n)?,
        e: Restitution::new(e)?,
    })
}

/// Deterministic sweep points: every ordered speed pair at `directions`
/// angles in [0, π].
pub fn sweep_pairs(magnitudes: &[f64], directions: usize) -> Vec<VelocityPair<f64>> {
    let mut out = Vec::with_capacity(magnitudes.len().pow(2) * directions);
    for &a in magnitudes {
        for &b in magnitudes {
            for k in 0..directions {
                let t = k as f64 * PI / (directions - 1) as f64;
                out.push(VelocityPair::new(Vec3::new(a, 0.0, 0.0), Vec3::new(b * t.cos(), b * t.sin(), 0.0)));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Serialize)]
struct Cell {
    e: f64,
    kappa: f64,
    n: u32,
    weight: WeightName,
}

#[derive(Clone, Debug, Serialize)]
struct PointRow {
    cell: usize,
    v: [f64; 3],
    v_star: [f64; 3],
    k_direct: f64,
    k_transformed: f64,
    h: f64,
    g: f64,
    route_delta: f64,
    decomposition_delta: f64,
    h_margin: f64,
    g_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
struct CellRow {
    #[serde(flatten)]
    cell: Cell,
    c1: f64,
    c2: f64,
    g_constant: f64,
    g_branch: &'static str,
    feasible: bool,
    min_h_margin: f64,
    min_g_margin: f64,
    witness: Option<PointRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TupleRow {
    pub v: [f64; 3],
    pub v_star: [f64; 3],
    pub e: f64,
    pub kappa: f64,
    pub n: u32,
    pub weight: WeightName,
    pub k_direct: f64,
    pub k_transformed: f64,
    pub delta: f64,
}

/// Random tuples for the route-equivalence certificate: speeds log-uniform
/// on [0.1, 10], uniform directions, parameters drawn from the sweep lists.
pub fn random_tuples(k: &KernelParams, p: &PovznerParams, seed: u64) -> Result<Vec<TupleRow>> {
    let mut rng = stream(seed, MONTE_CARLO, 0);
    let mut jobs = Vec::with_capacity(p.random_tuples);
    for _ in 0..p.random_tuples {
        let v = unit_vector(&mut rng) * speed(&mut rng);
        let w = unit_vector(&mut rng) * speed(&mut rng);
        let e = p.e_values[rng.random_range(0..p.e_values.len())];
        let kappa = p.kappa_values[rng.random_range(0..p.kappa_values.len())];
        let n = p.n_values[rng.random_range(0..p.n_values.len())];
        let wn = p.weights[rng.random_range(0..p.weights.len())];
        jobs.push((VelocityPair::new(v, w), e, kappa, n, wn));
    }
    jobs.into_par_iter()
        .map(|(pair, e, kappa, n, wn)| {
            let inp = input(k, pair, weight(wn, kappa)?, e, n)?;
            let kd = k_direct(&inp)?.value;
            let kt = k_transformed(&inp)?.value;
            Ok(TupleRow {
                v: pair.v.to_array(),
                v_star: pair.v_star.to_array(),
                e,
                kappa,
                n,
                weight: wn,
                k_direct: kd,
                k_transformed: kt,
                delta: (kd - kt).abs() / kd.abs().max(1.0),
            })
        })
        .collect()
}

fn speed<R: Rng>(rng: &mut R) -> f64 {
    10f64.powf(rng.random_range(-1.0..1.0))
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ConvexitySweep {
    pub points: usize,
    pub violations: usize,
    pub worst: Option<(f64, f64, f64)>,
}

/// `(x, y, κ)` grid with x, y ∈ {0} ∪ log-spaced [1e-3, 1e3], checked for
/// both ψ₁ and ψ₂.
pub fn convexity_sweep(kappas: &[f64], points: usize) -> Result<ConvexitySweep> {
    let side = ((points as f64 / kappas.len() as f64).sqrt().ceil() as usize).max(2);
    let axis: Vec<f64> = std::iter::once(0.0).chain((0..side - 1).map(|k| 1e-3 * 1e6f64.powf(k as f64 / (side - 2).max(1) as f64))).collect();
    let mut s = ConvexitySweep::default();
    let mut worst_gap = 0.0f64;
    for &kappa in kappas {
        let psis = [WeightFunction::psi1(kappa)?, WeightFunction::psi2(kappa)?];
        for &x in &axis {
            for &y in &axis {
                s.points += 1;
                for psi in &psis {
                    let c = appendix_convexity_check(psi, x, y);
                    if !c.holds() {
                        s.violations += 1;
                        let gap = (c.lower - c.lhs).max(c.lhs - c.upper);
                        if gap > worst_gap {
                            worst_gap = gap;
                            s.worst = Some((x, y, kappa));
                        }
                    }
                }
            }
        }
    }
    Ok(s)
}

pub fn run(spec: &ExperimentSpec, p: &PovznerParams) -> Result<Outcome> {
    let k = &spec.kernel;
    let pairs = sweep_pairs(&p.magnitudes, p.directions);
    let mut cells = Vec::new();
    for &e in &p.e_values {
        for &kappa in &p.kappa_values {
            for &n in &p.n_values {
                for &weight in &p.weights {
                    cells.push(Cell { e, kappa, n, weight });
                }
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..pairs.len()).map(move |i| (c, i))).collect();
    let reports: Vec<PovznerReport> = jobs
        .par_iter()
        .map(|&(c, i)| {
            let cell = cells[c];
            povzner_report(&input(k, pairs[i], weight(cell.weight, cell.kappa)?, cell.e, cell.n)?).map_err(HarnessError::from)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(reports.len());
    let mut cell_rows = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let psi = weight(cell.weight, cell.kappa)?;
        let reps = &reports[c * pairs.len()..(c + 1) * pairs.len()];
        let grid: Vec<GridPoint> = pairs.iter().zip(reps).map(|(pair, r)| GridPoint { pair: *pair, h: r.h_value, g: r.g_value }).collect();
        let fit = fit_cell(&grid, &psi, p.g_tol);
        let start = rows.len();
        for (gp, r) in grid.iter().zip(reps) {
            rows.push(PointRow {
                cell: c,
                v: gp.pair.v.to_array(),
                v_star: gp.pair.v_star.to_array(),
                k_direct: r.k_direct,
                k_transformed: r.k_transformed,
                h: r.h_value,
                g: r.g_value,
                route_delta: r.route_delta(),
                decomposition_delta: r.decomposition_delta(),
                h_margin: check_h_bound(&gp.pair, &psi, gp.h, (fit.c1, fit.c2)),
                g_margin: check_g_bound(&gp.pair, cell.kappa, gp.g, fit.c_g),
            });
        }
        cell_rows.push(CellRow {
            cell: *cell,
            c1: fit.c1,
            c2: fit.c2,
            g_constant: fit.c_g,
            g_branch: match fit.g_branch {
                kinetics_core::povzner::bounds::GBranch::C3 => "C3",
                kinetics_core::povzner::bounds::GBranch::C4 => "C4",
            },
            feasible: fit.feasible() && fit.min_h_margin >= 0.0 && fit.min_g_margin >= 0.0,
            min_h_margin: fit.min_h_margin,
            min_g_margin: fit.min_g_margin,
            witness: fit.witness.map(|w| rows[start + w].clone()),
        });
    }

    let tuples = random_tuples(k, p, spec.seed)?;
    let convexity = convexity_sweep(&p.kappa_values, p.convexity_points)?;

    let worst = |f: fn(&PointRow) -> f64| rows.iter().max_by(|a, b| f(a).total_cmp(&f(b))).cloned();
    let worst_route = worst(|r| r.route_delta);
    let worst_decomp = worst(|r| r.decomposition_delta);
    let worst_tuple = tuples.iter().max_by(|a, b| a.delta.total_cmp(&b.delta)).cloned();
    let min_margin = cell_rows.iter().map(|c| c.min_h_margin.min(c.min_g_margin)).fold(f64::INFINITY, f64::min);
    let infeasible: Vec<&CellRow> = cell_rows.iter().filter(|c| !c.feasible).collect();

    let mut checks: Vec<Check> = Vec::new();
    let tuple_max = worst_tuple.as_ref().map_or(0.0, |t| t.delta);
    checks.push(ROUTE_EQUIVALENCE.check(tuple_max, format!("{} random tuples", tuples.len())));
    let sweep_route = worst_route.as_ref().map_or(0.0, |r| r.route_delta);
    checks.push(ROUTE_EQUIVALENCE.check(sweep_route, format!("{} sweep points", rows.len())));
    let witness = infeasible.first().map(|c| format!("first infeasible cell {:?}, witness {:?}", c.cell, c.witness.as_ref().map(|w| (w.v, w.v_star))));
    checks.push(POVZNER_FEASIBLE.check(infeasible.len() as f64, witness.unwrap_or_else(|| format!("{} cells", cell_rows.len()))));
    checks.push(POVZNER_MARGIN.check(min_margin, ""));
    checks.push(DECOMPOSITION.check(worst_decomp.as_ref().map_or(0.0, |r| r.decomposition_delta), ""));
    checks.push(CONVEXITY.check(convexity.violations as f64, format!("{} (x, y, kappa) points, psi1 and psi2", convexity.points)));

    let point_csv = csv_bytes(
        &["cell", "vx", "vy", "vz", "wx", "wy", "wz", "k_direct", "k_transformed", "h", "g", "route_delta", "decomposition_delta", "h_margin", "g_margin"],
        rows.iter().map(|r| {
            let mut row = vec![r.cell.to_string()];
            row.extend(r.v.iter().chain(&r.v_star).map(|x| num(*x)));
            row.extend([r.k_direct, r.k_transformed, r.h, r.g, r.route_delta, r.decomposition_delta, r.h_margin, r.g_margin].map(num));
            row
        }),
    )?;
    let tuple_csv = csv_bytes(
        &["vx", "vy", "vz", "wx", "wy", "wz", "e", "kappa", "n", "weight", "k_direct", "k_transformed", "delta"],
        tuples.iter().map(|t| {
            let mut row: Vec<String> = t.v.iter().chain(&t.v_star).map(|x| num(*x)).collect();
            row.extend([num(t.e), num(t.kappa), t.n.to_string(), format!("{:?}", t.weight).to_lowercase()]);
            row.extend([t.k_direct, t.k_transformed, t.delta].map(num));
            row
        }),
    )?;
    let summary = json!({
        "cells": cell_rows,
        "sweep_points": rows.len(),
        "worst_route_delta": worst_route,
        "worst_decomposition_delta": worst_decomp,
        "worst_random_tuple": worst_tuple,
        "convexity": convexity,
    });
    let report = json!({ "cells": cell_rows, "points": rows, "random_tuples": tuples, "convexity": convexity });
    let artifacts = vec![
        Artifact::json("povzner.json", &report)?,
        Artifact::new("points.csv", point_csv),
        Artifact::new("random_tuples.csv", tuple_csv),
    ];
    Ok(Outcome { artifacts, summary, checks })
}
