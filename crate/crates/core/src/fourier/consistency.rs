//! Finite-difference time derivative of the empirical characteristic function
//! from particle runs, set against the Fourier-side right-hand side.

use num_complex::Complex64;
use rand::Rng;

use crate::dsmc::rng::{self as streams, stream};
use crate::dsmc::{init_ensemble, step, time_grid, CollisionModel, InitialLaw};
use crate::error::{Error, Result};
use crate::vec3::Vec3;

use super::bobylev::{bobylev_rhs, BobylevKernels, BobylevOptions, GaussianSurrogate, PhiHatTable};
use super::cf::empirical_cf;

#[derive(Clone, Debug)]
pub struct ConsistencyConfig {
    pub initial: InitialLaw,
    pub particles: usize,
    pub replicas: usize,
    pub delta: f64,
    pub probes: Vec<Vec3<f64>>,
    pub seed: u64,
    pub rhs: BobylevOptions,
    pub table_cells: usize,
}

/// Five probe frequencies in different directions and magnitudes.
pub fn default_probes() -> Vec<Vec3<f64>> {
    vec![
        Vec3::new(0.5, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.5),
        Vec3::new(0.6, 0.8, 0.0),
        Vec3::new(0.7, -0.7, 0.7),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeResult {
    pub xi: Vec3<f64>,
    pub fd: Complex64,
    pub fd_stderr: f64,
    pub rhs: Complex64,
    pub rhs_stderr: f64,
    pub rhs_flagged: bool,
    /// `|fd − rhs| / sqrt(se_fd² + se_rhs²)`
    pub z_score: f64,
}

/// Runs `replicas` independent ensembles for time `delta` and compares the
/// mean difference quotient of φ with the right-hand side evaluated on a
/// Gaussian fitted to the initial ensembles.
pub fn bobylev_consistency(model: &CollisionModel, cfg: &ConsistencyConfig) -> Result<Vec<ProbeResult>> {
    if cfg.replicas < 2 || !(cfg.delta > 0.0) || cfg.probes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "replicas",
            value: cfg.replicas as f64,
            constraint: "at least two replicas, positive Δ, nonempty probe set",
        });
    }
    let (steps, dt) = time_grid(cfg.delta, model.max_dt());
    let m = cfg.probes.len();
    let mut quotients = vec![Vec::with_capacity(cfg.replicas); m];
    let mut fits = Vec::with_capacity(cfg.replicas);
    for r in 0..cfg.replicas {
        let seed = stream(cfg.seed, streams::REPLICA, r as u64).random::<u64>();
        let mut ens = init_ensemble(&cfg.initial, cfg.particles, seed)?;
        fits.push(GaussianSurrogate::fit(&ens.velocities)?);
        let before = empirical_cf(&ens.velocities, &cfg.probes)?;
        for _ in 0..steps {
            step(&mut ens, model, dt)?;
        }
        let after = empirical_cf(&ens.velocities, &cfg.probes)?;
        let span = steps as f64 * dt;
        for k in 0..m {
            quotients[k].push((after.values[k] - before.values[k]) / span);
        }
    }
    let surrogate = GaussianSurrogate::pooled(&fits).expect("replicas ≥ 2");
    let table = PhiHatTable::new(&model.phi, cfg.table_cells)?;
    let kernels = BobylevKernels { bn: &model.bn, phi_hat: &table, e: model.e };
    cfg.probes
        .iter()
        .zip(quotients)
        .enumerate()
        .map(|(k, (&xi, q))| {
            let (fd, fd_stderr) = mean_and_stderr(&q);
            let opts = BobylevOptions { seed: cfg.rhs.seed.wrapping_add(k as u64), ..cfg.rhs };
            let rhs = bobylev_rhs(&surrogate, xi, kernels, &opts)?;
            let combined = fd_stderr.hypot(rhs.stderr());
            Ok(ProbeResult {
                xi,
                fd,
                fd_stderr,
                rhs: rhs.value,
                rhs_stderr: rhs.stderr(),
                rhs_flagged: rhs.flagged,
                z_score: (fd - rhs.value).norm() / combined,
            })
        })
        .collect()
}

/// Sample mean and the standard error of its modulus components combined.
fn mean_and_stderr(xs: &[Complex64]) -> (Complex64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<Complex64>() / k;
    let var = xs.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_constant_is_zero() {
        let xs = vec![Complex64::new(1.0, 2.0); 5];
        let (m, s) = mean_and_stderr(&xs);
        assert_eq!(m, Complex64::new(1.0, 2.0));
        assert_eq!(s, 0.0);
    }
}
