//! Monte Carlo evaluation of the collision operator in Fourier variables.
//!
//! `∂ₜφ(ξ) = (2π)^{−3} ∫_{S²} bₙ(ξ̂·σ) ∫_{R³} Φ̂ₙ(ζ)
//!           [φ(ξ⁺−ζ)φ(ξ⁻+ζ) − φ(ζ)φ(ξ−ζ)] dζ dσ`
//! with `ξ⁺ = (1+a₋)ξ/2 + a₊|ξ|σ/2` and `ξ⁻ = (1−a₋)ξ/2 − a₊|ξ|σ/2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::dsmc::rng::{self as streams, stream};
use crate::dsmc::unit_vector;
use crate::error::{Error, Result};
use crate::kernels::{CutoffAngularKernel, MollifiedKineticKernel, Restitution};
use crate::vec3::Vec3;

use super::transform::{phi_hat_n, phi_hat_zero};

/// A characteristic function that can be evaluated anywhere.
pub trait CharacteristicFunction: Sync {
    fn eval(&self, xi: Vec3<f64>) -> Complex64;
}

/// `exp(−i m·ξ − ξᵀΣξ/2)`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianSurrogate {
    pub mean: Vec3<f64>,
    pub cov: [[f64; 3]; 3],
}

impl GaussianSurrogate {
    pub fn isotropic(temperature: f64) -> Self {
        let t = temperature;
        Self { mean: Vec3::zero(), cov: [[t, 0.0, 0.0], [0.0, t, 0.0], [0.0, 0.0, t]] }
    }

    /// Mean and (population) covariance of the velocities.
    pub fn fit(vs: &[Vec3<f64>]) -> Result<Self> {
        if vs.len() < 2 {
            return Err(Error::InvalidParameter { name: "N", value: vs.len() as f64, constraint: "N ≥ 2 particles" });
        }
        let mean = crate::dsmc::mean_velocity(vs);
        let mut cov = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                let c = crate::dsmc::moments::mean_of(vs, |v| {
                    let d = (*v - mean).to_array();
                    d[a] * d[b]
                });
                cov[a][b] = c;
                cov[b][a] = c;
            }
        }
        Ok(Self { mean, cov })
    }

    /// Averages the parameters of several fits.
    pub fn pooled(fits: &[GaussianSurrogate]) -> Option<Self> {
        if fits.is_empty() {
            return None;
        }
        let k = fits.len() as f64;
        let mut out = Self { mean: Vec3::zero(), cov: [[0.0; 3]; 3] };
        for f in fits {
            out.mean += f.mean / k;
            for a in 0..3 {
                for b in 0..3 {
                    out.cov[a][b] += f.cov[a][b] / k;
                }
            }
        }
        Some(out)
    }
}

impl CharacteristicFunction for GaussianSurrogate {
    #[inline]
    fn eval(&self, xi: Vec3<f64>) -> Complex64 {
        let x = xi.to_array();
        let mut q = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                q += x[a] * self.cov[a][b] * x[b];
            }
        }
        Complex64::new(-0.5 * q, -self.mean.dot(xi)).exp()
    }
}

/// `Φ̂ₙ` tabulated on `[0, 4n]` with a sampling law proportional to
/// `|Φ̂ₙ(ρ)| ρ²` (piecewise constant).
#[derive(Clone, Debug)]
pub struct PhiHatTable {
    rho_max: f64,
    h: f64,
    values: Vec<f64>,
    cdf: Vec<f64>,
}

pub const DEFAULT_TABLE_CELLS: usize = 8192;

impl PhiHatTable {
    pub fn new(kernel: &MollifiedKineticKernel<f64>, cells: usize) -> Result<Self> {
        let cells = cells.max(4);
        let rho_max = 4.0 * kernel.n() as f64;
        let h = rho_max / cells as f64;
        let values: Vec<f64> = (0..=cells)
            .into_par_iter()
            .map(|k| if k == 0 { phi_hat_zero(kernel) } else { phi_hat_n(kernel, k as f64 * h) })
            .collect::<Result<_>>()?;
        let mut table = Self { rho_max, h, values, cdf: Vec::new() };
        let raw: Vec<f64> = (0..cells)
            .map(|k| {
                let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                let m = [a, 0.5 * (a + b), b].iter().map(|&r| table.eval(r).abs()).fold(0.0, f64::max);
                m * b * b * h
            })
            .collect();
        let floor = 1e-6 * raw.iter().copied().fold(0.0, f64::max);
        let mut cdf = Vec::with_capacity(cells + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in raw {
            acc += w + floor;
            cdf.push(acc);
        }
        table.cdf = cdf;
        Ok(table)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    /// Four-point Lagrange interpolation; zero beyond `4n`.
    pub fn eval(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        if rho > self.rho_max {
            return 0.0;
        }
        let m = self.values.len() - 1;
        let x = rho / self.h;
        let k = (x.floor() as usize).clamp(1, m - 2) - 1;
        let t = x - k as f64;
        let y = &self.values[k..k + 4];
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3]
    }

    /// Radius and its density from two uniform variates.
    #[inline]
    pub fn sample(&self, u: f64, v: f64) -> (f64, f64) {
        let total = *self.cdf.last().unwrap();
        let target = u * total;
        let cells = self.cdf.len() - 1;
        let k = self.cdf.partition_point(|&c| c <= target).clamp(1, cells) - 1;
        let w = self.cdf[k + 1] - self.cdf[k];
        ((k as f64 + v) * self.h, w / (total * self.h))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BobylevOptions {
    pub cos_strata: usize,
    pub phi_strata: usize,
    /// Passes over all strata per batch.
    pub sweeps: usize,
    pub batches: usize,
    pub seed: u64,
    /// Standard error above which the estimate is flagged.
    pub tolerance: f64,
}

impl Default for BobylevOptions {
    fn default() -> Self {
        Self { cos_strata: 32, phi_strata: 32, sweeps: 64, batches: 16, seed: 0, tolerance: 1e-2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BobylevEstimate {
    pub value: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub samples: u64,
    pub flagged: bool,
}

impl BobylevEstimate {
    pub fn stderr(&self) -> f64 {
        self.stderr_re.hypot(self.stderr_im)
    }
}

/// Kernels entering the right-hand side.
#[derive(Clone, Copy, Debug)]
pub struct BobylevKernels<'a> {
    pub bn: &'a CutoffAngularKernel<f64>,
    pub phi_hat: &'a PhiHatTable,
    pub e: Restitution<f64>,
}

/// `(ξ⁺, ξ⁻)` for a unit σ.
#[inline]
pub fn split_frequency(xi: Vec3<f64>, sigma: Vec3<f64>, e: &Restitution<f64>) -> (Vec3<f64>, Vec3<f64>) {
    let (ap, am) = (e.a_plus(), e.a_minus());
    let r = xi.norm();
    let plus = xi * (0.5 + am / 2.0) + sigma * (ap / 2.0 * r);
    let minus = xi * (0.5 - am / 2.0) - sigma * (ap / 2.0 * r);
    debug_assert!((plus + minus - xi).norm() <= 1e-12 * (1.0 + r));
    (plus, minus)
}

/// Right-hand side of the Fourier-side equation at one frequency.
///
/// σ is stratified in `(cos θ, φ)` about ξ̂ on the hemisphere where `bₙ` is
/// supported; ζ is drawn from the radial table times a uniform direction and
/// paired with −ζ.
pub fn bobylev_rhs<C: CharacteristicFunction>(
    phi: &C,
    xi: Vec3<f64>,
    kernels: BobylevKernels<'_>,
    opts: &BobylevOptions,
) -> Result<BobylevEstimate> {
    if opts.cos_strata == 0 || opts.phi_strata == 0 || opts.sweeps == 0 || opts.batches < 2 {
        return Err(Error::InvalidParameter {
            name: "batches",
            value: opts.batches as f64,
            constraint: "nonzero strata and sweeps, at least two batches",
        });
    }
    let per_batch = (opts.cos_strata * opts.phi_strata * opts.sweeps) as u64;
    let samples = per_batch * opts.batches as u64;
    let Some(dir) = xi.normalized() else {
        return Ok(BobylevEstimate { value: Complex64::new(0.0, 0.0), stderr_re: 0.0, stderr_im: 0.0, samples, flagged: false });
    };
    let e1 = dir.any_orthogonal();
    let e2 = dir.cross(e1);
    let norm = 2.0 * PI * 4.0 * PI / (2.0 * PI).powi(3);
    let means: Vec<Complex64> = (0..opts.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(opts.seed, streams::MONTE_CARLO, b as u64);
            let mut acc = Complex64::new(0.0, 0.0);
            for _ in 0..opts.sweeps {
                for i in 0..opts.cos_strata {
                    for j in 0..opts.phi_strata {
                        let ct = (i as f64 + rng.random::<f64>()) / opts.cos_strata as f64;
                        let ph = 2.0 * PI * (j as f64 + rng.random::<f64>()) / opts.phi_strata as f64;
                        let st = (1.0 - ct * ct).max(0.0).sqrt();
                        let sigma = dir * ct + (e1 * ph.cos() + e2 * ph.sin()) * st;
                        let (rho, q) = kernels.phi_hat.sample(rng.random(), rng.random());
                        let omega = unit_vector(&mut rng);
                        let zeta = omega * rho;
                        let w = kernels.bn.bn(ct.min(1.0).acos()) * rho * rho * kernels.phi_hat.eval(rho) / q;
                        let (xp, xm) = split_frequency(xi, sigma, &kernels.e);
                        let bracket = |z: Vec3<f64>| phi.eval(xp - z) * phi.eval(xm + z) - phi.eval(z) * phi.eval(xi - z);
                        acc += (bracket(zeta) + bracket(-zeta)) * (0.5 * w);
                    }
                }
            }
            acc * norm / per_batch as f64
        })
        .collect();
    let k = means.len() as f64;
    let value = means.iter().sum::<Complex64>() / k;
    let var = |f: fn(&Complex64) -> f64, m: f64| means.iter().map(|z| (f(z) - m).powi(2)).sum::<f64>() / (k - 1.0);
    let stderr_re = (var(|z| z.re, value.re) / k).sqrt();
    let stderr_im = (var(|z| z.im, value.im) / k).sqrt();
    let flagged = stderr_re.hypot(stderr_im) > opts.tolerance;
    Ok(BobylevEstimate { value, stderr_re, stderr_im, samples, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{AngularKernel, KineticKernel};

    fn setup(n: u32) -> (CutoffAngularKernel<f64>, PhiHatTable) {
        let bn = CutoffAngularKernel::new(AngularKernel::new(0.25, 1.0).unwrap(), n).unwrap();
        let k = MollifiedKineticKernel::new(KineticKernel::new(1.0).unwrap(), n).unwrap();
        (bn, PhiHatTable::new(&k, 2048).unwrap())
    }

    #[test]
    fn surrogate_of_pair() {
        let vs = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)];
        let g = GaussianSurrogate::fit(&vs).unwrap();
        assert_eq!(g.cov[0][0], 1.0);
        assert_eq!(g.cov[1][1], 0.0);
        let z = g.eval(Vec3::new(2.0, 0.0, 0.0));
        assert!((z.re - (-2.0f64).exp()).abs() < 1e-15 && z.im == 0.0);
    }

    #[test]
    fn split_adds_up() {
        let e = Restitution::new(0.7).unwrap();
        let xi = Vec3::new(0.3, -1.1, 0.4);
        let s = Vec3::new(1.0, 2.0, -2.0) / 3.0;
        let (p, m) = split_frequency(xi, s, &e);
        assert!((p + m - xi).norm() < 1e-15);
    }

    #[test]
    fn table_interpolates_transform() {
        let k = MollifiedKineticKernel::new(KineticKernel::new(1.0).unwrap(), 4).unwrap();
        let t = PhiHatTable::new(&k, 2048).unwrap();
        for rho in [0.013, 0.77, 3.3, 11.9] {
            let exact = phi_hat_n(&k, rho).unwrap();
            assert!((t.eval(rho) - exact).abs() < 1e-6 * exact.abs().max(1.0), "{rho}");
        }
        assert_eq!(t.eval(17.0), 0.0);
    }

    #[test]
    fn origin_gives_zero() {
        let (bn, table) = setup(4);
        let k = BobylevKernels { bn: &bn, phi_hat: &table, e: Restitution::new(0.8).unwrap() };
        let r = bobylev_rhs(&GaussianSurrogate::isotropic(1.0), Vec3::zero(), k, &BobylevOptions::default()).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn elastic_maxwellian_is_stationary() {
        let (bn, table) = setup(4);
        let k = BobylevKernels { bn: &bn, phi_hat: &table, e: Restitution::new(1.0).unwrap() };
        let opts = BobylevOptions { sweeps: 8, ..Default::default() };
        let r = bobylev_rhs(&GaussianSurrogate::isotropic(1.0), Vec3::new(0.0, 0.0, 1.0), k, &opts).unwrap();
        assert!(r.value.norm() < 4.0 * r.stderr() + 1e-12, "{:?}", r);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (bn, table) = setup(2);
        let k = BobylevKernels { bn: &bn, phi_hat: &table, e: Restitution::new(0.5).unwrap() };
        let opts = BobylevOptions { sweeps: 2, batches: 4, seed: 11, ..Default::default() };
        let xi = Vec3::new(0.5, 0.5, 0.0);
        let a = bobylev_rhs(&GaussianSurrogate::isotropic(1.0), xi, k, &opts).unwrap();
        let b = bobylev_rhs(&GaussianSurrogate::isotropic(1.0), xi, k, &opts).unwrap();
        assert_eq!(a, b);
    }
}
