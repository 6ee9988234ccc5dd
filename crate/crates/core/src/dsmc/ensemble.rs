//! Particle ensembles and the initial laws.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quadrature::gl_fixed;
use crate::vec3::Vec3;

use super::rng::{self as streams, stream};

/// How radii are drawn for the heavy-tailed law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialSampling {
    /// Independent draws.
    Iid,
    /// Midpoint quantiles `(i + ½)/N` paired with independent directions.
    Stratified,
}

/// Initial velocity law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialLaw {
    Maxwellian { temperature: f64 },
    /// Isotropic density ∝ ⟨v⟩^{−q}.
    PowerTail { q: f64, sampling: RadialSampling },
    /// Mixture: `fraction` from temperature `t1`, the rest from `t2`.
    BiMaxwellian { t1: f64, t2: f64, fraction: f64 },
}

impl InitialLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialLaw::Maxwellian { temperature } => positive("temperature", temperature),
            InitialLaw::PowerTail { q, .. } => {
                if q > 5.0 && q.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter { name: "q", value: q, constraint: "q > 5 (finite initial energy)" })
                }
            }
            InitialLaw::BiMaxwellian { t1, t2, fraction } => {
                positive("t1", t1)?;
                positive("t2", t2)?;
                if (0.0..=1.0).contains(&fraction) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter { name: "fraction", value: fraction, constraint: "fraction ∈ [0,1]" })
                }
            }
        }
    }
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value: x, constraint: "positive and finite" })
    }
}

/// N equally weighted velocities at a common time.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    pub velocities: Vec<Vec3<f64>>,
    pub time: f64,
    pub seed: u64,
    /// Steps taken; together with the seed this is the generator state.
    pub steps: u64,
    pub collisions: u64,
}

impl ParticleEnsemble {
    pub fn from_velocities(velocities: Vec<Vec3<f64>>, seed: u64) -> Result<Self> {
        if velocities.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "N",
                value: velocities.len() as f64,
                constraint: "N ≥ 2 particles",
            });
        }
        Ok(Self { velocities, time: 0.0, seed, steps: 0, collisions: 0 })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    /// Subtracts the mean velocity.
    pub fn recenter(&mut self) {
        let mean = super::moments::mean_velocity(&self.velocities);
        for v in &mut self.velocities {
            *v -= mean;
        }
    }
}

/// Draws `n` velocities from `law` and recenters them to zero mean.
pub fn init_ensemble(law: &InitialLaw, n: usize, seed: u64) -> Result<ParticleEnsemble> {
    law.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter { name: "N", value: n as f64, constraint: "N ≥ 2 particles" });
    }
    let mut rng = stream(seed, streams::INIT, 0);
    let velocities: Vec<Vec3<f64>> = match *law {
        InitialLaw::Maxwellian { temperature } => (0..n).map(|_| gaussian(&mut rng, temperature)).collect(),
        InitialLaw::BiMaxwellian { t1, t2, fraction } => (0..n)
            .map(|_| {
                let t = if rng.random::<f64>() < fraction { t1 } else { t2 };
                gaussian(&mut rng, t)
            })
            .collect(),
        InitialLaw::PowerTail { q, sampling } => {
            let radial = PowerTailRadial::new(q)?;
            (0..n)
                .map(|i| {
                    let p = match sampling {
                        RadialSampling::Iid => rng.random::<f64>(),
                        RadialSampling::Stratified => (i as f64 + 0.5) / n as f64,
                    };
                    let dir = unit_vector(&mut rng);
                    dir * radial.radius(p)
                })
                .collect()
        }
    };
    let mut ens = ParticleEnsemble::from_velocities(velocities, seed)?;
    ens.recenter();
    Ok(ens)
}

fn gaussian(rng: &mut ChaCha8Rng, temperature: f64) -> Vec3<f64> {
    let s = temperature.sqrt();
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let z: f64 = rng.sample(StandardNormal);
    Vec3::new(x, y, z) * s
}

/// Uniform direction on the unit sphere.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3<f64> {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Radial law with density ∝ r²⟨r⟩^{−q}, inverted in the variable
/// `r = tan u`, where the density becomes `sin²u cos^{q−4}u` on [0, π/2).
#[derive(Clone, Debug)]
pub struct PowerTailRadial {
    q: f64,
    edges: Vec<f64>,
    cdf: Vec<f64>,
}

const RADIAL_CELLS: usize = 4096;

impl PowerTailRadial {
    pub fn new(q: f64) -> Result<Self> {
        InitialLaw::PowerTail { q, sampling: RadialSampling::Iid }.validate()?;
        let edges: Vec<f64> = (0..=RADIAL_CELLS).map(|k| FRAC_PI_2 * k as f64 / RADIAL_CELLS as f64).collect();
        let mut cdf = vec![0.0; RADIAL_CELLS + 1];
        for k in 0..RADIAL_CELLS {
            cdf[k + 1] = cdf[k] + gl_fixed(|u| density_u(q, u), edges[k], edges[k + 1], 12);
        }
        Ok(Self { q, edges, cdf })
    }

    /// Normalizing constant of `sin²u cos^{q−4}u` on [0, π/2].
    pub fn total(&self) -> f64 {
        self.cdf[RADIAL_CELLS]
    }

    /// P(|v| ≤ r).
    pub fn cdf(&self, r: f64) -> f64 {
        let u = r.atan();
        let k = ((u / FRAC_PI_2 * RADIAL_CELLS as f64) as usize).min(RADIAL_CELLS - 1);
        (self.cdf[k] + gl_fixed(|x| density_u(self.q, x), self.edges[k], u, 12)) / self.total()
    }

    /// Radius at cumulative probability `p ∈ [0, 1)`.
    pub fn radius(&self, p: f64) -> f64 {
        let target = p.clamp(0.0, 1.0) * self.total();
        let k = self.cdf.partition_point(|&c| c <= target).clamp(1, RADIAL_CELLS) - 1;
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        let rem = target - self.cdf[k];
        let width = self.cdf[k + 1] - self.cdf[k];
        let (mut lo, mut hi) = (a, b);
        let mut u = a + (b - a) * (rem / width).clamp(0.0, 1.0);
        for _ in 0..60 {
            let f = gl_fixed(|x| density_u(self.q, x), a, u, 12) - rem;
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let d = density_u(self.q, u);
            let mut next = if d > 0.0 { u - f / d } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 1e-15 * u.max(1e-300) {
                u = next;
                break;
            }
            u = next;
        }
        u.tan()
    }
}

#[inline]
fn density_u(q: f64, u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    s * s * c.max(0.0).powf(q - 4.0)
}
