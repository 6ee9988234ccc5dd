//! Inverse-CDF sampler for the deviation angle with density ∝ bₙ(cos θ) sin θ.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::kernels::CutoffAngularKernel;
use crate::quadrature::gl_fixed;

/// Tabulated `θ(F)` with monotone cubic interpolation.
#[derive(Clone, Debug)]
pub struct ThetaTable {
    cdf: Vec<f64>,
    theta: Vec<f64>,
    slope: Vec<f64>,
}

pub const DEFAULT_NODES: usize = 4096;

impl ThetaTable {
    pub fn new(bn: &CutoffAngularKernel<f64>, nodes: usize) -> Result<Self> {
        if nodes < 4 {
            return Err(Error::InvalidParameter { name: "nodes", value: nodes as f64, constraint: "at least 4 table nodes" });
        }
        let theta: Vec<f64> = (0..nodes)
            .map(|k| {
                let t = FRAC_PI_2 * 0.5 * (1.0 - (PI * k as f64 / (nodes - 1) as f64).cos());
                t.clamp(0.0, FRAC_PI_2)
            })
            .collect();
        let tc = bn.cap_angle();
        let density = |t: f64| bn.bn(t) * t.sin();
        let mut cdf = vec![0.0; nodes];
        for k in 1..nodes {
            let (a, b) = (theta[k - 1], theta[k]);
            let cell = if tc > a && tc < b {
                gl_fixed(density, a, tc, 16) + gl_fixed(density, tc, b, 16)
            } else {
                gl_fixed(density, a, b, 16)
            };
            cdf[k] = cdf[k - 1] + cell;
        }
        let total = cdf[nodes - 1];
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidParameter { name: "K", value: total, constraint: "positive angular mass" });
        }
        for c in &mut cdf {
            *c /= total;
        }
        cdf[nodes - 1] = 1.0;
        let slope = pchip_slopes(&cdf, &theta);
        Ok(Self { cdf, theta, slope })
    }

    /// θ at cumulative probability `u ∈ [0, 1)`.
    #[inline]
    pub fn sample(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1) - 1;
        let (x0, x1) = (self.cdf[k], self.cdf[k + 1]);
        let h = x1 - x0;
        if h <= 0.0 {
            return self.theta[k];
        }
        let t = ((u - x0) / h).clamp(0.0, 1.0);
        let (y0, y1) = (self.theta[k], self.theta[k + 1]);
        let (d0, d1) = (self.slope[k] * h, self.slope[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }

    /// Tabulated CDF at the node angles.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.theta.iter().copied().zip(self.cdf.iter().copied())
    }
}

/// Fritsch–Carlson monotone slopes.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1)
        .map(|k| {
            let h = x[k + 1] - x[k];
            if h > 0.0 {
                (y[k + 1] - y[k]) / h
            } else {
                0.0
            }
        })
        .collect();
    let mut d = vec![0.0; n];
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b <= 0.0 {
            d[k] = 0.0;
        } else {
            let h0 = x[k] - x[k - 1];
            let h1 = x[k + 1] - x[k];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d
}
