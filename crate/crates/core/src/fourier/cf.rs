//! Empirical characteristic functions and distances between them.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::vec3::Vec3;

const CHUNK: usize = 8192;

/// Values of a characteristic function on a frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CharFuncSample {
    pub xi_grid: Vec<Vec3<f64>>,
    pub values: Vec<Complex64>,
}

impl CharFuncSample {
    /// Samples an analytic characteristic function on `grid`.
    pub fn from_fn<F: Fn(Vec3<f64>) -> Complex64>(grid: &[Vec3<f64>], f: F) -> Self {
        Self { xi_grid: grid.to_vec(), values: grid.iter().map(|&x| f(x)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn same_grid(&self, o: &Self) -> bool {
        self.xi_grid == o.xi_grid && self.values.len() == self.xi_grid.len() && o.values.len() == o.xi_grid.len()
    }
}

/// Origin plus shells |ξ| ∈ {0.5, 1, 2}, each along the 26 cube directions
/// (faces, edges, corners).
pub fn default_xi_grid() -> Vec<Vec3<f64>> {
    let mut dirs = Vec::with_capacity(26);
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                if (i, j, k) != (0, 0, 0) {
                    let d = Vec3::new(i as f64, j as f64, k as f64);
                    dirs.push(d / d.norm());
                }
            }
        }
    }
    let mut grid = vec![Vec3::zero()];
    for r in [0.5, 1.0, 2.0] {
        grid.extend(dirs.iter().map(|&d| d * r));
    }
    grid
}

#[inline]
fn two_sum(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// `φ(ξ) = (1/N) Σ exp(−i vⱼ·ξ)` at every grid node.
///
/// Sums run over fixed chunks with compensation, so the result does not depend
/// on the worker count. `sin` is evaluated on |v·ξ| and signed afterwards,
/// which makes mirrored nodes exact conjugates.
pub fn empirical_cf(velocities: &[Vec3<f64>], grid: &[Vec3<f64>]) -> Result<CharFuncSample> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter { name: "xi_grid", value: 0.0, constraint: "nonempty frequency grid" });
    }
    if velocities.is_empty() {
        return Err(Error::InvalidParameter { name: "N", value: 0.0, constraint: "N ≥ 1 particles" });
    }
    let m = grid.len();
    let partial: Vec<Vec<[f64; 4]>> = velocities
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![[0.0; 4]; m];
            for v in chunk {
                for (a, xi) in acc.iter_mut().zip(grid) {
                    let t = v.dot(*xi);
                    let (s, c) = t.abs().sin_cos();
                    let [cs, cc, ss, sc] = a;
                    two_sum(cs, cc, c);
                    two_sum(ss, sc, s.copysign(t));
                }
            }
            acc
        })
        .collect();
    let n = velocities.len() as f64;
    let values = (0..m)
        .map(|k| {
            let (mut cs, mut cc, mut ss, mut sc) = (0.0, 0.0, 0.0, 0.0);
            for p in &partial {
                two_sum(&mut cs, &mut cc, p[k][0]);
                cc += p[k][1];
                two_sum(&mut ss, &mut sc, p[k][2]);
                sc += p[k][3];
            }
            Complex64::new((cs + cc) / n, -(ss + sc) / n)
        })
        .collect();
    Ok(CharFuncSample { xi_grid: grid.to_vec(), values })
}

/// Grid supremum of `|φ − φ̃| / |ξ|^α` and where it is attained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KAlphaDistance {
    pub alpha: f64,
    pub value: f64,
    pub argmax_xi: Vec3<f64>,
}

pub fn kalpha_distance(phi: &CharFuncSample, phi_tilde: &CharFuncSample, alpha: f64) -> Result<KAlphaDistance> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter { name: "alpha", value: alpha, constraint: "0 < α ≤ 2" });
    }
    if !phi.same_grid(phi_tilde) {
        return Err(Error::GridMismatch(format!(
            "frequency grids differ ({} vs {} nodes)",
            phi.xi_grid.len(),
            phi_tilde.xi_grid.len()
        )));
    }
    let mut best = KAlphaDistance { alpha, value: 0.0, argmax_xi: Vec3::zero() };
    for ((xi, a), b) in phi.xi_grid.iter().zip(&phi.values).zip(&phi_tilde.values) {
        let r = xi.norm();
        if r == 0.0 {
            continue;
        }
        let d = (a - b).norm() / r.powf(alpha);
        if d > best.value {
            best.value = d;
            best.argmax_xi = *xi;
        }
    }
    Ok(best)
}

/// Largest difference quotient `|φ(t,ξ) − φ(s,ξ)| / |t − s|` over consecutive
/// samples and grid nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeModulus {
    pub modulus: f64,
    /// Index `k` of the pair `(k, k+1)` attaining the maximum.
    pub pair: usize,
    pub xi: Vec3<f64>,
}

pub fn equicontinuity_diagnostic(series: &[CharFuncSample], times: &[f64]) -> Result<TimeModulus> {
    if series.len() < 2 || series.len() != times.len() {
        return Err(Error::InvalidParameter {
            name: "series",
            value: series.len() as f64,
            constraint: "at least two samples, one time per sample",
        });
    }
    let mut best = TimeModulus { modulus: 0.0, pair: 0, xi: Vec3::zero() };
    for k in 0..series.len() - 1 {
        let (a, b) = (&series[k], &series[k + 1]);
        if !a.same_grid(b) {
            return Err(Error::GridMismatch(format!("samples {k} and {} use different grids", k + 1)));
        }
        let dt = (times[k + 1] - times[k]).abs();
        if dt == 0.0 {
            return Err(Error::InvalidParameter { name: "times", value: times[k], constraint: "distinct sample times" });
        }
        for ((xi, p), q) in a.xi_grid.iter().zip(&a.values).zip(&b.values) {
            let m = (p - q).norm() / dt;
            if m > best.modulus {
                best = TimeModulus { modulus: m, pair: k, xi: *xi };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let g = default_xi_grid();
        assert_eq!(g.len(), 79);
        assert_eq!(g[0], Vec3::zero());
        for x in &g {
            assert!(g.iter().any(|y| *y == -*x));
        }
    }

    #[test]
    fn dirac_is_one() {
        let vs = vec![Vec3::zero(); 10];
        let s = empirical_cf(&vs, &default_xi_grid()).unwrap();
        assert!(s.values.iter().all(|z| z.re == 1.0 && z.im == 0.0));
    }

    #[test]
    fn symmetric_pair_gives_cosine() {
        let v0 = Vec3::new(0.3, -1.2, 0.7);
        let vs = vec![v0, -v0];
        let s = empirical_cf(&vs, &default_xi_grid()).unwrap();
        for (xi, z) in s.xi_grid.iter().zip(&s.values) {
            assert!((z.re - v0.dot(*xi).cos()).abs() < 1e-15);
            assert!(z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(empirical_cf(&[Vec3::zero()], &[]).is_err());
    }

    #[test]
    fn kalpha_of_gaussian_vs_one() {
        // (1 − e^{−x})/(2x) at x = |ξ|²/2; the smallest shell maximizes it.
        let g = default_xi_grid();
        let one = CharFuncSample::from_fn(&g, |_| Complex64::new(1.0, 0.0));
        let gauss = CharFuncSample::from_fn(&g, |x| Complex64::new((-x.norm_sq() / 2.0).exp(), 0.0));
        let d = kalpha_distance(&one, &gauss, 2.0).unwrap();
        let x: f64 = 0.125;
        assert!((d.value - (1.0 - (-x).exp()) / (2.0 * x)).abs() < 1e-14);
        assert!((d.argmax_xi.norm() - 0.5).abs() < 1e-15);
        let fine = [Vec3::new(1e-4, 0.0, 0.0)];
        let d = kalpha_distance(
            &CharFuncSample::from_fn(&fine, |_| Complex64::new(1.0, 0.0)),
            &CharFuncSample::from_fn(&fine, |x| Complex64::new((-x.norm_sq() / 2.0).exp(), 0.0)),
            2.0,
        )
        .unwrap();
        assert!((d.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn kalpha_rejects_mismatch_and_bad_alpha() {
        let g = default_xi_grid();
        let a = CharFuncSample::from_fn(&g, |_| Complex64::new(1.0, 0.0));
        let b = CharFuncSample::from_fn(&g[1..], |_| Complex64::new(1.0, 0.0));
        assert!(matches!(kalpha_distance(&a, &b, 1.0), Err(Error::GridMismatch(_))));
        assert!(kalpha_distance(&a, &a, 0.0).is_err());
        assert!(kalpha_distance(&a, &a, 2.5).is_err());
        assert_eq!(kalpha_distance(&a, &a, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn constant_series_has_zero_modulus() {
        let g = default_xi_grid();
        let a = CharFuncSample::from_fn(&g, |x| Complex64::new((-x.norm_sq()).exp(), 0.1));
        let m = equicontinuity_diagnostic(&[a.clone(), a.clone(), a], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(m.modulus, 0.0);
        assert!(equicontinuity_diagnostic(&[], &[]).is_err());
    }
}
