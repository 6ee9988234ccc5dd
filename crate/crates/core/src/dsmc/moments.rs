//! Moments, energy and momentum of an ensemble, and their time series.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use crate::error::Result;
use crate::vec3::Vec3;

/// Chunk length of the parallel reductions. Fixed so the summation order, and
/// hence every bit of the result, is independent of the worker count.
const CHUNK: usize = 8192;

/// Compensated sum of `f` over the velocities, reduced in fixed chunks.
pub fn mean_of<F>(vs: &[Vec3<f64>], f: F) -> f64
where
    F: Fn(&Vec3<f64>) -> f64 + Sync,
{
    if vs.is_empty() {
        return 0.0;
    }
    let partial: Vec<(f64, f64)> = vs
        .par_chunks(CHUNK)
        .map(|c| {
            let mut s = 0.0;
            let mut comp = 0.0;
            for v in c {
                neumaier(&mut s, &mut comp, f(v));
            }
            (s, comp)
        })
        .collect();
    let mut s = 0.0;
    let mut comp = 0.0;
    for (p, c) in partial {
        neumaier(&mut s, &mut comp, p);
        comp += c;
    }
    (s + comp) / vs.len() as f64
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

pub fn mean_velocity(vs: &[Vec3<f64>]) -> Vec3<f64> {
    Vec3::new(mean_of(vs, |v| v.x), mean_of(vs, |v| v.y), mean_of(vs, |v| v.z))
}

/// `(1/N) Σ |vᵢ|²`
pub fn energy(vs: &[Vec3<f64>]) -> f64 {
    mean_of(vs, |v| v.norm_sq())
}

/// `(1/N) Σ ⟨vᵢ⟩^l` for one order.
pub fn moment(vs: &[Vec3<f64>], l: f64) -> f64 {
    let half = 0.5 * l;
    if l == 0.0 {
        return mean_of(vs, |_| 1.0);
    }
    if half.fract() == 0.0 && half.abs() <= 64.0 {
        let k = half as i32;
        mean_of(vs, move |v| (1.0 + v.norm_sq()).powi(k))
    } else {
        mean_of(vs, move |v| (1.0 + v.norm_sq()).powf(half))
    }
}

pub fn moments(vs: &[Vec3<f64>], orders: &[f64]) -> Vec<f64> {
    orders.iter().map(|&l| moment(vs, l)).collect()
}

/// One row of a moment series.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentRecord {
    pub time: f64,
    pub moments: Vec<f64>,
    pub energy: f64,
    pub momentum: Vec3<f64>,
    pub collisions: u64,
}

/// Moments recorded over time. `orders` always starts with 0.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSeries {
    pub orders: Vec<f64>,
    pub records: Vec<MomentRecord>,
}

impl MomentSeries {
    /// Orders are sorted and deduplicated, with l = 0 always present.
    pub fn new(orders: &[f64]) -> Self {
        let mut o: Vec<f64> = orders.to_vec();
        o.push(0.0);
        o.sort_by(f64::total_cmp);
        o.dedup();
        Self { orders: o, records: Vec::new() }
    }

    pub fn record(&mut self, vs: &[Vec3<f64>], time: f64, collisions: u64) {
        self.records.push(MomentRecord {
            time,
            moments: moments(vs, &self.orders),
            energy: energy(vs),
            momentum: mean_velocity(vs),
            collisions,
        });
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }

    /// Time series of `M_l`, if l was recorded.
    pub fn moment_series(&self, l: f64) -> Option<Vec<f64>> {
        let k = self.orders.iter().position(|&o| o == l)?;
        Some(self.records.iter().map(|r| r.moments[k]).collect())
    }

    /// Header `t,M0,M2,...,E,px,py,pz,collisions`.
    pub fn csv_header(&self) -> String {
        let mut h = String::from("t");
        for o in &self.orders {
            write!(h, ",M{}", o).unwrap();
        }
        h.push_str(",E,px,py,pz,collisions");
        h
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}\r", self.csv_header())?;
        for r in &self.records {
            let mut line = format!("{:e}", r.time);
            for m in &r.moments {
                write!(line, ",{:e}", m).unwrap();
            }
            write!(line, ",{:e},{:e},{:e},{:e},{}", r.energy, r.momentum.x, r.momentum.y, r.momentum.z, r.collisions).unwrap();
            writeln!(w, "{line}\r")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

/// Outcome of the energy/momentum audit of a series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissipationReport {
    /// Largest relative increase `(E(t_{k+1}) − E(t_k))/E(0)`, 0 if none.
    pub max_energy_increase: f64,
    /// Largest relative excess `(E(t) − E(0))/E(0)` over the series.
    pub max_energy_excess: f64,
    /// Largest `|p(t) − p(0)|` (per-particle mean velocity).
    pub max_momentum_drift: f64,
    /// Largest relative change `|E(t) − E(0)|/E(0)`.
    pub max_energy_change: f64,
}

impl DissipationReport {
    pub fn monotone(&self, tol: f64) -> bool {
        self.max_energy_increase <= tol && self.max_energy_excess <= tol
    }
}

pub fn dissipation_check(series: &MomentSeries) -> DissipationReport {
    let Some(first) = series.records.first() else {
        return DissipationReport { max_energy_increase: 0.0, max_energy_excess: 0.0, max_momentum_drift: 0.0, max_energy_change: 0.0 };
    };
    let e0 = first.energy.abs().max(f64::MIN_POSITIVE);
    let mut inc = 0.0f64;
    let mut excess = 0.0f64;
    let mut change = 0.0f64;
    let mut drift = 0.0f64;
    for w in series.records.windows(2) {
        inc = inc.max((w[1].energy - w[0].energy) / e0);
    }
    for r in &series.records {
        excess = excess.max((r.energy - first.energy) / e0);
        change = change.max((r.energy - first.energy).abs() / e0);
        drift = drift.max((r.momentum - first.momentum).norm());
    }
    DissipationReport { max_energy_increase: inc, max_energy_excess: excess, max_momentum_drift: drift, max_energy_change: change }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_moments() {
        let zeros = vec![Vec3::zero(); 10];
        for l in [0.0, 2.0, 2.5, 8.0] {
            assert_eq!(moment(&zeros, l), 1.0);
        }
        let pair = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)];
        assert_eq!(moment(&pair, 2.0), 2.0);
        assert_eq!(moment(&pair, 0.0), 1.0);
        assert_eq!(energy(&pair), 1.0);
    }

    #[test]
    fn reduction_is_thread_count_independent() {
        let vs: Vec<Vec3<f64>> = (0..100_000).map(|i| {
            let x = i as f64 * 0.001;
            Vec3::new(x.sin(), x.cos() * 3.0, (x * 0.7).sin() * 10.0)
        }).collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| moment(&vs, 4.5));
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| moment(&vs, 4.5));
        assert_eq!(one.to_bits(), four.to_bits());
    }

    #[test]
    fn csv_header_layout() {
        let s = MomentSeries::new(&[4.0, 2.0, 6.0]);
        assert_eq!(s.csv_header(), "t,M0,M2,M4,M6,E,px,py,pz,collisions");
    }

    #[test]
    fn dissipation_of_constant_series_is_zero() {
        let mut s = MomentSeries::new(&[2.0]);
        let vs = vec![Vec3::new(1.0, 2.0, 0.0), Vec3::new(-1.0, -2.0, 0.0)];
        s.record(&vs, 0.0, 0);
        s.record(&vs, 1.0, 0);
        let r = dissipation_check(&s);
        assert_eq!(r.max_energy_increase, 0.0);
        assert_eq!(r.max_momentum_drift, 0.0);
        assert!(r.monotone(0.0));
    }
}
