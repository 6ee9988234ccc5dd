//! Radial Fourier transform of the mollified kinetic kernel and its decay.
//!
//! `Φ̂ₙ(ζ) = (4π/ζ) ∫₀^{2n} r sin(rζ) Φₙ(r) dr`.
//!
//! For `ζn` below [`CONTOUR_SWITCH`] the integral is taken along the real axis
//! with one panel per half-period of the sine. Above it the real-axis sum
//! cancels to many digits, so the path is moved into the upper half plane:
//! `∫₀^{2n} r^{1+γ} φ_c(r/n) e^{irζ} dr` splits into the exact term
//! `i^{2+γ} Γ(2+γ) ζ^{−2−γ}` from the pure power on `[0, ∞·i)` and three
//! exponentially damped path integrals. The mollifier is analytic in the open
//! triangle with vertices `n`, `1.5n + 0.5n·i`, `2n`, and tends to its real
//! boundary values along both slanted edges.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::kernels::MollifiedKineticKernel;
use crate::quadrature::{integrate, Tolerance};

/// Value of `ζn` above which the contour representation is used.
pub const CONTOUR_SWITCH: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformMethod {
    Auto,
    RealAxis,
    Contour,
}

fn level(kernel: &MollifiedKineticKernel<f64>) -> f64 {
    kernel.n() as f64
}

/// `4π ∫₀^{2n} r² Φₙ(r) dr`, the value at ζ = 0.
pub fn phi_hat_zero(kernel: &MollifiedKineticKernel<f64>) -> Result<f64> {
    let n = level(kernel);
    let edges: Vec<f64> = (0..=16).map(|k| k as f64 * n / 8.0).collect();
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 4000 };
    let v = integrate(|r| r * r * kernel.phi_n(r), &edges, tol)?;
    Ok(4.0 * PI * v.value)
}

/// `Φ̂ₙ(ζ)` for ζ > 0.
pub fn phi_hat_n(kernel: &MollifiedKineticKernel<f64>, zeta: f64) -> Result<f64> {
    phi_hat_with(kernel, zeta, TransformMethod::Auto)
}

pub fn phi_hat_with(kernel: &MollifiedKineticKernel<f64>, zeta: f64, method: TransformMethod) -> Result<f64> {
    let zeta = zeta.abs();
    if zeta == 0.0 {
        return phi_hat_zero(kernel);
    }
    let method = match method {
        TransformMethod::Auto if zeta * level(kernel) >= CONTOUR_SWITCH => TransformMethod::Contour,
        TransformMethod::Auto => TransformMethod::RealAxis,
        m => m,
    };
    let integral = match method {
        TransformMethod::Contour => contour_sine_integral(kernel, zeta)?,
        _ => real_axis_sine_integral(kernel, zeta)?,
    };
    Ok(4.0 * PI / zeta * integral)
}

/// `∫₀^{2n} r Φₙ(r) sin(rζ) dr` with half-period panels.
fn real_axis_sine_integral(kernel: &MollifiedKineticKernel<f64>, zeta: f64) -> Result<f64> {
    let n = level(kernel);
    let gamma = kernel.gamma();
    let len = (PI / zeta).min(n / 4.0);
    let mut edges: Vec<f64> = (1..).map(|k| k as f64 * len).take_while(|&x| x < 2.0 * n * (1.0 - 1e-9)).collect();
    edges.extend([n, 2.0 * n]);
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * n);
    // Roundoff floor of the oscillating sum is set by ∫ r^{1+γ} dr.
    let tol = Tolerance { abs: 2e-13 * (2.0 * n).powf(2.0 + gamma), rel: 1e-12, max_intervals: 8000 };
    let f = |r: f64| r * kernel.phi_n(r) * (r * zeta).sin();
    // r = len·u² on the first panel removes the r^{1+γ} endpoint behaviour.
    let head = integrate(|u| f(len * u * u) * 2.0 * len * u, &[0.0, 0.5, 1.0], tol)?;
    let tail = integrate(f, &edges, tol)?;
    Ok(head.value + tail.value)
}

#[inline]
fn bump(t: Complex64) -> Complex64 {
    if t == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 0.0)
    } else {
        (-t.inv()).exp()
    }
}

/// `(φ_c(x), φ_c(x) − 1)` in the transition triangle, from the offsets
/// `x − 1` and `2 − x`. Passing offsets keeps their direction exact near the
/// corners, where `exp(−1/t)` decays only along directions with `Re 1/t > 0`.
#[inline]
fn cutoff_pair(from_one: Complex64, to_two: Complex64) -> (Complex64, Complex64) {
    let a = bump(to_two);
    let b = bump(from_one);
    let d = a + b;
    (a / d, -b / d)
}

fn contour_sine_integral(kernel: &MollifiedKineticKernel<f64>, zeta: f64) -> Result<f64> {
    let n = level(kernel);
    let gamma = kernel.gamma();
    let p = 1.0 + gamma;
    let g = libm::tgamma(2.0 + gamma);
    let exact = (PI * (2.0 + gamma) / 2.0).sin() * g * zeta.powf(-2.0 - gamma);
    // The damped path integrals peak near e^{−√(2nζ)}, where the two factors
    // e^{−n/(2s)} and e^{−ζs} balance.
    let damped = (1.5 * n).powf(p) * (-(2.0 * n * zeta).sqrt()).exp() / zeta;
    let tol = Tolerance { abs: 1e-17 * g * zeta.powf(-2.0 - gamma) + 1e-12 * damped, rel: 1e-12, max_intervals: 8000 };
    let i = Complex64::new(0.0, 1.0);
    let up = Complex64::new(1.0, 1.0);
    let back = Complex64::new(-1.0, 1.0);
    let half = n / 2.0;
    let apex = Complex64::new(1.5 * n, 0.5 * n);

    let mut slant_edges: Vec<f64> = (0..48).map(|k| half * 0.5f64.powi(k)).collect();
    slant_edges.extend((1..=16).map(|j| j as f64 / zeta).filter(|&s| s < half));
    slant_edges.push(0.0);
    slant_edges.sort_by(f64::total_cmp);
    slant_edges.dedup();

    let wave = |r: Complex64| (i * r * zeta).exp();
    let first = integrate(
        |s| {
            let r = Complex64::new(n, 0.0) + up * s;
            let off = up * (s / n);
            let (_, minus_one) = cutoff_pair(off, Complex64::new(1.0, 0.0) - off);
            (r.powf(p) * minus_one * wave(r) * up).im
        },
        &slant_edges,
        tol,
    )?;
    let second = integrate(
        |s| {
            let r = Complex64::new(2.0 * n, 0.0) + back * s;
            let off = -back * (s / n);
            let (c, _) = cutoff_pair(Complex64::new(1.0, 0.0) - off, off);
            (r.powf(p) * c * wave(r) * back).im
        },
        &slant_edges,
        tol,
    )?;
    let mut vert_edges = vec![0.0];
    vert_edges.extend((0..8).map(|k| f64::from(1u32 << k) / zeta));
    let vertical = integrate(
        |t| {
            let r = apex + i * t;
            (r.powf(p) * wave(r) * i).im
        },
        &vert_edges,
        tol,
    )?;
    Ok(exact + first.value - second.value - vertical.value)
}

/// Leading term of `Φ̂ₙ(ζ)` for large ζ: `−4π sin(πγ/2) Γ(2+γ) ζ^{−3−γ}`.
/// Returns the coefficient of `ζ^{−3−γ}`.
pub fn asymptotic_coefficient(gamma: f64) -> f64 {
    -4.0 * PI * (PI * gamma / 2.0).sin() * libm::tgamma(2.0 + gamma)
}

/// Central difference of `Φ̂ₙ` in ζ, both points on the method chosen at ζ.
pub fn phi_hat_derivative(kernel: &MollifiedKineticKernel<f64>, zeta: f64) -> Result<f64> {
    let method = if zeta * level(kernel) >= CONTOUR_SWITCH { TransformMethod::Contour } else { TransformMethod::RealAxis };
    let h = 1e-4 * zeta;
    let a = phi_hat_with(kernel, zeta + h, method)?;
    let b = phi_hat_with(kernel, zeta - h, method)?;
    Ok((a - b) / (2.0 * h))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayRow {
    pub zeta: f64,
    pub value: f64,
    /// `|Φ̂ₙ(ζ)| ⟨ζ⟩^{3+γ}`
    pub ratio: f64,
    pub derivative: f64,
    /// `|∂Φ̂ₙ(ζ)| ⟨ζ⟩^{4+γ}`
    pub derivative_ratio: f64,
}

/// Weighted decay of `Φ̂ₙ` and its first derivative over a log grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub n: u32,
    pub gamma: f64,
    pub rows: Vec<DecayRow>,
    /// Fitted constant: the largest ratio on the grid.
    pub constant: f64,
    pub derivative_constant: f64,
    /// Largest ratio on [10, 100] and on [100, 1000].
    pub mid_max: f64,
    pub tail_max: f64,
    pub derivative_mid_max: f64,
    pub derivative_tail_max: f64,
}

/// Tail growth allowed relative to the decade below it.
pub const DECAY_TAIL_FACTOR: f64 = 1.1;

impl DecayReport {
    /// The weighted transform does not grow over the last decade.
    pub fn bounded(&self) -> bool {
        self.tail_max <= DECAY_TAIL_FACTOR * self.mid_max && self.constant.is_finite()
    }

    pub fn derivative_bounded(&self) -> bool {
        self.derivative_tail_max <= DECAY_TAIL_FACTOR * self.derivative_mid_max && self.derivative_constant.is_finite()
    }
}

/// Log-spaced grid of `points` values over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let m = points.max(2) - 1;
    (0..=m).map(|k| (a + (b - a) * k as f64 / m as f64).exp()).collect()
}

pub fn decay_report(kernel: &MollifiedKineticKernel<f64>, points: usize) -> Result<DecayReport> {
    let gamma = kernel.gamma();
    let rows: Vec<DecayRow> = log_grid(0.1, 1e3, points)
        .into_par_iter()
        .map(|zeta| {
            let value = phi_hat_n(kernel, zeta)?;
            let derivative = phi_hat_derivative(kernel, zeta)?;
            let bracket = (1.0 + zeta * zeta).sqrt();
            Ok(DecayRow {
                zeta,
                value,
                ratio: value.abs() * bracket.powf(3.0 + gamma),
                derivative,
                derivative_ratio: derivative.abs() * bracket.powf(4.0 + gamma),
            })
        })
        .collect::<Result<_>>()?;
    let max_in = |lo: f64, hi: f64, f: fn(&DecayRow) -> f64| {
        rows.iter().filter(|r| r.zeta >= lo * (1.0 - 1e-12) && r.zeta <= hi * (1.0 + 1e-12)).map(f).fold(0.0, f64::max)
    };
    Ok(DecayReport {
        n: kernel.n(),
        gamma,
        constant: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        derivative_constant: rows.iter().map(|r| r.derivative_ratio).fold(0.0, f64::max),
        mid_max: max_in(10.0, 100.0, |r| r.ratio),
        tail_max: max_in(100.0, 1e3, |r| r.ratio),
        derivative_mid_max: max_in(10.0, 100.0, |r| r.derivative_ratio),
        derivative_tail_max: max_in(100.0, 1e3, |r| r.derivative_ratio),
        rows,
    })
}
