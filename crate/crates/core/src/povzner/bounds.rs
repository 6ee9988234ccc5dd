//! Margins of the H and G estimates and per-cell constant fitting.

use crate::geometry::VelocityPair;

use super::weights::{WeightFunction, WeightKind};

/// One sweep point with its computed split.
#[derive(Clone, Copy, Debug)]
pub struct GridPoint {
    pub pair: VelocityPair<f64>,
    pub h: f64,
    pub g: f64,
}

#[inline]
fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Coefficients `(P, Q)` of the H estimate `h ≤ −C1·P + C2·Q`.
///
/// ψ₂ uses the bracket-weighted decay term.
pub fn h_bound_terms(pair: &VelocityPair<f64>, psi: &WeightFunction<f64>) -> (f64, f64) {
    let k = psi.kappa();
    let (a, b) = (pair.v.norm(), pair.v_star.norm());
    let p = match psi.kind() {
        WeightKind::Psi2 | WeightKind::Truncated => bracket(a).powf(2.0 + k) * b * b + bracket(b).powf(2.0 + k) * a * a,
        _ => a.powf(2.0 + k) * b * b + b.powf(2.0 + k) * a * a,
    };
    let q = bracket(a).powf(1.0 + k) * b + bracket(b).powf(1.0 + k) * a;
    (p, q)
}

/// Right-hand side factor `R` of the G estimate `g ≤ C·R`; the form switches
/// at κ = 2.
pub fn g_bound_term(pair: &VelocityPair<f64>, kappa: f64) -> f64 {
    let (a, b) = (pair.v.norm(), pair.v_star.norm());
    if kappa < 2.0 {
        a * a * b * b
    } else {
        b * b * bracket(a).powf(kappa) + a * a * bracket(b).powf(kappa)
    }
}

/// Which G estimate applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GBranch {
    /// `C3|v|²|v*|²`, κ < 2
    C3,
    /// `C4(|v*|²⟨v⟩^κ + |v|²⟨v*⟩^κ)`, κ ≥ 2
    C4,
}

pub fn g_branch(kappa: f64) -> GBranch {
    if kappa < 2.0 {
        GBranch::C3
    } else {
        GBranch::C4
    }
}

/// `−C1·P + C2·Q − h`; nonnegative when the estimate holds.
pub fn check_h_bound(pair: &VelocityPair<f64>, psi: &WeightFunction<f64>, h: f64, c: (f64, f64)) -> f64 {
    let (p, q) = h_bound_terms(pair, psi);
    -c.0 * p + c.1 * q - h
}

/// `C·R − g`; nonnegative when the estimate holds.
pub fn check_g_bound(pair: &VelocityPair<f64>, kappa: f64, g: f64, c: f64) -> f64 {
    c * g_bound_term(pair, kappa) - g
}

/// Fitted constants of one (e, κ, ψ, n) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFit {
    pub c1: f64,
    pub c2: f64,
    pub c_g: f64,
    pub g_branch: GBranch,
    /// Index of a point no constants can satisfy.
    pub witness: Option<usize>,
    pub min_h_margin: f64,
    pub min_g_margin: f64,
}

impl CellFit {
    pub fn feasible(&self) -> bool {
        self.witness.is_none()
            && self.c1 > 0.0
            && self.c2 > 0.0
            && self.c_g >= 0.0
            && self.c1.is_finite()
            && self.c2.is_finite()
            && self.c_g.is_finite()
    }
}

/// Smallest G constant: `max g/R`. Points with `R = 0` must have `g ≤ tol`.
pub fn fit_g(points: &[GridPoint], kappa: f64, tol: f64) -> (f64, Option<usize>) {
    let mut c = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        let r = g_bound_term(&p.pair, kappa);
        if r > 0.0 {
            c = c.max(p.g / r);
        } else if p.g > tol {
            return (f64::INFINITY, Some(i));
        }
    }
    (c, None)
}

/// Smallest C2 for a fixed C1: `max (h + C1·P)/Q`.
pub fn c2_for(points: &[GridPoint], psi: &WeightFunction<f64>, c1: f64) -> f64 {
    points
        .iter()
        .filter_map(|p| {
            let (pp, q) = h_bound_terms(&p.pair, psi);
            (q > 0.0).then(|| (p.h + c1 * pp) / q)
        })
        .fold(0.0, f64::max)
}

/// Upper envelope of lines `a + s·x`, as (slope, intercept) sorted by slope.
fn upper_envelope(mut lines: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    lines.sort_by(|l, r| l.0.total_cmp(&r.0).then(l.1.total_cmp(&r.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for l in lines {
        if let Some(last) = hull.last() {
            if last.0 == l.0 {
                hull.pop();
            }
        }
        while hull.len() >= 2 {
            let (l1, l2) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // l2 is useless if l meets l1 no later than l2 does.
            let x12 = (l1.1 - l2.1) / (l2.0 - l1.0);
            let x1n = (l1.1 - l.1) / (l.0 - l1.0);
            if x1n <= x12 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(l);
    }
    hull
}

/// Fits (C1, C2) by minimizing total slack `Σ(C2·Qᵢ − C1·Pᵢ − hᵢ)` subject to
/// every margin being nonnegative, then the G constant; also reports the
/// smallest margins under the fitted constants.
pub fn fit_cell(points: &[GridPoint], psi: &WeightFunction<f64>, g_tol: f64) -> CellFit {
    let kappa = psi.kappa();
    let branch = g_branch(kappa);
    let mut witness = None;
    let mut lines = Vec::with_capacity(points.len());
    let (mut sum_p, mut sum_q) = (0.0, 0.0);
    for (i, p) in points.iter().enumerate() {
        let (pp, q) = h_bound_terms(&p.pair, psi);
        if q > 0.0 {
            lines.push((pp / q, p.h / q));
            sum_p += pp;
            sum_q += q;
        } else if p.h > g_tol && witness.is_none() {
            witness = Some(i);
        }
    }
    let (mut c1, mut c2) = (0.0, 0.0);
    if !lines.is_empty() {
        let hull = upper_envelope(lines);
        let env = |x: f64| hull.iter().map(|l| l.1 + l.0 * x).fold(f64::NEG_INFINITY, f64::max).max(0.0);
        let mut cands = vec![0.0];
        for w in hull.windows(2) {
            let x = (w[0].1 - w[1].1) / (w[1].0 - w[0].0);
            if x.is_finite() && x > 0.0 {
                cands.push(x);
            }
        }
        for l in &hull {
            if l.0 > 0.0 && l.1 < 0.0 {
                cands.push(-l.1 / l.0);
            }
        }
        let objective = |x: f64| sum_q * env(x) - sum_p * x;
        let best = cands.into_iter().min_by(|a, b| objective(*a).total_cmp(&objective(*b))).unwrap_or(0.0);
        c1 = best;
        c2 = env(best);
        // The optimum may sit on C1 = 0 or C2 = 0; move inside the feasible
        // set so both constants are strictly positive.
        if c2 <= 0.0 {
            c2 = f64::MIN_POSITIVE.max(1e-300);
        }
        if c1 <= 0.0 {
            c2 *= 1.0 + 1e-9;
            c1 = points
                .iter()
                .filter_map(|p| {
                    let (pp, q) = h_bound_terms(&p.pair, psi);
                    (pp > 0.0).then(|| (c2 * q - p.h) / pp)
                })
                .fold(f64::INFINITY, f64::min)
                * 0.5;
            if !c1.is_finite() {
                c1 = 1.0;
            }
        }
    }
    let (mut c_g, gw) = fit_g(points, kappa, g_tol);
    let witness = witness.or(gw);
    let h_margin = |c2: f64| points.iter().map(|p| check_h_bound(&p.pair, psi, p.h, (c1, c2))).fold(f64::INFINITY, f64::min);
    let g_margin = |c_g: f64| points.iter().map(|p| check_g_bound(&p.pair, kappa, p.g, c_g)).fold(f64::INFINITY, f64::min);
    // Binding points sit at zero margin up to rounding; lift the constants by
    // a few ulps until the evaluated margins are nonnegative.
    if witness.is_none() {
        for _ in 0..64 {
            if !(h_margin(c2) < 0.0) || c2 == 0.0 {
                break;
            }
            c2 = c2 * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
        }
        for _ in 0..64 {
            if !(g_margin(c_g) < 0.0) || !c_g.is_finite() {
                break;
            }
            c_g = c_g * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
        }
    }
    let min_h_margin = h_margin(c2);
    let min_g_margin = g_margin(c_g);
    CellFit { c1, c2, c_g, g_branch: branch, witness, min_h_margin, min_g_margin }
}
