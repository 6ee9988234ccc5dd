//! Named acceptance thresholds and the pass/fail records built from them.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// measured ≤ threshold
    AtMost,
    /// measured < threshold
    Below,
    /// measured ≥ threshold
    AtLeast,
}

impl Relation {
    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => measured <= threshold,
            Relation::Below => measured < threshold,
            Relation::AtLeast => measured >= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
        }
    }
}

/// A threshold tied to one acceptance criterion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub threshold: f64,
    pub relation: Relation,
}

impl Criterion {
    pub fn check(&self, measured: f64, detail: impl Into<String>) -> Check {
        Check {
            name: self.name.to_string(),
            criterion: self.id,
            measured,
            threshold: self.threshold,
            relation: self.relation,
            // NaN never passes.
            passed: self.relation.holds(measured, self.threshold),
            detail: detail.into(),
        }
    }
}

pub const ROUTE_EQUIVALENCE: Criterion =
    Criterion { id: 1, name: "route equivalence |k_direct - k_transformed|/max(1,|k_direct|)", threshold: 1e-6, relation: Relation::AtMost };
pub const COLLISION_MOMENTUM: Criterion =
    Criterion { id: 2, name: "collision momentum conservation (relative)", threshold: 1e-12, relation: Relation::AtMost };
pub const COLLISION_ENERGY: Criterion =
    Criterion { id: 2, name: "collision energy change vs closed form (relative)", threshold: 1e-12, relation: Relation::AtMost };
pub const ELASTIC_LOSS: Criterion = Criterion { id: 2, name: "closed-form energy loss at e = 1", threshold: 0.0, relation: Relation::AtMost };
/// Counts of infeasible cells.
pub const POVZNER_FEASIBLE: Criterion = Criterion { id: 3, name: "infeasible Povzner cells", threshold: 0.0, relation: Relation::AtMost };
pub const POVZNER_MARGIN: Criterion = Criterion { id: 3, name: "smallest H/G margin under fitted constants", threshold: 0.0, relation: Relation::AtLeast };
pub const DECOMPOSITION: Criterion =
    Criterion { id: 4, name: "decomposition |h + g - k_transformed|/max(1,|k_transformed|)", threshold: 1e-6, relation: Relation::AtMost };
pub const CONVEXITY: Criterion = Criterion { id: 5, name: "convexity sandwich violations", threshold: 0.0, relation: Relation::AtMost };
/// Relative rounding slack on `E(t_{k+1}) - E(t_k)`; the dynamics never add energy.
pub const ENERGY_MONOTONE: Criterion = Criterion { id: 6, name: "largest relative energy increase", threshold: 1e-12, relation: Relation::AtMost };
pub const MOMENTUM_DRIFT: Criterion = Criterion { id: 6, name: "momentum drift", threshold: 1e-10, relation: Relation::AtMost };
pub const ELASTIC_ENERGY: Criterion = Criterion { id: 6, name: "elastic relative energy change", threshold: 1e-10, relation: Relation::AtMost };
pub const M0_GROWTH: Criterion = Criterion { id: 7, name: "initial moment growth per doubling of N", threshold: 1.25, relation: Relation::AtLeast };
pub const MAX_MOMENT_VARIATION: Criterion =
    Criterion { id: 7, name: "relative change of max moment over [t0, T] between two largest N", threshold: 0.10, relation: Relation::Below };
pub const DECAY_BOUNDED: Criterion =
    Criterion { id: 8, name: "weighted transform tail/mid ratio", threshold: kinetics_core::fourier::DECAY_TAIL_FACTOR, relation: Relation::AtMost };
pub const BOBYLEV_Z: Criterion = Criterion { id: 9, name: "Bobylev residual z-score", threshold: 3.0, relation: Relation::AtMost };
pub const EQUICONTINUITY_GROWTH: Criterion =
    Criterion { id: 9, name: "time-modulus growth across the n sweep", threshold: 2.0, relation: Relation::AtMost };
pub const REPRODUCIBLE: Criterion = Criterion { id: 10, name: "artifacts differing between reruns", threshold: 0.0, relation: Relation::AtMost };

/// One evaluated check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub criterion: u8,
    pub measured: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub passed: bool,
    #[serde(default)]
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{verdict} [criterion {}] {}: measured {:.6e} {} {:.6e}",
            self.criterion,
            self.name,
            self.measured,
            self.relation.symbol(),
            self.threshold
        );
        if !self.detail.is_empty() {
            s.push_str(" (");
            s.push_str(&self.detail);
            s.push(')');
        }
        s
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}
