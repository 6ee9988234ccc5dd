//! The Povzner functional: two quadrature routes, the H + G split, bound
//! checks and constant fitting.

pub mod bounds;
pub mod routes;
pub mod weights;

pub use bounds::{check_g_bound, check_h_bound, fit_cell, CellFit, GridPoint};
pub use routes::{hg_decompose, k_direct, k_transformed, povzner_report, HgSplit, PovznerInput, PovznerReport};
pub use weights::{appendix_convexity_check, ConvexityCheck, WeightFunction, WeightKind};
