//! Characteristic-function diagnostics.

pub mod bobylev;
pub mod cf;
pub mod consistency;
pub mod transform;

pub use bobylev::{
    bobylev_rhs, split_frequency, BobylevEstimate, BobylevKernels, BobylevOptions, CharacteristicFunction, GaussianSurrogate,
    PhiHatTable, DEFAULT_TABLE_CELLS,
};
pub use cf::{default_xi_grid, empirical_cf, equicontinuity_diagnostic, kalpha_distance, CharFuncSample, KAlphaDistance, TimeModulus};
pub use consistency::{bobylev_consistency, default_probes, ConsistencyConfig, ProbeResult};
pub use transform::{
    asymptotic_coefficient, decay_report, log_grid, phi_hat_derivative, phi_hat_n, phi_hat_with, phi_hat_zero, DecayReport, DecayRow,
    TransformMethod, CONTOUR_SWITCH, DECAY_TAIL_FACTOR,
};
