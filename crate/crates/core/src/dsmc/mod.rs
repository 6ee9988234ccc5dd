//! Stochastic particle simulation of the cutoff dynamics.

pub mod engine;
pub mod ensemble;
pub mod moments;
pub mod rng;
pub mod snapshot;
pub mod theta_table;

pub use engine::{run, run_from, step, time_grid, CollisionModel, RunOutput, SimConfig, StepStats, MAJORANT_LIMIT};
pub use ensemble::{init_ensemble, unit_vector, InitialLaw, ParticleEnsemble, PowerTailRadial, RadialSampling};
pub use moments::{dissipation_check, energy, mean_velocity, moment, moments, DissipationReport, MomentRecord, MomentSeries};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use theta_table::ThetaTable;
