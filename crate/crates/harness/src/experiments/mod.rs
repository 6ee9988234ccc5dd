//! One module per experiment kind. Each returns its data artifacts, a JSON
//! summary and the evaluated checks; nothing here touches the filesystem.

pub mod fourier;
pub mod kernels;
pub mod moment_creation;
pub mod povzner;
pub mod simulate;

use kinetics_core::dsmc::CollisionModel;

use crate::config::{ExperimentSpec, KernelParams, Params};
use crate::error::Result;
use crate::output::Outcome;

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    match &spec.params {
        Params::KernelReport(p) => kernels::run(spec, p),
        Params::PovznerSweep(p) => povzner::run(spec, p),
        Params::Simulate(p) => simulate::run(spec, p),
        Params::MomentCreation(p) => moment_creation::run(spec, p),
        Params::FourierResidual(p) => fourier::run(spec, p),
    }
}

pub(crate) fn model(k: &KernelParams) -> Result<CollisionModel> {
    Ok(CollisionModel::from_params(k.e, k.gamma, k.s, k.strength, k.n)?)
}
