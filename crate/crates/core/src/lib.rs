//! Numerical core for the spatially homogeneous inelastic Boltzmann equation
//! with non-cutoff hard-potential kernels.
//!
//! Elementary maps (kernels, collision geometry, weight functions) are generic
//! over [`Real`]; quadrature-driven and stochastic parts run in `f64`.

pub mod dsmc;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod kernels;
pub mod povzner;
pub mod quadrature;
pub mod real;
pub mod vec3;

pub use error::{Error, Result};
pub use real::Real;
pub use vec3::Vec3;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Vec3f64 = vec3::Vec3<f64>;
pub type Vec3f32 = vec3::Vec3<f32>;
pub type Restitution64 = kernels::Restitution<f64>;
pub type Restitution32 = kernels::Restitution<f32>;
pub type AngularKernel64 = kernels::AngularKernel<f64>;
pub type AngularKernel32 = kernels::AngularKernel<f32>;
pub type CutoffAngularKernel64 = kernels::CutoffAngularKernel<f64>;
pub type CutoffAngularKernel32 = kernels::CutoffAngularKernel<f32>;
pub type KineticKernel64 = kernels::KineticKernel<f64>;
pub type MollifiedKineticKernel64 = kernels::MollifiedKineticKernel<f64>;
pub type MollifiedKineticKernel32 = kernels::MollifiedKineticKernel<f32>;
pub type VelocityPair64 = geometry::VelocityPair<f64>;
pub type VelocityPair32 = geometry::VelocityPair<f32>;
