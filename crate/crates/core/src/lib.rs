//! Bayesian finite mixtures of univariate and bivariate angular
//! distributions on the circle [0, 2π) and the torus [0, 2π)².
//!
//! The crate implements five model families — wrapped normal (univariate and
//! bivariate) and von Mises (univariate, bivariate sine, bivariate cosine) —
//! together with exact samplers, circular summary statistics, a
//! data-augmented Gibbs sampler with HMC or random-walk Metropolis component
//! updates, label-switching repair, convergence diagnostics and information
//! criteria for choosing the number of mixture components.
//!
//! The numeric core (special functions, densities, population summaries) is
//! generic over the scalar type through [`scalar::Real`]; the sampling and
//! fitting layers run on the crate-level [`Scalar`] alias.

pub mod data;
pub mod densities;
pub mod diagnostics;
pub mod error;
pub mod mcmc;
pub mod modelselect;
pub mod postprocess;
pub mod sampling;
pub mod scalar;
pub mod special;
pub mod summaries;

/// Scalar type used by the sampling and fitting layers.
pub type Scalar = f64;

/// Component parameters at the default scalar type.
pub type Params = data::ComponentParams<Scalar>;

/// Mixture state at the default scalar type.
pub type Mixture = data::MixtureState<Scalar>;

pub use data::{AngleData, ComponentParams, CovRestrict, DispConfig, MixtureState, ModelKind, QrndConfig};
pub use densities::EvalConfig;
pub use error::{Error, Result};
