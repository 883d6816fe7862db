//! The fitting engine: priors, data-augmented Gibbs allocation, HMC and
//! RWMH component updates with burn-in auto-tuning, permutation sampling,
//! initialization and multi-chain orchestration.

mod fit;
mod gibbs;
mod init;
mod prior;
mod target;
mod tuning;
mod updates;

pub use fit::{
    apply_permutation, fit_angmix, permute_labels_step, ChainSamples, FitConfig, FitResult,
};
pub use gibbs::{gibbs_allocation, sample_dirichlet};
pub use init::init_kmeans_moment;
pub use prior::{log_prior, PmixAlpha, PriorSpec};
pub use target::{complete_data_lpd, CompTarget, ParamLayout};
pub use tuning::{CompTuning, Method, TuneEvent, TuningConfig};
pub use updates::{hmc_update, rwmh_update, UpdateResult};
