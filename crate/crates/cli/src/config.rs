//! Layered run configuration: command-line flags override config-file keys,
//! which override the built-in defaults.

use crate::cli_error::{CliError, CliResult};
use serde::Deserialize;
use std::path::Path;
use torusmix::data::{CovRestrict, DispConfig, ModelKind, QrndConfig};
use torusmix::mcmc::{FitConfig, Method, PmixAlpha, PriorSpec};

/// Keys accepted in a JSON config file (kebab-case, all optional).
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub ncomp: Option<usize>,
    pub n_iter: Option<usize>,
    pub burnin_prop: Option<f64>,
    pub thin: Option<usize>,
    pub n_chains: Option<usize>,
    pub method: Option<String>,
    pub perm_sampling: Option<bool>,
    pub cov_restrict: Option<String>,
    pub unimodal_component: Option<bool>,
    pub int_displ: Option<u32>,
    pub n_qrnd: Option<usize>,
    pub seed: Option<u64>,
    pub norm_var: Option<f64>,
    pub pmix_alpha: Option<serde_json::Value>,
    pub epsilon: Option<f64>,
    pub leapfrog: Option<usize>,
    pub epsilon_jitter: Option<f64>,
    pub propscale: Option<f64>,
    pub relabel: Option<bool>,
    pub point_estimator: Option<String>,
}

pub fn load_file_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config '{}': {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("config '{}': {e}", path.display())))
}

/// Flag-level fit options; every field optional so the file/default layers
/// can fill the gaps.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct FitFlags {
    /// Model family: wnorm, vm, wnorm2, vmsin or vmcos.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of mixture components.
    #[arg(long)]
    pub ncomp: Option<usize>,
    #[arg(long)]
    pub n_iter: Option<usize>,
    #[arg(long)]
    pub burnin_prop: Option<f64>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub n_chains: Option<usize>,
    /// Component update algorithm: hmc or rwmh.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub perm_sampling: Option<bool>,
    /// Association restriction: none, zero, positive or negative.
    #[arg(long)]
    pub cov_restrict: Option<String>,
    #[arg(long)]
    pub unimodal_component: Option<bool>,
    /// Wrapped normal truncation M (1..=5).
    #[arg(long)]
    pub int_displ: Option<u32>,
    /// Quasi-random point count for cosine-model fallbacks.
    #[arg(long)]
    pub n_qrnd: Option<usize>,
    /// Variance of the normal priors on log-concentrations and κ3.
    #[arg(long)]
    pub norm_var: Option<f64>,
    /// Dirichlet concentration for the mixing proportions.
    #[arg(long)]
    pub pmix_alpha: Option<f64>,
    /// Initial HMC step size.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Leapfrog steps per HMC update.
    #[arg(long)]
    pub leapfrog: Option<usize>,
    /// Undo label switching before summarizing.
    #[arg(long)]
    pub relabel: Option<bool>,
    /// Point estimator for summaries: mean or mode.
    #[arg(long)]
    pub point_estimator: Option<String>,
}

/// Fully resolved run options beyond the core `FitConfig`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub fit: FitConfig,
    pub relabel: bool,
    pub point_estimator: String,
}

pub fn resolve(
    flags: &FitFlags,
    file: &FileConfig,
    global_seed: Option<u64>,
) -> CliResult<RunConfig> {
    let model_name = flags
        .model
        .clone()
        .or_else(|| file.model.clone())
        .ok_or_else(|| CliError::config("a model must be given (--model or config file)"))?;
    let model = ModelKind::parse(&model_name)?;
    let mut fit = FitConfig::new(model, flags.ncomp.or(file.ncomp).unwrap_or(1));
    if let Some(v) = flags.n_iter.or(file.n_iter) {
        fit.n_iter = v;
    }
    if let Some(v) = flags.burnin_prop.or(file.burnin_prop) {
        fit.burnin_prop = v;
    }
    if let Some(v) = flags.thin.or(file.thin) {
        fit.thin = v;
    }
    if let Some(v) = flags.n_chains.or(file.n_chains) {
        fit.n_chains = v;
    }
    if let Some(m) = flags.method.clone().or_else(|| file.method.clone()) {
        fit.method = Method::parse(&m)?;
    }
    if let Some(v) = flags.perm_sampling.or(file.perm_sampling) {
        fit.perm_sampling = v;
    }
    if let Some(c) = flags.cov_restrict.clone().or_else(|| file.cov_restrict.clone()) {
        fit.cov_restrict = CovRestrict::parse(&c)?;
    }
    if let Some(v) = flags.unimodal_component.or(file.unimodal_component) {
        fit.unimodal_component = v;
    }
    if let Some(v) = flags.int_displ.or(file.int_displ) {
        fit.int_displ = DispConfig::new(v)?;
    }
    if let Some(v) = flags.n_qrnd.or(file.n_qrnd) {
        fit.n_qrnd = QrndConfig::new(v)?;
    }
    fit.seed = global_seed.or(file.seed).unwrap_or(1);

    let norm_var = flags.norm_var.or(file.norm_var);
    let pmix_alpha: Option<PmixAlpha> = match (&flags.pmix_alpha, &file.pmix_alpha) {
        (Some(a), _) => Some(PmixAlpha::Scalar(*a)),
        (None, Some(v)) => Some(
            serde_json::from_value(v.clone())
                .map_err(|e| CliError::config(format!("pmix-alpha: {e}")))?,
        ),
        (None, None) => None,
    };
    if norm_var.is_some() || pmix_alpha.is_some() {
        let defaults = PriorSpec::default_for(model);
        fit.prior = Some(PriorSpec {
            norm_var: norm_var.unwrap_or(defaults.norm_var),
            pmix_alpha: pmix_alpha.unwrap_or(defaults.pmix_alpha),
        });
    }
    if let Some(v) = flags.epsilon.or(file.epsilon) {
        fit.tuning.epsilon = v;
    }
    if let Some(v) = flags.leapfrog.or(file.leapfrog) {
        fit.tuning.leapfrog = v;
    }
    if let Some(v) = file.epsilon_jitter {
        fit.tuning.epsilon_jitter = v;
    }
    if let Some(v) = file.propscale {
        fit.tuning.propscale = v;
    }

    Ok(RunConfig {
        fit,
        relabel: flags.relabel.or(file.relabel).unwrap_or(false),
        point_estimator: flags
            .point_estimator
            .clone()
            .or_else(|| file.point_estimator.clone())
            .unwrap_or_else(|| "mode".to_string()),
    })
}
