//! Prior specification: zero-mean normals on log-concentrations and on the
//! association parameter, uniform priors on the circular means, and a
//! Dirichlet prior on the mixing proportions.

use crate::data::{ComponentParams, Constraints, ModelKind};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dirichlet concentration for the mixing proportions: one shared value or a
/// full K-vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PmixAlpha {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// Hyper-parameters of the component and weight priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    /// Variance of the zero-mean normal priors on log κ (and log κ₁, log κ₂)
    /// and on κ₃.
    pub norm_var: f64,
    /// Dirichlet concentration(s) for the mixing proportions.
    pub pmix_alpha: PmixAlpha,
}

impl PriorSpec {
    /// Defaults: diffuse normals (variance 1000) and the overfitted-mixture
    /// concentration (r + r(r+1)/2)/2 + 3, i.e. 4 univariate / 5.5 bivariate.
    pub fn default_for(kind: ModelKind) -> Self {
        let r = kind.dim() as f64;
        PriorSpec {
            norm_var: 1000.0,
            pmix_alpha: PmixAlpha::Scalar((r + r * (r + 1.0) / 2.0) / 2.0 + 3.0),
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.norm_var <= 0.0 {
            return Err(Error::config("norm_var must be positive"));
        }
        let alphas = self.alphas(k);
        if alphas.len() != k || alphas.iter().any(|&a| a <= 0.0) {
            return Err(Error::config(
                "pmix_alpha must be positive and match the component count",
            ));
        }
        Ok(())
    }

    /// Expand to a length-K vector of Dirichlet concentrations.
    pub fn alphas(&self, k: usize) -> Vec<f64> {
        match &self.pmix_alpha {
            PmixAlpha::Scalar(a) => vec![*a; k],
            PmixAlpha::Vector(v) => v.clone(),
        }
    }
}

fn normal_logpdf(x: f64, var: f64) -> f64 {
    -0.5 * (std::f64::consts::TAU * var).ln() - x * x / (2.0 * var)
}

/// Log prior density of one component's parameters, expressed in the
/// sampling coordinates (log κ's, κ₃): normal log-densities there, a flat
/// contribution for the means, and −∞ outside the truncation region.
pub fn log_prior(
    kind: ModelKind,
    p: &ComponentParams<f64>,
    spec: &PriorSpec,
    constraints: &Constraints,
) -> f64 {
    if !p.in_support(kind, constraints) {
        return f64::NEG_INFINITY;
    }
    let v = spec.norm_var;
    if kind.is_bivariate() {
        normal_logpdf(p.kappa1.ln(), v)
            + normal_logpdf(p.kappa2.ln(), v)
            + normal_logpdf(p.kappa3, v)
    } else {
        normal_logpdf(p.kappa1.ln(), v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_alphas_match_dimension_rule() {
        match PriorSpec::default_for(ModelKind::Vm).pmix_alpha {
            PmixAlpha::Scalar(a) => assert_relative_eq!(a, 4.0),
            _ => unreachable!(),
        }
        match PriorSpec::default_for(ModelKind::Vmsin).pmix_alpha {
            PmixAlpha::Scalar(a) => assert_relative_eq!(a, 5.5),
            _ => unreachable!(),
        }
    }

    #[test]
    fn flat_in_the_means() {
        let spec = PriorSpec::default_for(ModelKind::Vmsin);
        let c = Constraints::default();
        let a = ComponentParams::bivariate(0.3, 1.0, 2.0, 3.0, -0.5);
        let b = ComponentParams::bivariate(4.0, 5.9, 2.0, 3.0, -0.5);
        assert_eq!(
            log_prior(ModelKind::Vmsin, &a, &spec, &c),
            log_prior(ModelKind::Vmsin, &b, &spec, &c)
        );
    }

    #[test]
    fn truncation_region_is_minus_infinity() {
        let spec = PriorSpec::default_for(ModelKind::Wnorm2);
        let c = Constraints::default();
        let bad = ComponentParams::bivariate(0.0, 0.0, 1.0, 1.0, 1.5);
        assert!(log_prior(ModelKind::Wnorm2, &bad, &spec, &c).is_infinite());
    }

    #[test]
    fn unit_kappas_give_three_normal_densities() {
        // log κ = 0 and κ3 = 0 with norm_var = 1000.
        let spec = PriorSpec {
            norm_var: 1000.0,
            pmix_alpha: PmixAlpha::Scalar(5.5),
        };
        let c = Constraints::default();
        let p = ComponentParams::bivariate(1.0, 2.0, 1.0, 1.0, 0.0);
        let want = 3.0 * normal_logpdf(0.0, 1000.0);
        assert_relative_eq!(log_prior(ModelKind::Vmsin, &p, &spec, &c), want);
    }
}
