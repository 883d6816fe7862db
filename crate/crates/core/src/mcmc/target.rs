//! The component-conditional target: complete-data log posterior density of
//! one component given its allocated observations, together with its
//! gradient in the sampling coordinates.
//!
//! Sampling coordinates are (log κ, μ) for univariate families and
//! (log κ₁, log κ₂, κ₃, μ₁, μ₂) for bivariate ones; with the product-mixture
//! restriction the κ₃ coordinate is dropped and pinned to zero. The log
//! transform of the concentrations is absorbed into the prior, which is
//! normal in exactly these coordinates.

use crate::data::{AngleData, ComponentParams, Constraints, CovRestrict, ModelKind};
use crate::densities::{ComponentDensity, EvalConfig, GradEvaluator};
use crate::error::Result;
use crate::mcmc::prior::{log_prior, PriorSpec};
use crate::scalar::wrap_angle;

/// Maps component parameters to and from the flat position vector used by
/// the HMC/RWMH updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    kind: ModelKind,
    zero_assoc: bool,
}

impl ParamLayout {
    pub fn new(kind: ModelKind, cov_restrict: CovRestrict) -> Self {
        ParamLayout {
            kind,
            zero_assoc: kind.is_bivariate() && cov_restrict == CovRestrict::Zero,
        }
    }

    pub fn dim(&self) -> usize {
        if !self.kind.is_bivariate() {
            2
        } else if self.zero_assoc {
            4
        } else {
            5
        }
    }

    /// Indices of position coordinates that are angles (wrapped mod 2π).
    pub fn mu_range(&self) -> std::ops::Range<usize> {
        self.dim() - self.kind.dim()..self.dim()
    }

    pub fn pack(&self, p: &ComponentParams<f64>) -> Vec<f64> {
        if !self.kind.is_bivariate() {
            vec![p.kappa1.ln(), p.mu1]
        } else if self.zero_assoc {
            vec![p.kappa1.ln(), p.kappa2.ln(), p.mu1, p.mu2]
        } else {
            vec![p.kappa1.ln(), p.kappa2.ln(), p.kappa3, p.mu1, p.mu2]
        }
    }

    pub fn unpack(&self, q: &[f64]) -> ComponentParams<f64> {
        if !self.kind.is_bivariate() {
            ComponentParams::univariate(wrap_angle(q[1]), q[0].exp())
        } else if self.zero_assoc {
            ComponentParams::bivariate(
                wrap_angle(q[2]),
                wrap_angle(q[3]),
                q[0].exp(),
                q[1].exp(),
                0.0,
            )
        } else {
            ComponentParams::bivariate(
                wrap_angle(q[3]),
                wrap_angle(q[4]),
                q[0].exp(),
                q[1].exp(),
                q[2],
            )
        }
    }
}

/// One component's conditional target over its assigned data subset.
pub struct CompTarget<'a> {
    pub kind: ModelKind,
    pub data: &'a AngleData,
    pub indices: &'a [usize],
    pub prior: &'a PriorSpec,
    pub constraints: &'a Constraints,
    pub cfg: EvalConfig,
    pub layout: ParamLayout,
}

impl<'a> CompTarget<'a> {
    /// Complete-data log posterior l̃_j at a position vector; −∞ outside the
    /// support/truncation region.
    pub fn log_target(&self, q: &[f64]) -> f64 {
        let p = self.layout.unpack(q);
        let lp = log_prior(self.kind, &p, self.prior, self.constraints);
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        let dens = match ComponentDensity::new(self.kind, p, self.cfg) {
            Ok(d) => d,
            Err(_) => return f64::NEG_INFINITY,
        };
        let mut total = lp;
        for &i in self.indices {
            total += dens.logpdf(self.data.row(i));
        }
        total
    }

    /// Gradient of the log target with respect to the position coordinates;
    /// `None` when the gradient is not finite (treated by callers as a
    /// rejection).
    pub fn grad(&self, q: &[f64]) -> Option<Vec<f64>> {
        let p = self.layout.unpack(q);
        if !p.in_support(self.kind, self.constraints) {
            return None;
        }
        let eval = GradEvaluator::new(self.kind, p, self.cfg).ok()?;
        let d = self.layout.dim();
        let mut grad = vec![0.0; d];
        for &i in self.indices {
            let g = eval.grad(self.data.row(i)).ok()?;
            if !self.kind.is_bivariate() {
                grad[0] += p.kappa1 * g[0];
                grad[1] += g[1];
            } else if self.layout.zero_assoc {
                grad[0] += p.kappa1 * g[0];
                grad[1] += p.kappa2 * g[1];
                grad[2] += g[3];
                grad[3] += g[4];
            } else {
                grad[0] += p.kappa1 * g[0];
                grad[1] += p.kappa2 * g[1];
                grad[2] += g[2];
                grad[3] += g[3];
                grad[4] += g[4];
            }
        }
        // Prior gradient: d/d(log κ) N(log κ; 0, v) and d/dκ3 N(κ3; 0, v);
        // flat in the means.
        let v = self.prior.norm_var;
        grad[0] -= p.kappa1.ln() / v;
        if self.kind.is_bivariate() {
            grad[1] -= p.kappa2.ln() / v;
            if !self.layout.zero_assoc {
                grad[2] -= p.kappa3 / v;
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        Some(grad)
    }
}

/// Complete-data log posterior of one component over an assigned subset
/// (empty subsets return the prior alone).
pub fn complete_data_lpd(
    kind: ModelKind,
    p: &ComponentParams<f64>,
    data: &AngleData,
    indices: &[usize],
    prior: &PriorSpec,
    constraints: &Constraints,
    cfg: EvalConfig,
) -> Result<f64> {
    let lp = log_prior(kind, p, prior, constraints);
    if !lp.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    let dens = ComponentDensity::new(kind, *p, cfg)?;
    let mut total = lp;
    for &i in indices {
        total += dens.logpdf(data.row(i));
    }
    Ok(total)
}
