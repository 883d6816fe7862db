//! Log-densities, normalizing constants and analytic gradients for the five
//! model families, plus mixture density and posterior membership
//! probabilities. Everything is computed and exposed in log space; callers
//! that need linear densities exponentiate.

mod vonmises;
mod wrapped;

pub use vonmises::{
    log_vmcos_const, log_vmsin_const, vm_grad, vm_logpdf, vmcos_const_ratios, vmcos_logpdf,
    vmsin_const_ratios, vmsin_logpdf, ConstRatios,
};
pub use wrapped::{wnorm2_grad, wnorm2_logpdf, wnorm_grad, wnorm_logpdf};

use crate::data::{AngleData, ComponentParams, DispConfig, MixtureState, ModelKind, QrndConfig};
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Real};

/// Evaluation knobs shared by all densities: the wrapped normal truncation
/// and the quasi-Monte Carlo point count.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalConfig {
    pub disp: DispConfig,
    pub qrnd: QrndConfig,
}

/// Reciprocal sine-model normalizing constant C̄_s (linear space).
pub fn vmsin_const<T: Real>(k1: T, k2: T, k3: T, qrnd: QrndConfig) -> Result<T> {
    Ok(log_vmsin_const(k1, k2, k3, qrnd)?.exp())
}

/// Reciprocal cosine-model normalizing constant C̄_c (linear space).
pub fn vmcos_const<T: Real>(k1: T, k2: T, k3: T, qrnd: QrndConfig) -> Result<T> {
    Ok(log_vmcos_const(k1, k2, k3, qrnd)?.exp())
}

/// One component's density with its normalizing constant resolved once, so
/// repeated evaluations over a dataset do not re-sum the Bessel series.
#[derive(Debug, Clone)]
pub struct ComponentDensity<T> {
    kind: ModelKind,
    params: ComponentParams<T>,
    cfg: EvalConfig,
    /// log C̄ for the sine/cosine models, log(2π I₀(κ)) for von Mises;
    /// unused for the wrapped normal lattice sums.
    log_norm: T,
}

impl<T: Real> ComponentDensity<T> {
    pub fn new(kind: ModelKind, params: ComponentParams<T>, cfg: EvalConfig) -> Result<Self> {
        params.validate(kind)?;
        let log_norm = match kind {
            ModelKind::Vm => T::tau().ln() + crate::special::log_bessel_i(0, params.kappa1)?,
            ModelKind::Vmsin => {
                log_vmsin_const(params.kappa1, params.kappa2, params.kappa3, cfg.qrnd)?
            }
            ModelKind::Vmcos => {
                log_vmcos_const(params.kappa1, params.kappa2, params.kappa3, cfg.qrnd)?
            }
            _ => T::zero(),
        };
        if log_norm.is_nan() {
            return Err(Error::numeric("normalizing constant evaluated to NaN"));
        }
        Ok(ComponentDensity {
            kind,
            params,
            cfg,
            log_norm,
        })
    }

    pub fn params(&self) -> &ComponentParams<T> {
        &self.params
    }

    /// log f(ψ | θ). `psi` must have the model's dimension.
    pub fn logpdf(&self, psi: &[T]) -> T {
        match self.kind {
            ModelKind::Wnorm => {
                wnorm_logpdf(psi[0], &self.params, self.cfg.disp).expect("validated params")
            }
            ModelKind::Vm => self.params.kappa1 * (psi[0] - self.params.mu1).cos() - self.log_norm,
            ModelKind::Wnorm2 => wnorm2_logpdf([psi[0], psi[1]], &self.params, self.cfg.disp)
                .expect("validated params"),
            ModelKind::Vmsin => {
                vonmises::vmsin_exponent_at([psi[0], psi[1]], &self.params) - self.log_norm
            }
            ModelKind::Vmcos => {
                vonmises::vmcos_exponent_at([psi[0], psi[1]], &self.params) - self.log_norm
            }
        }
    }
}

/// Gradient evaluator with the parameter-dependent pieces (constant ratios,
/// Bessel ratios) resolved once, so the per-observation cost inside an HMC
/// trajectory stays trigonometric.
#[derive(Debug, Clone)]
pub struct GradEvaluator<T> {
    kind: ModelKind,
    params: ComponentParams<T>,
    disp: DispConfig,
    cache: GradCache<T>,
}

#[derive(Debug, Clone)]
enum GradCache<T> {
    Lattice,
    VmRatio(T),
    Ratios(ConstRatios<T>),
}

impl<T: Real> GradEvaluator<T> {
    pub fn new(kind: ModelKind, params: ComponentParams<T>, cfg: EvalConfig) -> Result<Self> {
        params.validate(kind)?;
        let cache = match kind {
            ModelKind::Wnorm | ModelKind::Wnorm2 => GradCache::Lattice,
            ModelKind::Vm => GradCache::VmRatio(crate::special::bessel_a(params.kappa1)?),
            ModelKind::Vmsin => GradCache::Ratios(vmsin_const_ratios(
                params.kappa1,
                params.kappa2,
                params.kappa3,
                cfg.qrnd,
            )?),
            ModelKind::Vmcos => GradCache::Ratios(vmcos_const_ratios(
                params.kappa1,
                params.kappa2,
                params.kappa3,
                cfg.qrnd,
            )?),
        };
        Ok(GradEvaluator {
            kind,
            params,
            disp: cfg.disp,
            cache,
        })
    }

    /// Gradient of log f at ψ, ordered (κ…, μ…).
    pub fn grad(&self, psi: &[T]) -> Result<Vec<T>> {
        let p = &self.params;
        Ok(match (&self.cache, self.kind) {
            (GradCache::Lattice, ModelKind::Wnorm) => wnorm_grad(psi[0], p, self.disp)?.to_vec(),
            (GradCache::Lattice, _) => wnorm2_grad([psi[0], psi[1]], p, self.disp)?.to_vec(),
            (GradCache::VmRatio(a), _) => {
                vec![(psi[0] - p.mu1).cos() - *a, p.kappa1 * (psi[0] - p.mu1).sin()]
            }
            (GradCache::Ratios(r), ModelKind::Vmsin) => {
                vonmises::vmsin_grad_with([psi[0], psi[1]], p, r).to_vec()
            }
            (GradCache::Ratios(r), _) => {
                vonmises::vmcos_grad_with([psi[0], psi[1]], p, r).to_vec()
            }
        })
    }
}

/// Analytic gradient of log f with respect to the component's free
/// parameters, ordered (κ…, μ…): (κ, μ) univariate, (κ₁, κ₂, κ₃, μ₁, μ₂)
/// bivariate. For repeated evaluation over many observations build a
/// [`GradEvaluator`] instead.
pub fn grad_log_density<T: Real>(
    kind: ModelKind,
    p: &ComponentParams<T>,
    psi: &[T],
    cfg: EvalConfig,
) -> Result<Vec<T>> {
    GradEvaluator::new(kind, *p, cfg)?.grad(psi)
}

/// A mixture with per-component normalizers resolved, for repeated
/// evaluation over data.
#[derive(Debug, Clone)]
pub struct MixtureDensity<T> {
    comps: Vec<ComponentDensity<T>>,
    log_pmix: Vec<T>,
}

impl<T: Real> MixtureDensity<T> {
    pub fn new(kind: ModelKind, state: &MixtureState<T>, cfg: EvalConfig) -> Result<Self> {
        state.validate_weights()?;
        let comps = state
            .comps
            .iter()
            .map(|p| ComponentDensity::new(kind, *p, cfg))
            .collect::<Result<Vec<_>>>()?;
        let log_pmix = state.pmix.iter().map(|p| p.ln()).collect();
        Ok(MixtureDensity { comps, log_pmix })
    }

    pub fn n_comp(&self) -> usize {
        self.comps.len()
    }

    /// log Σ_j p_j f(ψ | θ_j), via log-sum-exp.
    pub fn logpdf(&self, psi: &[T]) -> T {
        let terms: Vec<T> = self
            .comps
            .iter()
            .zip(&self.log_pmix)
            .map(|(c, lp)| *lp + c.logpdf(psi))
            .collect();
        log_sum_exp(&terms)
    }

    /// Per-component log p_j + log f_j(ψ), the unnormalized log membership
    /// weights of Eq.-style posterior allocation.
    pub fn log_weights(&self, psi: &[T]) -> Vec<T> {
        self.comps
            .iter()
            .zip(&self.log_pmix)
            .map(|(c, lp)| *lp + c.logpdf(psi))
            .collect()
    }

    /// Posterior membership probabilities at ψ; sums to one.
    pub fn membership(&self, psi: &[T]) -> Result<Vec<T>> {
        let lw = self.log_weights(psi);
        let lse = log_sum_exp(&lw);
        if !lse.is_finite() {
            return Err(Error::degenerate(
                "all component densities vanish at the observation",
            ));
        }
        Ok(lw.into_iter().map(|l| (l - lse).exp()).collect())
    }

    /// Total log-likelihood of a dataset.
    pub fn loglik_f64(&self, data: &AngleData) -> T
    where
        T: Real,
    {
        let mut total = T::zero();
        for i in 0..data.len() {
            let row = data.row(i);
            let psi: Vec<T> = row.iter().map(|&x| T::of(x)).collect();
            total = total + self.logpdf(&psi);
        }
        total
    }
}

/// log mixture density at a single point.
pub fn mixture_logpdf<T: Real>(
    kind: ModelKind,
    state: &MixtureState<T>,
    psi: &[T],
    cfg: EvalConfig,
) -> Result<T> {
    Ok(MixtureDensity::new(kind, state, cfg)?.logpdf(psi))
}

/// Posterior membership probabilities p̃_j(ψ) at a single point.
pub fn membership_probs<T: Real>(
    kind: ModelKind,
    state: &MixtureState<T>,
    psi: &[T],
    cfg: EvalConfig,
) -> Result<Vec<T>> {
    MixtureDensity::new(kind, state, cfg)?.membership(psi)
}
