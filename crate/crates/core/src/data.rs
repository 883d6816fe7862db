//! Domain types: model families, component parameters, mixture states and
//! angular data matrices.

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};
use serde::{Deserialize, Serialize};

/// The five model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Univariate wrapped normal.
    Wnorm,
    /// Univariate von Mises.
    Vm,
    /// Bivariate wrapped normal.
    Wnorm2,
    /// Bivariate von Mises sine.
    Vmsin,
    /// Bivariate von Mises cosine.
    Vmcos,
}

impl ModelKind {
    pub fn is_bivariate(self) -> bool {
        matches!(self, ModelKind::Wnorm2 | ModelKind::Vmsin | ModelKind::Vmcos)
    }

    /// Data dimension: 1 or 2 columns.
    pub fn dim(self) -> usize {
        if self.is_bivariate() {
            2
        } else {
            1
        }
    }

    /// Number of free parameters per component (μ's and κ's).
    pub fn n_params(self) -> usize {
        if self.is_bivariate() {
            5
        } else {
            2
        }
    }

    /// Parameter names in canonical order (κ's first, then μ's).
    pub fn param_names(self) -> &'static [&'static str] {
        if self.is_bivariate() {
            &["kappa1", "kappa2", "kappa3", "mu1", "mu2"]
        } else {
            &["kappa", "mu"]
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wnorm" => Ok(ModelKind::Wnorm),
            "vm" => Ok(ModelKind::Vm),
            "wnorm2" => Ok(ModelKind::Wnorm2),
            "vmsin" => Ok(ModelKind::Vmsin),
            "vmcos" => Ok(ModelKind::Vmcos),
            other => Err(Error::config(format!("unknown model kind '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Wnorm => "wnorm",
            ModelKind::Vm => "vm",
            ModelKind::Wnorm2 => "wnorm2",
            ModelKind::Vmsin => "vmsin",
            ModelKind::Vmcos => "vmcos",
        }
    }
}

/// Sign restriction on the association parameter κ₃.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovRestrict {
    #[default]
    None,
    Zero,
    Positive,
    Negative,
}

impl CovRestrict {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NONE" => Ok(CovRestrict::None),
            "ZERO" => Ok(CovRestrict::Zero),
            "POSITIVE" => Ok(CovRestrict::Positive),
            "NEGATIVE" => Ok(CovRestrict::Negative),
            other => Err(Error::config(format!("unknown cov restriction '{other}'"))),
        }
    }
}

/// Truncation region for component parameters beyond the family's own
/// support: κ₃ sign restrictions and an optional unimodality requirement.
#[derive(Debug, Clone, Copy, Default)]
pub struct Constraints {
    pub cov_restrict: CovRestrict,
    pub unimodal: bool,
}

/// One mixture component's parameter block. Univariate families only use
/// `mu1` and `kappa1` (accepted as `mu`/`kappa` in serialized form); the
/// remaining fields default to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: serde::Deserialize<'de> + Real"))]
pub struct ComponentParams<T> {
    #[serde(alias = "mu")]
    pub mu1: T,
    #[serde(default = "zero_scalar")]
    pub mu2: T,
    #[serde(alias = "kappa")]
    pub kappa1: T,
    #[serde(default = "zero_scalar")]
    pub kappa2: T,
    #[serde(default = "zero_scalar")]
    pub kappa3: T,
}

fn zero_scalar<T: Real>() -> T {
    T::zero()
}

impl<T: Real> ComponentParams<T> {
    pub fn univariate(mu: T, kappa: T) -> Self {
        ComponentParams {
            mu1: wrap_angle(mu),
            mu2: T::zero(),
            kappa1: kappa,
            kappa2: T::zero(),
            kappa3: T::zero(),
        }
    }

    pub fn bivariate(mu1: T, mu2: T, kappa1: T, kappa2: T, kappa3: T) -> Self {
        ComponentParams {
            mu1: wrap_angle(mu1),
            mu2: wrap_angle(mu2),
            kappa1,
            kappa2,
            kappa3,
        }
    }

    /// Parameter values in the canonical order of [`ModelKind::param_names`].
    pub fn values(&self, kind: ModelKind) -> Vec<T> {
        if kind.is_bivariate() {
            vec![self.kappa1, self.kappa2, self.kappa3, self.mu1, self.mu2]
        } else {
            vec![self.kappa1, self.mu1]
        }
    }

    pub fn from_values(kind: ModelKind, v: &[T]) -> Result<Self> {
        if v.len() != kind.n_params() {
            return Err(Error::dimension(format!(
                "expected {} parameter values, got {}",
                kind.n_params(),
                v.len()
            )));
        }
        Ok(if kind.is_bivariate() {
            ComponentParams::bivariate(v[3], v[4], v[0], v[1], v[2])
        } else {
            ComponentParams::univariate(v[1], v[0])
        })
    }

    /// Check the family's own support: κ ≥ 0, and for the bivariate wrapped
    /// normal a positive semidefinite precision matrix.
    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        if self.kappa1 < T::zero() {
            return Err(Error::domain("kappa1 must be non-negative"));
        }
        if kind.is_bivariate() && self.kappa2 < T::zero() {
            return Err(Error::domain("kappa2 must be non-negative"));
        }
        if kind == ModelKind::Wnorm2 && self.kappa1 * self.kappa2 < self.kappa3 * self.kappa3 {
            return Err(Error::constraint(
                "wnorm2 requires kappa1*kappa2 - kappa3^2 >= 0",
            ));
        }
        Ok(())
    }

    /// Whether the parameters satisfy `constraints` in addition to the
    /// family support. Used as the prior truncation region.
    pub fn in_support(&self, kind: ModelKind, constraints: &Constraints) -> bool {
        if self.validate(kind).is_err() {
            return false;
        }
        if kind.is_bivariate() {
            match constraints.cov_restrict {
                CovRestrict::None => {}
                CovRestrict::Zero => {
                    if self.kappa3 != T::zero() {
                        return false;
                    }
                }
                CovRestrict::Positive => {
                    if self.kappa3 < T::zero() {
                        return false;
                    }
                }
                CovRestrict::Negative => {
                    if self.kappa3 > T::zero() {
                        return false;
                    }
                }
            }
            if constraints.unimodal && !self.is_unimodal(kind) {
                return false;
            }
        }
        true
    }

    /// Unimodality of the sine/cosine families: κ₃² < κ₁κ₂ for the sine
    /// model, κ₃ ≥ −κ₁κ₂/(κ₁+κ₂) for the cosine model. Other families are
    /// always unimodal.
    pub fn is_unimodal(&self, kind: ModelKind) -> bool {
        match kind {
            ModelKind::Vmsin => self.kappa3 * self.kappa3 < self.kappa1 * self.kappa2,
            ModelKind::Vmcos => {
                let denom = self.kappa1 + self.kappa2;
                if denom == T::zero() {
                    self.kappa3 >= T::zero()
                } else {
                    self.kappa3 >= -(self.kappa1 * self.kappa2) / denom
                }
            }
            _ => true,
        }
    }
}

/// Full mixture parameter vector: K components plus mixing proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: serde::Deserialize<'de> + Real"))]
pub struct MixtureState<T> {
    pub comps: Vec<ComponentParams<T>>,
    pub pmix: Vec<T>,
}

impl<T: Real> MixtureState<T> {
    pub fn new(comps: Vec<ComponentParams<T>>, pmix: Vec<T>) -> Result<Self> {
        let state = MixtureState { comps, pmix };
        state.validate_weights()?;
        Ok(state)
    }

    pub fn n_comp(&self) -> usize {
        self.comps.len()
    }

    pub fn validate_weights(&self) -> Result<()> {
        if self.comps.is_empty() || self.comps.len() != self.pmix.len() {
            return Err(Error::dimension(
                "mixture needs K >= 1 components with matching pmix length",
            ));
        }
        let mut sum = T::zero();
        for &p in &self.pmix {
            if p < T::zero() {
                return Err(Error::domain("mixing proportions must be non-negative"));
            }
            sum = sum + p;
        }
        if (sum - T::one()).abs() > T::of(1e-12) {
            return Err(Error::domain(format!(
                "mixing proportions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        self.validate_weights()?;
        for c in &self.comps {
            c.validate(kind)?;
        }
        Ok(())
    }

    /// Relabel components and weights by `perm`, where the slot `j` of the
    /// output takes component `perm[j]` of the input.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        MixtureState {
            comps: perm.iter().map(|&j| self.comps[j]).collect(),
            pmix: perm.iter().map(|&j| self.pmix[j]).collect(),
        }
    }
}

/// Number of integer displacements M used to truncate the wrapped normal
/// lattice sums, ω ∈ {0, ±1, …, ±M}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispConfig(u32);

impl DispConfig {
    pub fn new(m: u32) -> Result<Self> {
        if (1..=5).contains(&m) {
            Ok(DispConfig(m))
        } else {
            Err(Error::config("int_displ must lie in {1,...,5}"))
        }
    }

    pub fn m(self) -> i32 {
        self.0 as i32
    }
}

impl Default for DispConfig {
    fn default() -> Self {
        DispConfig(3)
    }
}

/// Number of 2-D quasi-random points used by Monte Carlo fallbacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QrndConfig(usize);

impl QrndConfig {
    pub fn new(n: usize) -> Result<Self> {
        if n >= 1 {
            Ok(QrndConfig(n))
        } else {
            Err(Error::config("n_qrnd must be >= 1"))
        }
    }

    pub fn n(self) -> usize {
        self.0
    }
}

impl Default for QrndConfig {
    fn default() -> Self {
        QrndConfig(10_000)
    }
}

/// Matrix of angular observations, one row per observation, entries in
/// [0, 2π).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AngleData {
    Univariate(Vec<f64>),
    Bivariate(Vec<[f64; 2]>),
}

impl AngleData {
    /// Build from raw values, reducing everything mod 2π. Returns the data
    /// plus the number of values that had to be wrapped.
    pub fn from_raw_univariate(values: Vec<f64>) -> (Self, usize) {
        let wrapped = values
            .iter()
            .filter(|v| !(0.0..std::f64::consts::TAU).contains(*v))
            .count();
        (
            AngleData::Univariate(values.into_iter().map(wrap_angle).collect()),
            wrapped,
        )
    }

    pub fn from_raw_bivariate(values: Vec<[f64; 2]>) -> (Self, usize) {
        let wrapped = values
            .iter()
            .flatten()
            .filter(|v| !(0.0..std::f64::consts::TAU).contains(*v))
            .count();
        (
            AngleData::Bivariate(
                values
                    .into_iter()
                    .map(|r| [wrap_angle(r[0]), wrap_angle(r[1])])
                    .collect(),
            ),
            wrapped,
        )
    }

    pub fn len(&self) -> usize {
        match self {
            AngleData::Univariate(v) => v.len(),
            AngleData::Bivariate(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            AngleData::Univariate(_) => 1,
            AngleData::Bivariate(_) => 2,
        }
    }

    /// Observation i as a 1- or 2-element slice view.
    pub fn row(&self, i: usize) -> &[f64] {
        match self {
            AngleData::Univariate(v) => std::slice::from_ref(&v[i]),
            AngleData::Bivariate(v) => &v[i],
        }
    }

    pub fn check_kind(&self, kind: ModelKind) -> Result<()> {
        if self.dim() != kind.dim() {
            return Err(Error::dimension(format!(
                "model '{}' needs {}-column data, got {} columns",
                kind.name(),
                kind.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}
