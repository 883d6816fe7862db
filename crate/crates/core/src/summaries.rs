//! Circular descriptive statistics: sample circular mean/variance, the
//! Jammalamadaka–Sarma and Fisher–Lee circular correlations, and their
//! population values for each model family.

use crate::data::{ComponentParams, ModelKind, QrndConfig};
use crate::densities::{vmcos_const_ratios, vmsin_const_ratios, ConstRatios};
use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};
use crate::special::bessel_a;

/// Mean resultant length below which the circular mean is undefined.
const RESULTANT_EPS: f64 = 1e-12;

/// Circular variance(s) and correlations of a distribution or sample.
/// Univariate summaries carry only `var1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircSummary<T> {
    pub var1: T,
    pub var2: Option<T>,
    pub rho_js: Option<T>,
    pub rho_fl: Option<T>,
}

/// Sample circular mean: atan2 of the mean resultant vector, in [0, 2π).
pub fn circ_mean(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("circ_mean requires a nonempty sample"));
    }
    let (s, c) = sample
        .iter()
        .fold((0.0, 0.0), |(s, c), &x| (s + x.sin(), c + x.cos()));
    let n = sample.len() as f64;
    if (s * s + c * c).sqrt() / n < RESULTANT_EPS {
        return Err(Error::degenerate(
            "circular mean undefined: zero resultant length",
        ));
    }
    Ok(wrap_angle(s.atan2(c)))
}

/// Sample circular variance 1 − R̄. A zero resultant yields exactly 1
/// (the definition still evaluates; no error is raised).
pub fn circ_var(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("circ_var requires a nonempty sample"));
    }
    let (s, c) = sample
        .iter()
        .fold((0.0, 0.0), |(s, c), &x| (s + x.sin(), c + x.cos()));
    let n = sample.len() as f64;
    Ok((1.0 - (s * s + c * c).sqrt() / n).clamp(0.0, 1.0))
}

/// Sample Jammalamadaka–Sarma circular correlation, the plug-in estimator
/// with sample circular means.
pub fn circ_corr_js(pairs: &[[f64; 2]]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::domain("circ_corr_js requires n >= 3"));
    }
    let col1: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
    let col2: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
    let mu1 = circ_mean(&col1)?;
    let mu2 = circ_mean(&col2)?;
    let (mut num, mut den1, mut den2) = (0.0, 0.0, 0.0);
    for p in pairs {
        let s1 = (p[0] - mu1).sin();
        let s2 = (p[1] - mu2).sin();
        num += s1 * s2;
        den1 += s1 * s1;
        den2 += s2 * s2;
    }
    if den1 <= 0.0 || den2 <= 0.0 {
        return Err(Error::degenerate("circ_corr_js: zero denominator"));
    }
    check_corr(num / (den1 * den2).sqrt())
}

/// Sample Fisher–Lee circular correlation: the U-statistic over all distinct
/// pairs, evaluated through its O(n) trigonometric-moment expansion.
pub fn circ_corr_fl(pairs: &[[f64; 2]]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::domain("circ_corr_fl requires n >= 3"));
    }
    // Over i<j: Σ sin(a_i−a_j) sin(b_i−b_j) = ΣA·ΣB − ΣC·ΣD with
    // A = cos a cos b, B = sin a sin b, C = cos a sin b, D = sin a cos b,
    // and Σ sin²(a_i−a_j) = Σsin²a·Σcos²a − (Σ sin a cos a)².
    let (mut sa, mut sb, mut sc, mut sd) = (0.0, 0.0, 0.0, 0.0);
    let (mut s2a, mut c2a, mut sca) = (0.0, 0.0, 0.0);
    let (mut s2b, mut c2b, mut scb) = (0.0, 0.0, 0.0);
    for p in pairs {
        let (sin_a, cos_a) = p[0].sin_cos();
        let (sin_b, cos_b) = p[1].sin_cos();
        sa += cos_a * cos_b;
        sb += sin_a * sin_b;
        sc += cos_a * sin_b;
        sd += sin_a * cos_b;
        s2a += sin_a * sin_a;
        c2a += cos_a * cos_a;
        sca += sin_a * cos_a;
        s2b += sin_b * sin_b;
        c2b += cos_b * cos_b;
        scb += sin_b * cos_b;
    }
    let num = sa * sb - sc * sd;
    let den1 = s2a * c2a - sca * sca;
    let den2 = s2b * c2b - scb * scb;
    if den1 <= 0.0 || den2 <= 0.0 {
        return Err(Error::degenerate("circ_corr_fl: zero denominator"));
    }
    check_corr(num / (den1 * den2).sqrt())
}

fn check_corr(rho: f64) -> Result<f64> {
    if !rho.is_finite() || rho.abs() > 1.0 + 1e-8 {
        return Err(Error::numeric(format!("correlation outside [-1, 1]: {rho}")));
    }
    Ok(rho.clamp(-1.0, 1.0))
}

/// log |sinh x|, stable for large |x|.
fn log_sinh_abs<T: Real>(x: T) -> T {
    let a = x.abs();
    a + (-(-(T::of(2.0) * a)).exp()).ln_1p() - T::of(2.0).ln()
}

/// Population circular variance(s) and correlations of one component.
pub fn model_summary<T: Real>(
    kind: ModelKind,
    p: &ComponentParams<T>,
    qrnd: QrndConfig,
) -> Result<CircSummary<T>> {
    p.validate(kind)?;
    let summary = match kind {
        ModelKind::Wnorm => CircSummary {
            var1: range_var(T::one() - (-(T::of(2.0) * p.kappa1).recip()).exp())?,
            var2: None,
            rho_js: None,
            rho_fl: None,
        },
        ModelKind::Vm => CircSummary {
            var1: range_var(T::one() - bessel_a(p.kappa1)?)?,
            var2: None,
            rho_js: None,
            rho_fl: None,
        },
        ModelKind::Wnorm2 => wnorm2_summary(p)?,
        ModelKind::Vmsin => {
            let r = vmsin_const_ratios(p.kappa1, p.kappa2, p.kappa3, qrnd)?;
            ratios_summary(&r, r.d3)?
        }
        ModelKind::Vmcos => {
            let r = vmcos_const_ratios(p.kappa1, p.kappa2, p.kappa3, qrnd)?;
            // E[sin sin] = E[cos(a−b)] − E[cos a cos b].
            ratios_summary(&r, r.d3 - r.d12)?
        }
    };
    Ok(summary)
}

fn wnorm2_summary<T: Real>(p: &ComponentParams<T>) -> Result<CircSummary<T>> {
    let det = p.kappa1 * p.kappa2 - p.kappa3 * p.kappa3;
    if det <= T::zero() {
        return Err(Error::domain(
            "wnorm2 summary requires a positive definite precision matrix",
        ));
    }
    let s11 = p.kappa2 / det;
    let s22 = p.kappa1 / det;
    let s12 = -p.kappa3 / det;
    let var1 = range_var(T::one() - (-s11 / T::of(2.0)).exp())?;
    let var2 = range_var(T::one() - (-s22 / T::of(2.0)).exp())?;
    let (rho_js, rho_fl) = if s12 == T::zero() {
        (T::zero(), T::zero())
    } else {
        let sign = if s12 > T::zero() { T::one() } else { -T::one() };
        let two = T::of(2.0);
        let js = sign
            * (log_sinh_abs(s12) - (log_sinh_abs(s11) + log_sinh_abs(s22)) / two).exp();
        let fl = sign
            * (log_sinh_abs(two * s12)
                - (log_sinh_abs(two * s11) + log_sinh_abs(two * s22)) / two)
                .exp();
        (js, fl)
    };
    Ok(CircSummary {
        var1,
        var2: Some(var2),
        rho_js: Some(range_corr(rho_js)?),
        rho_fl: Some(range_corr(rho_fl)?),
    })
}

/// Build the sine/cosine summaries from constant-derivative ratios; `sin_sin`
/// is the model's E[sin(ψ₁−μ₁) sin(ψ₂−μ₂)].
fn ratios_summary<T: Real>(r: &ConstRatios<T>, sin_sin: T) -> Result<CircSummary<T>> {
    let one = T::one();
    let var1 = range_var(one - r.d1)?;
    let var2 = range_var(one - r.d2)?;
    let sin2_1 = (one - r.d11).max(T::zero());
    let sin2_2 = (one - r.d22).max(T::zero());
    if sin2_1 == T::zero() || sin2_2 == T::zero() {
        return Err(Error::degenerate(
            "degenerate marginal: E[sin^2] = 0 in correlation denominator",
        ));
    }
    let rho_js = sin_sin / (sin2_1 * sin2_2).sqrt();
    let denom_fl = (r.d11 * sin2_1 * r.d22 * sin2_2).sqrt();
    if denom_fl == T::zero() {
        return Err(Error::degenerate("degenerate Fisher-Lee denominator"));
    }
    let rho_fl = sin_sin * r.d12 / denom_fl;
    Ok(CircSummary {
        var1,
        var2: Some(var2),
        rho_js: Some(range_corr(rho_js)?),
        rho_fl: Some(range_corr(rho_fl)?),
    })
}

fn range_var<T: Real>(v: T) -> Result<T> {
    if !v.is_finite() || v < -T::of(1e-8) || v > T::one() + T::of(1e-8) {
        return Err(Error::numeric(format!("variance outside [0, 1]: {v}")));
    }
    Ok(v.max(T::zero()).min(T::one()))
}

fn range_corr<T: Real>(r: T) -> Result<T> {
    if !r.is_finite() || r.abs() > T::one() + T::of(1e-8) {
        return Err(Error::numeric(format!("correlation outside [-1, 1]: {r}")));
    }
    Ok(r.max(-T::one()).min(T::one()))
}
