//! Univariate and bivariate wrapped normal log-densities and their log
//! gradients. The infinite lattice sums are truncated at ω ∈ {0, ±1, …, ±M}
//! per [`DispConfig`]; the κ → 0 uniform limits are returned exactly.

use crate::data::{ComponentParams, DispConfig};
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Real};

/// log f of the univariate wrapped normal WN(μ, κ) at ψ.
pub fn wnorm_logpdf<T: Real>(psi: T, p: &ComponentParams<T>, d: DispConfig) -> Result<T> {
    if p.kappa1 < T::zero() {
        return Err(Error::domain("wnorm requires kappa >= 0"));
    }
    if p.kappa1 == T::zero() {
        return Ok(-T::tau().ln());
    }
    let kappa = p.kappa1;
    let mut exps = Vec::with_capacity(2 * d.m() as usize + 1);
    for omega in -d.m()..=d.m() {
        let dev = psi - p.mu1 - T::tau() * T::of(omega as f64);
        exps.push(-kappa / T::of(2.0) * dev * dev);
    }
    Ok((kappa / T::tau()).ln() / T::of(2.0) + log_sum_exp(&exps))
}

/// log f of the bivariate wrapped normal at ψ = (ψ₁, ψ₂). The precision
/// matrix [[κ₁, κ₃], [κ₃, κ₂]] must be positive semidefinite.
pub fn wnorm2_logpdf<T: Real>(psi: [T; 2], p: &ComponentParams<T>, d: DispConfig) -> Result<T> {
    if p.kappa1 < T::zero() || p.kappa2 < T::zero() {
        return Err(Error::domain("wnorm2 requires kappa1, kappa2 >= 0"));
    }
    let det = p.kappa1 * p.kappa2 - p.kappa3 * p.kappa3;
    if det < T::zero() {
        return Err(Error::constraint(
            "wnorm2 requires kappa1*kappa2 - kappa3^2 >= 0",
        ));
    }
    if p.kappa1 == T::zero() && p.kappa2 == T::zero() && p.kappa3 == T::zero() {
        return Ok(-(T::of(4.0) * T::PI() * T::PI()).ln());
    }
    if det == T::zero() {
        // Degenerate ridge: zero density in the truncated representation.
        return Ok(T::neg_infinity());
    }
    let half = T::of(0.5);
    let mut exps = Vec::with_capacity((2 * d.m() as usize + 1).pow(2));
    for w1 in -d.m()..=d.m() {
        let d1 = psi[0] - p.mu1 - T::tau() * T::of(w1 as f64);
        for w2 in -d.m()..=d.m() {
            let d2 = psi[1] - p.mu2 - T::tau() * T::of(w2 as f64);
            let quad = p.kappa1 * d1 * d1
                + p.kappa2 * d2 * d2
                + T::of(2.0) * p.kappa3 * d1 * d2;
            exps.push(-half * quad);
        }
    }
    Ok(det.sqrt().ln() - T::tau().ln() + log_sum_exp(&exps))
}

/// Gradient of the univariate wrapped normal log-density with respect to
/// (κ, μ). Requires κ > 0.
pub fn wnorm_grad<T: Real>(psi: T, p: &ComponentParams<T>, d: DispConfig) -> Result<[T; 2]> {
    if p.kappa1 <= T::zero() {
        return Err(Error::domain("wnorm gradient requires kappa > 0"));
    }
    let kappa = p.kappa1;
    let m = d.m();
    let mut logw = Vec::with_capacity(2 * m as usize + 1);
    let mut devs = Vec::with_capacity(2 * m as usize + 1);
    for omega in -m..=m {
        let dev = psi - p.mu1 - T::tau() * T::of(omega as f64);
        logw.push(-kappa / T::of(2.0) * dev * dev);
        devs.push(dev);
    }
    let lse = log_sum_exp(&logw);
    let mut mean_d = T::zero();
    let mut mean_d2 = T::zero();
    for (lw, dev) in logw.iter().zip(&devs) {
        let w = (*lw - lse).exp();
        mean_d = mean_d + w * *dev;
        mean_d2 = mean_d2 + w * *dev * *dev;
    }
    Ok([
        (T::of(2.0) * kappa).recip() - mean_d2 / T::of(2.0),
        kappa * mean_d,
    ])
}

/// Gradient of the bivariate wrapped normal log-density with respect to
/// (κ₁, κ₂, κ₃, μ₁, μ₂). Requires a strictly positive definite precision.
pub fn wnorm2_grad<T: Real>(
    psi: [T; 2],
    p: &ComponentParams<T>,
    d: DispConfig,
) -> Result<[T; 5]> {
    if p.kappa1 <= T::zero() || p.kappa2 <= T::zero() {
        return Err(Error::domain("wnorm2 gradient requires kappa1, kappa2 > 0"));
    }
    let det = p.kappa1 * p.kappa2 - p.kappa3 * p.kappa3;
    if det <= T::zero() {
        return Err(Error::constraint(
            "wnorm2 gradient requires kappa1*kappa2 - kappa3^2 > 0",
        ));
    }
    let half = T::of(0.5);
    let m = d.m();
    let count = (2 * m as usize + 1).pow(2);
    let mut logw = Vec::with_capacity(count);
    let mut d1s = Vec::with_capacity(count);
    let mut d2s = Vec::with_capacity(count);
    for w1 in -m..=m {
        let d1 = psi[0] - p.mu1 - T::tau() * T::of(w1 as f64);
        for w2 in -m..=m {
            let d2 = psi[1] - p.mu2 - T::tau() * T::of(w2 as f64);
            let quad = p.kappa1 * d1 * d1
                + p.kappa2 * d2 * d2
                + T::of(2.0) * p.kappa3 * d1 * d2;
            logw.push(-half * quad);
            d1s.push(d1);
            d2s.push(d2);
        }
    }
    let lse = log_sum_exp(&logw);
    let (mut m11, mut m22, mut m12, mut m1, mut m2) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for i in 0..logw.len() {
        let w = (logw[i] - lse).exp();
        m11 = m11 + w * d1s[i] * d1s[i];
        m22 = m22 + w * d2s[i] * d2s[i];
        m12 = m12 + w * d1s[i] * d2s[i];
        m1 = m1 + w * d1s[i];
        m2 = m2 + w * d2s[i];
    }
    Ok([
        p.kappa2 / (T::of(2.0) * det) - m11 / T::of(2.0),
        p.kappa1 / (T::of(2.0) * det) - m22 / T::of(2.0),
        -p.kappa3 / det - m12,
        p.kappa1 * m1 + p.kappa3 * m2,
        p.kappa3 * m1 + p.kappa2 * m2,
    ])
}
