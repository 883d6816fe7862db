//! Univariate von Mises density plus the bivariate sine and cosine models:
//! log-densities, series normalizing constants with quasi-Monte Carlo
//! fallbacks, the constant's partial-derivative ratios, and log gradients.
//!
//! The reciprocal constants C̄ = 1/C and all their partial-derivative series
//! are accumulated in log space so that concentrations far beyond 50 stay
//! finite. When a series is unreliable — the cosine model with κ₃ < −5 or any
//! argument above 50, or any series that has not converged after 512 terms —
//! the code switches to quasi-Monte Carlo integration of the exponent over a
//! 2-D Sobol point set.

use crate::data::{ComponentParams, QrndConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{bessel_a, ln_factorial, log_bessel_i, log_bessel_i_over_xm, sobol_2d};

/// Largest number of series terms before falling back to quasi-Monte Carlo.
const MAX_TERMS: u32 = 512;

/// Parameter region where the cosine constant's alternating series is
/// numerically unreliable and QMC integration is used instead.
fn vmcos_needs_qmc<T: Real>(k1: T, k2: T, k3: T) -> bool {
    k3 < T::of(-5.0) || k1.max(k2).max(k3.abs()) > T::of(50.0)
}

/// log f of the univariate von Mises vM(μ, κ) at ψ.
pub fn vm_logpdf<T: Real>(psi: T, p: &ComponentParams<T>) -> Result<T> {
    if p.kappa1 < T::zero() {
        return Err(Error::domain("vm requires kappa >= 0"));
    }
    Ok(p.kappa1 * (psi - p.mu1).cos() - T::tau().ln() - log_bessel_i(0, p.kappa1)?)
}

/// Gradient of the von Mises log-density with respect to (κ, μ).
pub fn vm_grad<T: Real>(psi: T, p: &ComponentParams<T>) -> Result<[T; 2]> {
    if p.kappa1 < T::zero() {
        return Err(Error::domain("vm requires kappa >= 0"));
    }
    Ok([
        (psi - p.mu1).cos() - bessel_a(p.kappa1)?,
        p.kappa1 * (psi - p.mu1).sin(),
    ])
}

/// Lazily extended table of log Iₘ(x) values for one fixed argument.
struct BesselTable<T> {
    x: T,
    logs: Vec<T>,
}

impl<T: Real> BesselTable<T> {
    fn new(x: T) -> Self {
        BesselTable { x, logs: Vec::new() }
    }

    fn get(&mut self, m: u32) -> T {
        while self.logs.len() <= m as usize {
            let order = self.logs.len() as u32;
            self.logs
                .push(log_bessel_i(order, self.x).expect("non-negative argument"));
        }
        self.logs[m as usize]
    }
}

/// Signed log-space accumulator for Σ sᵢ·e^{lᵢ}.
struct SeriesAcc<T> {
    max: T,
    sum: T,
}

impl<T: Real> SeriesAcc<T> {
    fn new() -> Self {
        SeriesAcc {
            max: T::neg_infinity(),
            sum: T::zero(),
        }
    }

    fn push(&mut self, log_mag: T, positive: bool) {
        if log_mag == T::neg_infinity() {
            return;
        }
        let signed = if positive { T::one() } else { -T::one() };
        if log_mag > self.max {
            self.sum = self.sum * (self.max - log_mag).exp() + signed;
            self.max = log_mag;
        } else {
            self.sum = self.sum + signed * (log_mag - self.max).exp();
        }
    }

    /// log |Σ|, or −∞ when nothing has accumulated.
    fn log_abs(&self) -> T {
        if self.sum == T::zero() || !self.max.is_finite() {
            T::neg_infinity()
        } else {
            self.max + self.sum.abs().ln()
        }
    }

    fn is_positive(&self) -> bool {
        self.sum > T::zero()
    }
}

/// Sum a series given by `term(m) -> (log |term|, sign)`; terms of magnitude
/// exactly zero may be encoded as `-∞`. Returns log of the total if the
/// series converged to a positive value within [`MAX_TERMS`] terms.
///
/// `positive_total` distinguishes series known to be positive (their log is
/// returned) from signed quantities (the caller inspects the sign itself via
/// the returned accumulator).
fn sum_log_series<T: Real>(mut term: impl FnMut(u32) -> (T, bool)) -> Option<(T, bool)> {
    let tol_log = T::series_tol().ln();
    let mut acc = SeriesAcc::new();
    let mut prev_mag = T::infinity();
    for m in 0..MAX_TERMS {
        let (log_mag, positive) = term(m);
        if log_mag.is_nan() {
            return None;
        }
        acc.push(log_mag, positive);
        let total = acc.log_abs();
        let converged = m > 0
            && log_mag <= prev_mag
            && (log_mag == T::neg_infinity() || log_mag - total < tol_log);
        if converged {
            return Some((total, acc.is_positive()));
        }
        prev_mag = log_mag;
    }
    None
}

/// Moments of the bivariate exponent estimated by quasi-Monte Carlo with the
/// means fixed at zero. `d3_sine` selects E[sin x sin y] (sine model) versus
/// E[cos(x−y)] (cosine model).
struct QmcMoments<T> {
    log_c: T,
    d1: T,
    d2: T,
    d3: T,
    d11: T,
    d22: T,
    d12: T,
}

fn qmc_moments<T: Real>(
    exponent: impl Fn(T, T) -> T,
    sine_d3: bool,
    qrnd: QrndConfig,
) -> Result<QmcMoments<T>> {
    let pts = sobol_2d::<T>(qrnd.n())?;
    let tau = T::tau();
    let mut max_g = T::neg_infinity();
    let mut gs = Vec::with_capacity(pts.len());
    for p in &pts {
        let g = exponent(p[0] * tau, p[1] * tau);
        max_g = max_g.max(g);
        gs.push(g);
    }
    if !max_g.is_finite() {
        return Err(Error::numeric("non-finite exponent in QMC integration"));
    }
    let mut wsum = T::zero();
    let mut m = [T::zero(); 6];
    for (g, p) in gs.iter().zip(&pts) {
        let w = (*g - max_g).exp();
        let (x, y) = (p[0] * tau, p[1] * tau);
        wsum = wsum + w;
        m[0] = m[0] + w * x.cos();
        m[1] = m[1] + w * y.cos();
        m[2] = m[2] + w * if sine_d3 { x.sin() * y.sin() } else { (x - y).cos() };
        m[3] = m[3] + w * x.cos() * x.cos();
        m[4] = m[4] + w * y.cos() * y.cos();
        m[5] = m[5] + w * x.cos() * y.cos();
    }
    let n = T::of_usize(pts.len());
    Ok(QmcMoments {
        log_c: (T::of(4.0) * T::PI() * T::PI()).ln() + max_g + (wsum / n).ln(),
        d1: m[0] / wsum,
        d2: m[1] / wsum,
        d3: m[2] / wsum,
        d11: m[3] / wsum,
        d22: m[4] / wsum,
        d12: m[5] / wsum,
    })
}

fn sine_exponent<T: Real>(k1: T, k2: T, k3: T) -> impl Fn(T, T) -> T {
    move |x, y| k1 * x.cos() + k2 * y.cos() + k3 * x.sin() * y.sin()
}

fn cosine_exponent<T: Real>(k1: T, k2: T, k3: T) -> impl Fn(T, T) -> T {
    move |x, y| k1 * x.cos() + k2 * y.cos() + k3 * (x - y).cos()
}

/// The reciprocal normalizing constant C̄ and the ratios of its partial
/// derivatives to itself. `d1 = (∂C̄/∂κ₁)/C̄` is E[cos(ψ₁−μ₁)] and so on;
/// `d3` is E[sin sin] for the sine model and E[cos(ψ₁−μ₁−ψ₂+μ₂)] for the
/// cosine model. Second-order ratios are expectations of squared/mixed
/// cosines.
#[derive(Debug, Clone, Copy)]
pub struct ConstRatios<T> {
    pub log_c: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
    pub d11: T,
    pub d22: T,
    pub d12: T,
}

fn check_sine_args<T: Real>(k1: T, k2: T) -> Result<()> {
    if k1 < T::zero() || k2 < T::zero() {
        Err(Error::domain("vmsin/vmcos require kappa1, kappa2 >= 0"))
    } else {
        Ok(())
    }
}

/// ln C(2m, m), computed incrementally by the caller loop.
fn ln_central_binom<T: Real>(m: u32) -> T {
    ln_factorial::<T>(2 * m) - T::of(2.0) * ln_factorial::<T>(m)
}

/// log C̄_s for the sine model: 4π² Σₘ C(2m,m) (κ₃²/4κ₁κ₂)ᵐ Iₘ(κ₁)Iₘ(κ₂),
/// written term-wise as κ₃²ᵐ/4ᵐ · [Iₘ(κ₁)/κ₁ᵐ][Iₘ(κ₂)/κ₂ᵐ] so κ₁ = 0 or
/// κ₂ = 0 are exact limits rather than 0/0.
pub fn log_vmsin_const<T: Real>(k1: T, k2: T, k3: T, qrnd: QrndConfig) -> Result<T> {
    check_sine_args(k1, k2)?;
    let log_4pi2 = (T::of(4.0) * T::PI() * T::PI()).ln();
    let series = sum_log_series(|m| {
        if m > 0 && k3 == T::zero() {
            return (T::neg_infinity(), true);
        }
        let power = if m == 0 {
            T::zero()
        } else {
            T::of_usize(m as usize) * (T::of(2.0) * k3.abs().ln() - T::of(4.0).ln())
        };
        let l = ln_central_binom::<T>(m)
            + power
            + log_bessel_i_over_xm(m, k1).unwrap()
            + log_bessel_i_over_xm(m, k2).unwrap();
        (l, true)
    });
    match series {
        Some((log_sum, true)) => Ok(log_4pi2 + log_sum),
        _ => Ok(qmc_moments(sine_exponent(k1, k2, k3), true, qrnd)?.log_c),
    }
}

/// Full ratio set for the sine model. Falls back to QMC expectations when any
/// series fails to converge or a concentration is exactly zero (the
/// second-order series are written in the κ₁, κ₂ > 0 form).
pub fn vmsin_const_ratios<T: Real>(
    k1: T,
    k2: T,
    k3: T,
    qrnd: QrndConfig,
) -> Result<ConstRatios<T>> {
    check_sine_args(k1, k2)?;
    if k1 > T::zero() && k2 > T::zero() {
        if let Some(r) = vmsin_ratios_series(k1, k2, k3) {
            return Ok(r);
        }
    }
    let m = qmc_moments(sine_exponent(k1, k2, k3), true, qrnd)?;
    Ok(ConstRatios {
        log_c: m.log_c,
        d1: m.d1,
        d2: m.d2,
        d3: m.d3,
        d11: m.d11,
        d22: m.d22,
        d12: m.d12,
    })
}

fn vmsin_ratios_series<T: Real>(k1: T, k2: T, k3: T) -> Option<ConstRatios<T>> {
    // log q with q = κ3²/(4κ1κ2); −∞ encodes κ3 = 0 and the m = 0 guard
    // below keeps 0·(−∞) out of the terms.
    let log_q = if k3 == T::zero() {
        T::neg_infinity()
    } else {
        T::of(2.0) * k3.abs().ln() - (T::of(4.0) * k1 * k2).ln()
    };
    let qm = |m: u32| {
        if m == 0 {
            T::zero()
        } else {
            T::of_usize(m as usize) * log_q
        }
    };
    let mut t1 = BesselTable::new(k1);
    let mut t2 = BesselTable::new(k2);

    let (log_c, _) = sum_log_series(|m| {
        (ln_central_binom::<T>(m) + qm(m) + t1.get(m) + t2.get(m), true)
    })?;
    let (log_d1, _) = sum_log_series(|m| {
        (ln_central_binom::<T>(m) + qm(m) + t1.get(m + 1) + t2.get(m), true)
    })?;
    let (log_d2, _) = sum_log_series(|m| {
        (ln_central_binom::<T>(m) + qm(m) + t1.get(m) + t2.get(m + 1), true)
    })?;
    // ∂C̄/∂κ3 carries κ3^{2m−1}: odd in κ3, zero at κ3 = 0.
    let d3 = if k3 == T::zero() {
        T::zero()
    } else {
        let (log_d3, _) = sum_log_series(|m| {
            let m1 = m + 1;
            let l = T::of_usize(m1 as usize).ln()
                + ln_central_binom::<T>(m1)
                + qm(m1)
                - k3.abs().ln()
                + t1.get(m1)
                + t2.get(m1);
            (l, true)
        })?;
        // Prefactor 8π²/4π² = 2, and the sign of κ3.
        let mag = (T::of(2.0).ln() + log_d3 - log_c).exp();
        if k3 > T::zero() {
            mag
        } else {
            -mag
        }
    };
    let lse2 = |a: T, b: T| {
        let m = a.max(b);
        if !m.is_finite() {
            return m;
        }
        m + ((a - m).exp() + (b - m).exp()).ln()
    };
    let (log_d11, _) = sum_log_series(|m| {
        let inner = lse2(t1.get(m + 1) - k1.ln(), t1.get(m + 2));
        (ln_central_binom::<T>(m) + qm(m) + inner + t2.get(m), true)
    })?;
    let (log_d22, _) = sum_log_series(|m| {
        let inner = lse2(t2.get(m + 1) - k2.ln(), t2.get(m + 2));
        (ln_central_binom::<T>(m) + qm(m) + t1.get(m) + inner, true)
    })?;
    let (log_d12, _) = sum_log_series(|m| {
        (ln_central_binom::<T>(m) + qm(m) + t1.get(m + 1) + t2.get(m + 1), true)
    })?;

    let log_4pi2 = (T::of(4.0) * T::PI() * T::PI()).ln();
    Some(ConstRatios {
        log_c: log_4pi2 + log_c,
        d1: (log_d1 - log_c).exp(),
        d2: (log_d2 - log_c).exp(),
        d3,
        d11: (log_d11 - log_c).exp(),
        d22: (log_d22 - log_c).exp(),
        d12: (log_d12 - log_c).exp(),
    })
}

/// log C̄_c for the cosine model:
/// 4π²{I₀(κ₁)I₀(κ₂)I₀(κ₃) + 2 Σ_{n≥1} Iₙ(κ₁)Iₙ(κ₂)Iₙ(κ₃)}, with the signed
/// Bessel identity Iₙ(−x) = (−1)ⁿIₙ(x) handling κ₃ < 0.
pub fn log_vmcos_const<T: Real>(k1: T, k2: T, k3: T, qrnd: QrndConfig) -> Result<T> {
    check_sine_args(k1, k2)?;
    if vmcos_needs_qmc(k1, k2, k3) {
        return Ok(qmc_moments(cosine_exponent(k1, k2, k3), false, qrnd)?.log_c);
    }
    let b = k3.abs();
    let negative = k3 < T::zero();
    let series = sum_log_series(|n| {
        if n == 0 {
            let l = log_bessel_i(0, k1).unwrap()
                + log_bessel_i(0, k2).unwrap()
                + log_bessel_i(0, b).unwrap();
            (l, true)
        } else {
            let l = T::of(2.0).ln()
                + log_bessel_i(n, k1).unwrap()
                + log_bessel_i(n, k2).unwrap()
                + log_bessel_i(n, b).unwrap();
            (l, !(negative && n % 2 == 1))
        }
    });
    match series {
        Some((log_sum, true)) => Ok((T::of(4.0) * T::PI() * T::PI()).ln() + log_sum),
        _ => Ok(qmc_moments(cosine_exponent(k1, k2, k3), false, qrnd)?.log_c),
    }
}

/// Full ratio set for the cosine model.
pub fn vmcos_const_ratios<T: Real>(
    k1: T,
    k2: T,
    k3: T,
    qrnd: QrndConfig,
) -> Result<ConstRatios<T>> {
    check_sine_args(k1, k2)?;
    if !vmcos_needs_qmc(k1, k2, k3) {
        if let Some(r) = vmcos_ratios_series(k1, k2, k3) {
            return Ok(r);
        }
    }
    let m = qmc_moments(cosine_exponent(k1, k2, k3), false, qrnd)?;
    Ok(ConstRatios {
        log_c: m.log_c,
        d1: m.d1,
        d2: m.d2,
        d3: m.d3,
        d11: m.d11,
        d22: m.d22,
        d12: m.d12,
    })
}

fn vmcos_ratios_series<T: Real>(k1: T, k2: T, k3: T) -> Option<ConstRatios<T>> {
    let b = k3.abs();
    let neg = k3 < T::zero();
    let mut t1 = BesselTable::new(k1);
    let mut t2 = BesselTable::new(k2);
    let mut t3 = BesselTable::new(b);
    // Iₙ at |n| for the I_{m-2} term of the second derivatives.
    let sign_pow = |p: u32| !(neg && p % 2 == 1);
    let lse2 = |a: T, c: T| {
        let m = a.max(c);
        if !m.is_finite() {
            return m;
        }
        m + ((a - m).exp() + (c - m).exp()).ln()
    };

    let (log_c, c_pos) = sum_log_series(|n| {
        if n == 0 {
            (t1.get(0) + t2.get(0) + t3.get(0), true)
        } else {
            (
                T::of(2.0).ln() + t1.get(n) + t2.get(n) + t3.get(n),
                sign_pow(n),
            )
        }
    })?;
    if !c_pos {
        return None;
    }

    // Signed one-dimensional reductions share this helper: each term is
    // mag(m) with sign κ3^{s(m)}.
    let signed = |series: &mut dyn FnMut(u32) -> (T, u32)| -> Option<T> {
        let r = sum_log_series(|m| {
            let (mag, pow) = series(m);
            (mag, sign_pow(pow))
        })?;
        let (log_mag, positive) = r;
        let v = (log_mag - log_c).exp();
        Some(if positive { v } else { -v })
    };

    let d1 = signed(&mut |m| {
        if m == 0 {
            (t1.get(1) + t2.get(0) + t3.get(0), 0)
        } else {
            (
                t2.get(m) + t3.get(m) + lse2(t1.get(m + 1), t1.get(m - 1)),
                m,
            )
        }
    })?;
    let d2 = signed(&mut |m| {
        if m == 0 {
            (t1.get(0) + t2.get(1) + t3.get(0), 0)
        } else {
            (
                t1.get(m) + t3.get(m) + lse2(t2.get(m + 1), t2.get(m - 1)),
                m,
            )
        }
    })?;
    // ∂C̄/∂κ3: I₀I₀I₁(κ3) + Σ IₘIₘ[I_{m+1}(κ3)+I_{m-1}(κ3)]; the bracket has
    // uniform sign κ3^{m-1} since I_{m+1} and I_{m-1} share parity.
    let d3 = signed(&mut |m| {
        if m == 0 {
            (t1.get(0) + t2.get(0) + t3.get(1), 1)
        } else {
            (
                t1.get(m) + t2.get(m) + lse2(t3.get(m + 1), t3.get(m - 1)),
                m - 1,
            )
        }
    })?;
    let half = T::of(0.5);
    let dm2 = |t: &mut BesselTable<T>, m: u32| {
        let lo = m.abs_diff(2);
        lse2(
            lse2(t.get(lo), t.get(m + 2)),
            T::of(2.0).ln() + t.get(m),
        )
    };
    let d11 = signed(&mut |m| {
        if m == 0 {
            (
                t2.get(0) + t3.get(0) + lse2(t1.get(0), t1.get(2)),
                0,
            )
        } else {
            (t2.get(m) + t3.get(m) + dm2(&mut t1, m), m)
        }
    })
    .map(|v| v * half)?;
    let d22 = signed(&mut |m| {
        if m == 0 {
            (
                t1.get(0) + t3.get(0) + lse2(t2.get(0), t2.get(2)),
                0,
            )
        } else {
            (t1.get(m) + t3.get(m) + dm2(&mut t2, m), m)
        }
    })
    .map(|v| v * half)?;
    let d12 = signed(&mut |m| {
        if m == 0 {
            (
                T::of(2.0).ln() + t1.get(1) + t2.get(1) + t3.get(0),
                0,
            )
        } else {
            (
                t3.get(m)
                    + lse2(t1.get(m + 1), t1.get(m - 1))
                    + lse2(t2.get(m + 1), t2.get(m - 1)),
                m,
            )
        }
    })
    .map(|v| v * half)?;

    let log_4pi2 = (T::of(4.0) * T::PI() * T::PI()).ln();
    Some(ConstRatios {
        log_c: log_4pi2 + log_c,
        d1,
        d2,
        d3,
        d11,
        d22,
        d12,
    })
}

/// log f of the bivariate von Mises sine model at ψ.
pub fn vmsin_logpdf<T: Real>(
    psi: [T; 2],
    p: &ComponentParams<T>,
    qrnd: QrndConfig,
) -> Result<T> {
    let log_c = log_vmsin_const(p.kappa1, p.kappa2, p.kappa3, qrnd)?;
    Ok(vmsin_exponent_at(psi, p) - log_c)
}

pub(crate) fn vmsin_exponent_at<T: Real>(psi: [T; 2], p: &ComponentParams<T>) -> T {
    let a = psi[0] - p.mu1;
    let b = psi[1] - p.mu2;
    p.kappa1 * a.cos() + p.kappa2 * b.cos() + p.kappa3 * a.sin() * b.sin()
}

/// log f of the bivariate von Mises cosine model at ψ.
pub fn vmcos_logpdf<T: Real>(
    psi: [T; 2],
    p: &ComponentParams<T>,
    qrnd: QrndConfig,
) -> Result<T> {
    let log_c = log_vmcos_const(p.kappa1, p.kappa2, p.kappa3, qrnd)?;
    Ok(vmcos_exponent_at(psi, p) - log_c)
}

pub(crate) fn vmcos_exponent_at<T: Real>(psi: [T; 2], p: &ComponentParams<T>) -> T {
    let a = psi[0] - p.mu1;
    let b = psi[1] - p.mu2;
    p.kappa1 * a.cos() + p.kappa2 * b.cos() + p.kappa3 * (a - b).cos()
}

/// Gradient of the sine-model log-density with respect to
/// (κ₁, κ₂, κ₃, μ₁, μ₂), given precomputed constant ratios.
pub(crate) fn vmsin_grad_with<T: Real>(
    psi: [T; 2],
    p: &ComponentParams<T>,
    r: &ConstRatios<T>,
) -> [T; 5] {
    let a = psi[0] - p.mu1;
    let b = psi[1] - p.mu2;
    [
        a.cos() - r.d1,
        b.cos() - r.d2,
        a.sin() * b.sin() - r.d3,
        p.kappa1 * a.sin() - p.kappa3 * a.cos() * b.sin(),
        p.kappa2 * b.sin() - p.kappa3 * a.sin() * b.cos(),
    ]
}

/// Gradient of the cosine-model log-density with respect to
/// (κ₁, κ₂, κ₃, μ₁, μ₂), given precomputed constant ratios.
pub(crate) fn vmcos_grad_with<T: Real>(
    psi: [T; 2],
    p: &ComponentParams<T>,
    r: &ConstRatios<T>,
) -> [T; 5] {
    let a = psi[0] - p.mu1;
    let b = psi[1] - p.mu2;
    let delta = a - b;
    [
        a.cos() - r.d1,
        b.cos() - r.d2,
        delta.cos() - r.d3,
        p.kappa1 * a.sin() + p.kappa3 * delta.sin(),
        p.kappa2 * b.sin() - p.kappa3 * delta.sin(),
    ]
}
