//! Exact random-variate generation for all five families and their mixtures.
//!
//! Wrapped normals sample the unwrapped normal and reduce mod 2π, the
//! univariate von Mises uses the Best–Fisher wrapped-Cauchy rejection scheme,
//! and the bivariate von Mises models use a rejection sampler with uniform
//! proposals whose majorization constant is located numerically.

mod rng;

pub use rng::RngStream;

use crate::data::{AngleData, ComponentParams, MixtureState, ModelKind, QrndConfig};
use crate::densities::EvalConfig;
use crate::error::{Error, Result};
use crate::scalar::wrap_angle;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Concentrations below this are sampled as exactly uniform.
const UNIFORM_EPS: f64 = 1e-10;

const TAU: f64 = std::f64::consts::TAU;

/// Draw n values from the univariate wrapped normal WN(μ, κ).
pub fn rwnorm<R: Rng>(n: usize, p: &ComponentParams<f64>, rng: &mut R) -> Result<Vec<f64>> {
    if p.kappa1 < 0.0 {
        return Err(Error::domain("rwnorm requires kappa >= 0"));
    }
    if p.kappa1 < UNIFORM_EPS {
        return Ok((0..n).map(|_| rng.random_range(0.0..TAU)).collect());
    }
    let sd = p.kappa1.sqrt().recip();
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            wrap_angle(p.mu1 + sd * z)
        })
        .collect())
}

/// Draw n pairs from the bivariate wrapped normal with precision matrix
/// [[κ₁, κ₃], [κ₃, κ₂]]. The all-zero case draws uniformly on the torus;
/// any other singular precision is an error.
pub fn rwnorm2<R: Rng>(n: usize, p: &ComponentParams<f64>, rng: &mut R) -> Result<Vec<[f64; 2]>> {
    if p.kappa1 < 0.0 || p.kappa2 < 0.0 {
        return Err(Error::domain("rwnorm2 requires kappa1, kappa2 >= 0"));
    }
    if p.kappa1 == 0.0 && p.kappa2 == 0.0 && p.kappa3 == 0.0 {
        return Ok((0..n)
            .map(|_| [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)])
            .collect());
    }
    let det = p.kappa1 * p.kappa2 - p.kappa3 * p.kappa3;
    if det <= 0.0 {
        return Err(Error::domain(
            "rwnorm2 requires a positive definite precision matrix",
        ));
    }
    // Cholesky factor of the covariance Σ = Δ⁻¹.
    let s11 = p.kappa2 / det;
    let s22 = p.kappa1 / det;
    let s12 = -p.kappa3 / det;
    let l11 = s11.sqrt();
    let l21 = s12 / l11;
    let l22 = (s22 - s12 * s12 / s11).sqrt();
    Ok((0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            [
                wrap_angle(p.mu1 + l11 * z1),
                wrap_angle(p.mu2 + l21 * z1 + l22 * z2),
            ]
        })
        .collect())
}

/// Best–Fisher rejection sampler from a wrapped Cauchy envelope; returns the
/// draws plus the number of proposals consumed.
fn rvm_counted<R: Rng>(n: usize, mu: f64, kappa: f64, rng: &mut R) -> (Vec<f64>, usize) {
    let a = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let b = (a - (2.0 * a).sqrt()) / (2.0 * kappa);
    let r = (1.0 + b * b) / (2.0 * b);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let u3: f64 = rng.random();
        let z = (std::f64::consts::PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let angle = if u3 > 0.5 { f.acos() } else { -f.acos() };
            out.push(wrap_angle(mu + angle));
        }
    }
    (out, attempts)
}

/// Draw n values from the univariate von Mises vM(μ, κ).
pub fn rvm<R: Rng>(n: usize, p: &ComponentParams<f64>, rng: &mut R) -> Result<Vec<f64>> {
    if p.kappa1 < 0.0 {
        return Err(Error::domain("rvm requires kappa >= 0"));
    }
    if p.kappa1 < UNIFORM_EPS {
        return Ok((0..n).map(|_| rng.random_range(0.0..TAU)).collect());
    }
    Ok(rvm_counted(n, p.mu1, p.kappa1, rng).0)
}

/// Numerically locate the maximum of a smooth exponent over [0, 2π)²: best
/// cell of a 100×100 grid scan, then Newton refinement.
fn locate_exponent_max(
    g: impl Fn(f64, f64) -> f64,
    grad_hess: impl Fn(f64, f64) -> ([f64; 2], [[f64; 2]; 2]),
) -> Result<f64> {
    let n = 100;
    let h = TAU / n as f64;
    let (mut best_x, mut best_y, mut best_g) = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = (j as f64 + 0.5) * h;
            let v = g(x, y);
            if v > best_g {
                best_g = v;
                best_x = x;
                best_y = y;
            }
        }
    }
    let (mut x, mut y, mut fx) = (best_x, best_y, best_g);
    for _ in 0..20 {
        let (grad, hess) = grad_hess(x, y);
        let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
        if det.abs() < 1e-14 {
            break;
        }
        // Newton step: solve H δ = −∇g.
        let dx = -(hess[1][1] * grad[0] - hess[0][1] * grad[1]) / det;
        let dy = -(-hess[1][0] * grad[0] + hess[0][0] * grad[1]) / det;
        let (nx, ny) = (x + dx, y + dy);
        let fnew = g(nx, ny);
        if !fnew.is_finite() {
            break;
        }
        if fnew >= fx {
            let done = (fnew - fx).abs() < 1e-10;
            x = nx;
            y = ny;
            fx = fnew;
            if done {
                break;
            }
        } else {
            break;
        }
    }
    let max = fx.max(best_g);
    if !max.is_finite() {
        return Err(Error::numeric("non-finite majorant for rejection sampler"));
    }
    // Small cushion so the refined maximum certainly majorizes.
    Ok(max + 1e-9)
}

fn reject_sample_bivariate<R: Rng>(
    n: usize,
    mu1: f64,
    mu2: f64,
    exponent: impl Fn(f64, f64) -> f64,
    g_max: f64,
    rng: &mut R,
) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x: f64 = rng.random_range(0.0..TAU);
        let y: f64 = rng.random_range(0.0..TAU);
        let u: f64 = rng.random();
        if u.ln() <= exponent(x, y) - g_max {
            out.push([wrap_angle(mu1 + x), wrap_angle(mu2 + y)]);
        }
    }
    out
}

/// Draw n pairs from the von Mises sine model by naive rejection with a
/// uniform proposal on the torus.
pub fn rvmsin<R: Rng>(n: usize, p: &ComponentParams<f64>, rng: &mut R) -> Result<Vec<[f64; 2]>> {
    if p.kappa1 < 0.0 || p.kappa2 < 0.0 {
        return Err(Error::domain("rvmsin requires kappa1, kappa2 >= 0"));
    }
    let (k1, k2, k3) = (p.kappa1, p.kappa2, p.kappa3);
    let g = move |x: f64, y: f64| k1 * x.cos() + k2 * y.cos() + k3 * x.sin() * y.sin();
    let gh = move |x: f64, y: f64| {
        (
            [
                -k1 * x.sin() + k3 * x.cos() * y.sin(),
                -k2 * y.sin() + k3 * x.sin() * y.cos(),
            ],
            [
                [
                    -k1 * x.cos() - k3 * x.sin() * y.sin(),
                    k3 * x.cos() * y.cos(),
                ],
                [
                    k3 * x.cos() * y.cos(),
                    -k2 * y.cos() - k3 * x.sin() * y.sin(),
                ],
            ],
        )
    };
    let g_max = locate_exponent_max(g, gh)?;
    Ok(reject_sample_bivariate(n, p.mu1, p.mu2, g, g_max, rng))
}

/// Draw n pairs from the von Mises cosine model by naive rejection with a
/// uniform proposal on the torus.
pub fn rvmcos<R: Rng>(n: usize, p: &ComponentParams<f64>, rng: &mut R) -> Result<Vec<[f64; 2]>> {
    if p.kappa1 < 0.0 || p.kappa2 < 0.0 {
        return Err(Error::domain("rvmcos requires kappa1, kappa2 >= 0"));
    }
    let (k1, k2, k3) = (p.kappa1, p.kappa2, p.kappa3);
    let g = move |x: f64, y: f64| k1 * x.cos() + k2 * y.cos() + k3 * (x - y).cos();
    let gh = move |x: f64, y: f64| {
        (
            [
                -k1 * x.sin() - k3 * (x - y).sin(),
                -k2 * y.sin() + k3 * (x - y).sin(),
            ],
            [
                [-k1 * x.cos() - k3 * (x - y).cos(), k3 * (x - y).cos()],
                [k3 * (x - y).cos(), -k2 * y.cos() - k3 * (x - y).cos()],
            ],
        )
    };
    let g_max = locate_exponent_max(g, gh)?;
    Ok(reject_sample_bivariate(n, p.mu1, p.mu2, g, g_max, rng))
}

/// Draw n observations from a single component of the given family.
pub fn rcomponent<R: Rng>(
    n: usize,
    kind: ModelKind,
    p: &ComponentParams<f64>,
    rng: &mut R,
) -> Result<AngleData> {
    Ok(match kind {
        ModelKind::Wnorm => AngleData::Univariate(rwnorm(n, p, rng)?),
        ModelKind::Vm => AngleData::Univariate(rvm(n, p, rng)?),
        ModelKind::Wnorm2 => AngleData::Bivariate(rwnorm2(n, p, rng)?),
        ModelKind::Vmsin => AngleData::Bivariate(rvmsin(n, p, rng)?),
        ModelKind::Vmcos => AngleData::Bivariate(rvmcos(n, p, rng)?),
    })
}

/// Sample an index from a probability vector.
pub fn sample_categorical<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    probs.len() - 1
}

/// Draw n observations from a mixture, returning the data together with the
/// true component labels (0-based) for synthetic-data testing.
pub fn rmix<R: Rng>(
    n: usize,
    kind: ModelKind,
    state: &MixtureState<f64>,
    rng: &mut R,
) -> Result<(AngleData, Vec<usize>)> {
    state.validate(kind)?;
    let labels: Vec<usize> = (0..n)
        .map(|_| sample_categorical(&state.pmix, rng))
        .collect();
    let mut counts = vec![0usize; state.n_comp()];
    for &l in &labels {
        counts[l] += 1;
    }
    // Draw each component's block with one sampler call (the bivariate von
    // Mises samplers locate their majorant once per call), then scatter the
    // draws back into label order.
    let mut blocks: Vec<AngleData> = Vec::with_capacity(state.n_comp());
    for (j, &c) in counts.iter().enumerate() {
        blocks.push(rcomponent(c, kind, &state.comps[j], rng)?);
    }
    let mut cursors = vec![0usize; state.n_comp()];
    let data = if kind.is_bivariate() {
        let mut rows = Vec::with_capacity(n);
        for &l in &labels {
            let row = blocks[l].row(cursors[l]);
            rows.push([row[0], row[1]]);
            cursors[l] += 1;
        }
        AngleData::Bivariate(rows)
    } else {
        let mut rows = Vec::with_capacity(n);
        for &l in &labels {
            rows.push(blocks[l].row(cursors[l])[0]);
            cursors[l] += 1;
        }
        AngleData::Univariate(rows)
    };
    Ok((data, labels))
}

/// Convenience draw from a mixture, data only.
pub fn rmix_data<R: Rng>(
    n: usize,
    kind: ModelKind,
    state: &MixtureState<f64>,
    rng: &mut R,
) -> Result<AngleData> {
    Ok(rmix(n, kind, state, rng)?.0)
}

/// Chi-square goodness-of-fit statistic of draws against the quadrature
/// normalized density on a regular partition. Univariate: `bins` cells;
/// bivariate: `bins`×`bins` cells. Returns (statistic, degrees of freedom).
pub fn chi_square_gof(
    data: &AngleData,
    kind: ModelKind,
    p: &ComponentParams<f64>,
    cfg: EvalConfig,
    bins: usize,
) -> Result<(f64, usize)> {
    data.check_kind(kind)?;
    let dens = crate::densities::ComponentDensity::new(kind, *p, cfg)?;
    let n = data.len() as f64;
    let h = TAU / bins as f64;
    // Expected cell masses by midpoint quadrature on a 4x subdivision.
    let sub = 4;
    let hs = h / sub as f64;
    if kind.is_bivariate() {
        let mut counts = vec![0.0f64; bins * bins];
        for i in 0..data.len() {
            let r = data.row(i);
            let bx = ((r[0] / h) as usize).min(bins - 1);
            let by = ((r[1] / h) as usize).min(bins - 1);
            counts[bx * bins + by] += 1.0;
        }
        let mut stat = 0.0;
        for bx in 0..bins {
            for by in 0..bins {
                let mut mass = 0.0;
                for sx in 0..sub {
                    let x = bx as f64 * h + (sx as f64 + 0.5) * hs;
                    for sy in 0..sub {
                        let y = by as f64 * h + (sy as f64 + 0.5) * hs;
                        mass += dens.logpdf(&[x, y]).exp();
                    }
                }
                mass *= hs * hs;
                let expected = (mass * n).max(1e-12);
                let d = counts[bx * bins + by] - expected;
                stat += d * d / expected;
            }
        }
        Ok((stat, bins * bins - 1))
    } else {
        let mut counts = vec![0.0f64; bins];
        for i in 0..data.len() {
            let bx = ((data.row(i)[0] / h) as usize).min(bins - 1);
            counts[bx] += 1.0;
        }
        let mut stat = 0.0;
        for (bx, &c) in counts.iter().enumerate() {
            let mut mass = 0.0;
            for sx in 0..sub {
                let x = bx as f64 * h + (sx as f64 + 0.5) * hs;
                mass += dens.logpdf(&[x]).exp();
            }
            mass *= hs;
            let expected = (mass * n).max(1e-12);
            let d = c - expected;
            stat += d * d / expected;
        }
        Ok((stat, bins - 1))
    }
}

/// Quasi-random points scaled to the torus, for Monte Carlo estimation of
/// expectations under a density.
pub fn torus_qmc_points(qrnd: QrndConfig) -> Result<Vec<[f64; 2]>> {
    Ok(crate::special::sobol_2d::<f64>(qrnd.n())?
        .into_iter()
        .map(|p| [p[0] * TAU, p[1] * TAU])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summaries::{circ_corr_js, circ_mean, circ_var};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn rng(seed: u64) -> rand_chacha::ChaCha12Rng {
        RngStream::new(seed, 0).rng()
    }

    /// Asymptotic Kolmogorov-Smirnov p-value for a uniform [0, 2π) null.
    fn ks_uniform_pvalue(sample: &[f64]) -> f64 {
        let mut xs: Vec<f64> = sample.to_vec();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = x / TAU;
            let lo = i as f64 / n;
            let hi = (i as f64 + 1.0) / n;
            d = d.max((f - lo).abs()).max((hi - f).abs());
        }
        let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
        let mut p = 0.0;
        for k in 1..=100 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            p += 2.0 * sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        }
        p.clamp(0.0, 1.0)
    }

    #[test]
    fn outputs_in_range() {
        let mut r = rng(1);
        let p = ComponentParams::univariate(PI, 4.0);
        for x in rwnorm(2000, &p, &mut r).unwrap() {
            assert!((0.0..TAU).contains(&x));
        }
        let pb = ComponentParams::bivariate(0.1, 6.0, 3.0, 3.0, 1.0);
        for x in rwnorm2(2000, &pb, &mut r).unwrap() {
            assert!((0.0..TAU).contains(&x[0]) && (0.0..TAU).contains(&x[1]));
        }
    }

    #[test]
    fn rwnorm_uniform_when_kappa_zero() {
        let mut r = rng(2);
        let p = ComponentParams::univariate(1.0, 0.0);
        let xs = rwnorm(10_000, &p, &mut r).unwrap();
        assert!(ks_uniform_pvalue(&xs) > 0.01);
    }

    #[test]
    fn rwnorm_circular_mean_recovers_mu() {
        let mut r = rng(3);
        let p = ComponentParams::univariate(PI, 4.0);
        let xs = rwnorm(10_000, &p, &mut r).unwrap();
        let m = circ_mean(&xs).unwrap();
        assert!((m - PI).abs() < 0.05, "mean {m}");
    }

    #[test]
    fn rwnorm_negative_kappa_rejected() {
        let mut r = rng(4);
        let p = ComponentParams {
            mu1: 0.0,
            mu2: 0.0,
            kappa1: -1.0,
            kappa2: 0.0,
            kappa3: 0.0,
        };
        assert!(rwnorm(10, &p, &mut r).is_err());
    }

    #[test]
    fn rwnorm2_independent_when_kappa3_zero() {
        let mut r = rng(5);
        let p = ComponentParams::bivariate(1.0, 4.0, 2.0, 2.0, 0.0);
        let xs = rwnorm2(10_000, &p, &mut r).unwrap();
        assert!(circ_corr_js(&xs).unwrap().abs() < 0.03);
    }

    #[test]
    fn rwnorm2_matches_sinh_correlation() {
        let mut r = rng(6);
        let p = ComponentParams::bivariate(PI, PI, 3.0, 3.0, 1.0);
        let xs = rwnorm2(100_000, &p, &mut r).unwrap();
        let det: f64 = 3.0 * 3.0 - 1.0;
        let (s11, s22, s12) = (3.0 / det, 3.0 / det, -1.0 / det);
        let want = s12.sinh() / (s11.sinh() * s22.sinh()).sqrt();
        let got = circ_corr_js(&xs).unwrap();
        assert!((got - want).abs() < 0.02, "got {got}, want {want}");
    }

    #[test]
    fn rwnorm2_singular_rejected() {
        let mut r = rng(7);
        let p = ComponentParams::bivariate(0.0, 0.0, 1.0, 1.0, 1.0);
        assert!(rwnorm2(10, &p, &mut r).is_err());
    }

    #[test]
    fn rvm_uniform_when_kappa_zero() {
        let mut r = rng(8);
        let p = ComponentParams::univariate(2.0, 0.0);
        let xs = rvm(10_000, &p, &mut r).unwrap();
        assert!(ks_uniform_pvalue(&xs) > 0.01);
    }

    #[test]
    fn rvm_circular_variance_matches_bessel_ratio() {
        let mut r = rng(9);
        let p = ComponentParams::univariate(PI, 2.0);
        let xs = rvm(100_000, &p, &mut r).unwrap();
        let want = 1.0 - crate::special::bessel_a(2.0f64).unwrap();
        assert!((circ_var(&xs).unwrap() - want).abs() < 0.01);
    }

    #[test]
    fn rvm_envelope_acceptance_above_half() {
        for &kappa in &[0.1, 1.0, 10.0, 100.0] {
            let mut r = rng(10);
            let (_, attempts) = rvm_counted(20_000, 1.0, kappa, &mut r);
            let rate = 20_000.0 / attempts as f64;
            assert!(rate > 0.5, "kappa={kappa} acceptance={rate}");
        }
    }

    #[test]
    fn rvmsin_uniform_case() {
        let mut r = rng(11);
        let p = ComponentParams::bivariate(0.0, 0.0, 0.0, 0.0, 0.0);
        let xs = rvmsin(10_000, &p, &mut r).unwrap();
        let c1: Vec<f64> = xs.iter().map(|x| x[0]).collect();
        let c2: Vec<f64> = xs.iter().map(|x| x[1]).collect();
        assert!(ks_uniform_pvalue(&c1) > 0.01);
        assert!(ks_uniform_pvalue(&c2) > 0.01);
    }

    #[test]
    fn rvmsin_histogram_close_to_density() {
        // Total variation between a 2-D histogram and the cell-integrated
        // density, bimodal parameters.
        let mut r = rng(12);
        let p = ComponentParams::bivariate(PI, PI, 2.0, 2.0, 1.0);
        let xs = rvmsin(100_000, &p, &mut r).unwrap();
        let bins = 15;
        let h = TAU / bins as f64;
        let mut counts = vec![0.0; bins * bins];
        for x in &xs {
            let bx = ((x[0] / h) as usize).min(bins - 1);
            let by = ((x[1] / h) as usize).min(bins - 1);
            counts[bx * bins + by] += 1.0 / xs.len() as f64;
        }
        let dens =
            crate::densities::ComponentDensity::new(ModelKind::Vmsin, p, EvalConfig::default())
                .unwrap();
        let mut tv = 0.0;
        let sub = 4;
        let hs = h / sub as f64;
        for bx in 0..bins {
            for by in 0..bins {
                let mut mass = 0.0;
                for sx in 0..sub {
                    for sy in 0..sub {
                        let x = bx as f64 * h + (sx as f64 + 0.5) * hs;
                        let y = by as f64 * h + (sy as f64 + 0.5) * hs;
                        mass += dens.logpdf(&[x, y]).exp() * hs * hs;
                    }
                }
                tv += (counts[bx * bins + by] - mass).abs();
            }
        }
        tv *= 0.5;
        assert!(tv < 0.02, "tv distance {tv}");
    }

    #[test]
    fn rvmsin_sin_sin_moment_matches_series() {
        let mut r = rng(13);
        let p = ComponentParams::bivariate(PI, PI, 2.0, 2.0, 1.0);
        let xs = rvmsin(100_000, &p, &mut r).unwrap();
        let moment: f64 = xs
            .iter()
            .map(|x| (x[0] - PI).sin() * (x[1] - PI).sin())
            .sum::<f64>()
            / xs.len() as f64;
        let ratios =
            crate::densities::vmsin_const_ratios(2.0, 2.0, 1.0, QrndConfig::default()).unwrap();
        assert!(
            (moment - ratios.d3).abs() < 0.02,
            "moment {moment} vs {}",
            ratios.d3
        );
    }

    #[test]
    fn rmix_label_frequencies() {
        let mut r = rng(14);
        let comps = vec![
            ComponentParams::univariate(1.0, 5.0),
            ComponentParams::univariate(4.0, 5.0),
            ComponentParams::univariate(5.5, 5.0),
        ];
        let state = MixtureState::new(comps, vec![0.5, 0.3, 0.2]).unwrap();
        let (_, labels) = rmix(10_000, ModelKind::Vm, &state, &mut r).unwrap();
        for (j, want) in [0.5, 0.3, 0.2].iter().enumerate() {
            let freq = labels.iter().filter(|&&l| l == j).count() as f64 / 10_000.0;
            assert!((freq - want).abs() < 0.02, "comp {j}: {freq}");
        }
    }

    #[test]
    fn rmix_concentrated_components_cluster() {
        let mut r = rng(15);
        let comps = vec![
            ComponentParams::univariate(1.0, 1e4),
            ComponentParams::univariate(4.0, 1e4),
        ];
        let state = MixtureState::new(comps, vec![0.5, 0.5]).unwrap();
        let (data, labels) = rmix(2_000, ModelKind::Vm, &state, &mut r).unwrap();
        if let AngleData::Univariate(xs) = data {
            for (x, &l) in xs.iter().zip(&labels) {
                let mu = if l == 0 { 1.0 } else { 4.0 };
                assert!((x - mu).abs() < 0.1, "x={x} label={l}");
            }
        }
    }

    #[test]
    fn reproducible_across_equal_streams() {
        let p = ComponentParams::bivariate(1.0, 2.0, 3.0, 2.0, -1.0);
        let mut r1 = RngStream::new(99, 7).rng();
        let mut r2 = RngStream::new(99, 7).rng();
        let a = rvmcos(500, &p, &mut r1).unwrap();
        let b = rvmcos(500, &p, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_component_mixture_matches_component_sampler() {
        let p = ComponentParams::univariate(2.0, 3.0);
        let state = MixtureState::new(vec![p], vec![1.0]).unwrap();
        let mut r1 = rng(16);
        let (data, _) = rmix(5_000, ModelKind::Vm, &state, &mut r1).unwrap();
        if let AngleData::Univariate(xs) = data {
            let m = circ_mean(&xs).unwrap();
            assert_relative_eq!(m, 2.0, epsilon = 0.05);
        }
    }
}
