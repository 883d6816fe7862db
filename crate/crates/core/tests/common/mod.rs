//! Shared oracles for the integration suites: dense-grid posteriors,
//! nonparametric tests and distribution helpers. Everything here is
//! independent of the library's own computational paths.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use torusmix::densities::vm_logpdf;
use torusmix::ComponentParams;

pub const TAU: f64 = std::f64::consts::TAU;

/// Posterior mean of (μ, κ) for a single von Mises component under the
/// package prior (uniform μ, normal on log κ with the given variance),
/// computed by dense-grid quadrature over (μ, log κ).
pub fn vm_grid_posterior_mean(data: &[f64], norm_var: f64) -> (f64, f64) {
    let n_mu = 400;
    let n_t = 400;
    let (t_lo, t_hi) = (0.02f64.ln(), 60.0f64.ln());
    let mut log_w = Vec::with_capacity(n_mu * n_t);
    let mut mus = Vec::with_capacity(n_mu * n_t);
    let mut kappas = Vec::with_capacity(n_mu * n_t);
    for i in 0..n_mu {
        let mu = (i as f64 + 0.5) * TAU / n_mu as f64;
        for j in 0..n_t {
            let t = t_lo + (j as f64 + 0.5) * (t_hi - t_lo) / n_t as f64;
            let kappa = t.exp();
            let p = ComponentParams::univariate(mu, kappa);
            let mut lw = -0.5 * (TAU * norm_var).ln() - t * t / (2.0 * norm_var);
            for &x in data {
                lw += vm_logpdf(x, &p).unwrap();
            }
            log_w.push(lw);
            mus.push(mu);
            kappas.push(kappa);
        }
    }
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut wsum = 0.0;
    let mut mu_acc = 0.0;
    let mut kappa_acc = 0.0;
    for ((lw, mu), kappa) in log_w.iter().zip(&mus).zip(&kappas) {
        let w = (lw - max).exp();
        wsum += w;
        mu_acc += w * mu;
        kappa_acc += w * kappa;
    }
    (mu_acc / wsum, kappa_acc / wsum)
}

/// Two-sided Mann-Kendall trend test p-value (normal approximation,
/// continuity corrected).
pub fn mann_kendall_pvalue(series: &[f64]) -> f64 {
    let n = series.len();
    let mut s: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += match series[j].partial_cmp(&series[i]).unwrap() {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => 0,
            };
        }
    }
    let var = n as f64 * (n as f64 - 1.0) * (2.0 * n as f64 + 5.0) / 18.0;
    let z = if s > 0 {
        (s as f64 - 1.0) / var.sqrt()
    } else if s < 0 {
        (s as f64 + 1.0) / var.sqrt()
    } else {
        0.0
    };
    let normal = Normal::new(0.0, 1.0).unwrap();
    2.0 * (1.0 - normal.cdf(z.abs()))
}

/// Asymptotic Kolmogorov-Smirnov p-value from the scaled statistic λ.
fn kolmogorov_pvalue(lambda: f64) -> f64 {
    let mut p = 0.0;
    for k in 1..=100 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        p += 2.0 * sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
    }
    p.clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test p-value.
pub fn ks2_pvalue(a: &[f64], b: &[f64]) -> f64 {
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (m, n) = (xs.len(), ys.len());
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < m && j < n {
        let x = xs[i].min(ys[j]);
        while i < m && xs[i] <= x {
            i += 1;
        }
        while j < n && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    let ne = (m as f64 * n as f64 / (m + n) as f64).sqrt();
    kolmogorov_pvalue((ne + 0.12 + 0.11 / ne) * d)
}

/// One-sample KS p-value against the uniform law on [0, 2π).
pub fn ks_uniform_pvalue(sample: &[f64]) -> f64 {
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = x / TAU;
        d = d.max((f - i as f64 / n).abs()).max(((i as f64 + 1.0) / n - f).abs());
    }
    kolmogorov_pvalue((n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d)
}

/// Upper critical value of the chi-square distribution.
pub fn chi2_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}
