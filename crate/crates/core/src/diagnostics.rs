//! Convergence assessment: Geweke z-scores with batch-means long-run
//! variances, raw sample extraction, and acceptance-rate summaries.

use crate::error::{Error, Result};
use crate::mcmc::FitResult;
use crate::postprocess::{fit_param_names, param_series};
use serde::Serialize;

/// Batch-means estimate of the long-run variance of a stationary series:
/// √n batches of equal size, batch-size × variance of the batch means.
fn batch_means_variance(series: &[f64]) -> Option<f64> {
    let n = series.len();
    let b = (n as f64).sqrt().floor() as usize;
    if b < 2 {
        return None;
    }
    let m = n / b;
    if m == 0 {
        return None;
    }
    let means: Vec<f64> = (0..b)
        .map(|i| series[i * m..(i + 1) * m].iter().sum::<f64>() / m as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (b as f64 - 1.0);
    Some(m as f64 * var)
}

/// Geweke convergence z-score: equality of means between the first
/// `frac1` and last `frac2` portions of the series, with batch-means
/// long-run variances.
pub fn geweke_z(series: &[f64], frac1: f64, frac2: f64) -> Result<f64> {
    if series.len() < 40 {
        return Err(Error::domain("geweke_z needs a series of length >= 40"));
    }
    if !(0.0..1.0).contains(&frac1) || !(0.0..1.0).contains(&frac2) || frac1 <= 0.0 || frac2 <= 0.0
    {
        return Err(Error::config("geweke fractions must lie in (0, 1)"));
    }
    if frac1 + frac2 > 1.0 + 1e-12 {
        return Err(Error::config("geweke segments must not overlap"));
    }
    let n = series.len();
    let n1 = (n as f64 * frac1).floor() as usize;
    let n2 = (n as f64 * frac2).floor() as usize;
    let a = &series[..n1];
    let b = &series[n - n2..];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let va = batch_means_variance(a)
        .ok_or_else(|| Error::degenerate("geweke segment too short for batch means"))?;
    let vb = batch_means_variance(b)
        .ok_or_else(|| Error::degenerate("geweke segment too short for batch means"))?;
    if va <= 0.0 || vb <= 0.0 {
        return Err(Error::degenerate("zero variance in a geweke segment"));
    }
    Ok((mean(a) - mean(b)) / (va / a.len() as f64 + vb / b.len() as f64).sqrt())
}

/// One Geweke entry: a parameter of a component within a chain.
#[derive(Debug, Clone, Serialize)]
pub struct GewekeEntry {
    pub chain: usize,
    pub param: String,
    pub component: usize,
    /// `None` when the series is degenerate (e.g. a pinned parameter).
    pub z: Option<f64>,
}

/// Geweke z-scores of every parameter in every chain.
#[derive(Debug, Clone, Serialize)]
pub struct GewekeReport {
    pub frac1: f64,
    pub frac2: f64,
    pub entries: Vec<GewekeEntry>,
}

pub fn geweke_report(fit: &FitResult, frac1: f64, frac2: f64) -> Result<GewekeReport> {
    let mut entries = Vec::new();
    for c in 0..fit.n_chains() {
        let sub = crate::postprocess::select_chains(fit, &[c])?;
        for &name in &fit_param_names(fit) {
            for comp in 0..fit.n_comp() {
                let series = param_series(&sub, name, comp);
                entries.push(GewekeEntry {
                    chain: c,
                    param: name.to_string(),
                    component: comp,
                    z: geweke_z(&series, frac1, frac2).ok(),
                });
            }
        }
    }
    Ok(GewekeReport {
        frac1,
        frac2,
        entries,
    })
}

/// One extracted series of raw MCMC draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractedSeries {
    pub chain: usize,
    pub param: String,
    pub component: usize,
    pub values: Vec<f64>,
}

/// Extract raw draws for the selected parameters, component labels
/// (0-based) and chain ids, preserving iteration order.
pub fn extract_samples(
    fit: &FitResult,
    params: &[&str],
    comps: &[usize],
    chains: &[usize],
) -> Result<Vec<ExtractedSeries>> {
    if params.is_empty() || comps.is_empty() || chains.is_empty() {
        return Err(Error::config("empty selection in extract_samples"));
    }
    let known = fit_param_names(fit);
    for p in params {
        if !known.contains(p) {
            return Err(Error::config(format!("unknown parameter '{p}'")));
        }
    }
    for &c in comps {
        if c >= fit.n_comp() {
            return Err(Error::config(format!("unknown component {c}")));
        }
    }
    let mut out = Vec::new();
    for &chain in chains {
        if chain >= fit.n_chains() {
            return Err(Error::config(format!("unknown chain {chain}")));
        }
        let sub = crate::postprocess::select_chains(fit, &[chain])?;
        for &param in params {
            for &comp in comps {
                out.push(ExtractedSeries {
                    chain,
                    param: param.to_string(),
                    component: comp,
                    values: param_series(&sub, param, comp),
                });
            }
        }
    }
    Ok(out)
}

/// Mean acceptance rate per chain per component over the retained draws.
pub fn acceptance_summary(fit: &FitResult) -> Vec<Vec<f64>> {
    fit.chains
        .iter()
        .map(|ch| {
            let mut rates = vec![0.0; fit.n_comp()];
            for flags in &ch.accepted {
                for (j, &a) in flags.iter().enumerate() {
                    if a {
                        rates[j] += 1.0;
                    }
                }
            }
            let s = ch.accepted.len().max(1) as f64;
            rates.iter_mut().for_each(|r| *r /= s);
            rates
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AngleData, ComponentParams, MixtureState, ModelKind};
    use crate::postprocess::tests::synthetic_fit;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn constant_series_is_degenerate() {
        let series = vec![1.0; 100];
        assert!(geweke_z(&series, 0.1, 0.5).is_err());
    }

    #[test]
    fn null_simulation_keeps_z_small() {
        let mut failures = 0;
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1000 + seed);
            let series: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
            let z = geweke_z(&series, 0.1, 0.5).unwrap();
            if z.abs() >= 3.0 {
                failures += 1;
            }
        }
        assert!(failures <= 1, "{failures}/100 null rejections");
    }

    #[test]
    fn level_shift_is_detected() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let mut series: Vec<f64> = (0..5_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let shifted: Vec<f64> = (0..5_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                5.0 + z
            })
            .collect();
        series.extend(shifted);
        let z = geweke_z(&series, 0.1, 0.5).unwrap();
        assert!(z.abs() > 5.0, "z = {z}");
    }

    #[test]
    fn affine_invariance() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        let series: Vec<f64> = (0..2_000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scaled: Vec<f64> = series.iter().map(|x| 3.0 * x + 11.0).collect();
        let z1 = geweke_z(&series, 0.1, 0.5).unwrap();
        let z2 = geweke_z(&scaled, 0.1, 0.5).unwrap();
        assert!((z1 - z2).abs() < 1e-10);
        // Both halves convention (0.5, 0.5) must also be accepted.
        assert!(geweke_z(&series, 0.5, 0.5).is_ok());
    }

    fn tiny_fit() -> crate::mcmc::FitResult {
        let states: Vec<MixtureState<f64>> = (0..50)
            .map(|i| {
                MixtureState::new(
                    vec![
                        ComponentParams::univariate(1.0 + 0.001 * i as f64, 2.0),
                        ComponentParams::univariate(4.0, 1.0 + 0.01 * i as f64),
                    ],
                    vec![0.5, 0.5],
                )
                .unwrap()
            })
            .collect();
        synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(states.clone(), vec![0.0; 50]), (states, vec![0.0; 50])],
        )
    }

    #[test]
    fn extraction_preserves_order_and_validates() {
        let fit = tiny_fit();
        let all = extract_samples(&fit, &["mu", "kappa"], &[0, 1], &[0, 1]).unwrap();
        assert_eq!(all.len(), 8);
        let mu0 = all
            .iter()
            .find(|s| s.param == "mu" && s.component == 0 && s.chain == 0)
            .unwrap();
        assert_eq!(mu0.values.len(), 50);
        assert!(mu0.values[1] > mu0.values[0]);
        assert!(extract_samples(&fit, &[], &[0], &[0]).is_err());
        assert!(extract_samples(&fit, &["mu"], &[5], &[0]).is_err());
        assert!(extract_samples(&fit, &["nope"], &[0], &[0]).is_err());
    }

    #[test]
    fn acceptance_rates_count_flags() {
        let mut fit = tiny_fit();
        for (s, flags) in fit.chains[0].accepted.iter_mut().enumerate() {
            flags[0] = s % 2 == 0;
            flags[1] = false;
        }
        let rates = acceptance_summary(&fit);
        assert_eq!(rates[0][0], 0.5);
        assert_eq!(rates[0][1], 0.0);
        assert_eq!(rates[1][0], 1.0);
    }
}
