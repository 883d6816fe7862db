//! Information criteria (WAIC, truncated-importance-sampling LOO, AIC, BIC,
//! DIC), the elpd comparison z-test, and the incremental component-count
//! search.

use crate::data::AngleData;
use crate::densities::MixtureDensity;
use crate::error::{Error, Result};
use crate::mcmc::{fit_angmix, FitConfig, FitResult};
use crate::postprocess::{pointest, select_chains, Reducer};
use crate::scalar::log_sum_exp;
use rayon::prelude::*;
use serde::Serialize;

/// Which criterion to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CritKind {
    Waic,
    Looic,
    Aic,
    Bic,
    Dic,
}

impl CritKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "WAIC" => Ok(CritKind::Waic),
            "LOOIC" | "LOO" => Ok(CritKind::Looic),
            "AIC" => Ok(CritKind::Aic),
            "BIC" => Ok(CritKind::Bic),
            "DIC" => Ok(CritKind::Dic),
            other => Err(Error::config(format!("unknown criterion '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CritKind::Waic => "WAIC",
            CritKind::Looic => "LOOIC",
            CritKind::Aic => "AIC",
            CritKind::Bic => "BIC",
            CritKind::Dic => "DIC",
        }
    }

    /// elpd-style criteria are larger-is-better; the deviance-based ones are
    /// smaller-is-better.
    pub fn larger_is_better(self) -> bool {
        matches!(self, CritKind::Waic | CritKind::Looic)
    }
}

/// A computed criterion value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CritValue {
    pub kind: CritKind,
    /// WAIC/LOOIC: total elpd (larger is better). AIC/BIC/DIC: the usual
    /// deviance-scale value (smaller is better).
    pub value: f64,
    pub elpd: Option<f64>,
    pub elpd_pointwise: Option<Vec<f64>>,
    /// Effective number of parameters (reported form).
    pub p_eff: Option<f64>,
    /// The alternative form of the effective-parameter correction.
    pub p_eff_alt: Option<f64>,
}

/// Per-draw, per-observation log mixture densities, recomputed from the
/// retained states (pooled across the fit's chains, in chain order).
pub fn pointwise_log_liks(fit: &FitResult) -> Result<Vec<Vec<f64>>> {
    let cfg = fit.eval_config();
    let states: Vec<_> = fit.iter_states().map(|(_, _, s)| s).collect();
    states
        .par_iter()
        .map(|state| {
            let mix = MixtureDensity::new(fit.kind(), state, cfg)?;
            Ok((0..fit.data.len())
                .map(|i| mix.logpdf(fit.data.row(i)))
                .collect())
        })
        .collect()
}

fn check_draws(rows: &[Vec<f64>]) -> Result<()> {
    if rows.len() < 2 {
        return Err(Error::domain(
            "criterion needs at least 2 retained draws (variance undefined otherwise)",
        ));
    }
    Ok(())
}

/// Watanabe-Akaike information criterion on the elpd scale:
/// LPPD − p_W, with the variance form of p_W reported (form 2) and the
/// difference form (form 1) carried alongside.
pub fn waic(fit: &FitResult) -> Result<CritValue> {
    let rows = pointwise_log_liks(fit)?;
    waic_from_matrix(&rows)
}

fn waic_from_matrix(rows: &[Vec<f64>]) -> Result<CritValue> {
    check_draws(rows)?;
    let s = rows.len();
    let n = rows[0].len();
    let ln_s = (s as f64).ln();
    let mut pointwise = Vec::with_capacity(n);
    let (mut lppd, mut p1, mut p2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        let lppd_i = log_sum_exp(&col) - ln_s;
        let mean_l = col.iter().sum::<f64>() / s as f64;
        let var_l = col.iter().map(|x| (x - mean_l).powi(2)).sum::<f64>() / (s as f64 - 1.0);
        lppd += lppd_i;
        p1 += 2.0 * (lppd_i - mean_l);
        p2 += var_l;
        pointwise.push(lppd_i - var_l);
    }
    Ok(CritValue {
        kind: CritKind::Waic,
        value: lppd - p2,
        elpd: Some(lppd - p2),
        elpd_pointwise: Some(pointwise),
        p_eff: Some(p2),
        p_eff_alt: Some(p1),
    })
}

/// Leave-one-out information criterion with truncated importance sampling:
/// weights 1/p(yᵢ|ηₛ), truncated at (mean weight)·S^{3/4} per observation.
pub fn loo_is(fit: &FitResult) -> Result<CritValue> {
    let rows = pointwise_log_liks(fit)?;
    loo_from_matrix(&rows)
}

fn loo_from_matrix(rows: &[Vec<f64>]) -> Result<CritValue> {
    check_draws(rows)?;
    let s = rows.len();
    let n = rows[0].len();
    let ln_s = (s as f64).ln();
    let mut pointwise = Vec::with_capacity(n);
    let mut total = 0.0;
    let mut p_loo = 0.0;
    for i in 0..n {
        let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        if col.iter().all(|l| l.is_infinite() && *l < 0.0) {
            return Err(Error::degenerate(format!(
                "observation {i} has zero density under every retained draw"
            )));
        }
        // Raw log weights are −l; truncate at log(mean weight) + (3/4)ln S.
        let lw: Vec<f64> = col.iter().map(|l| -l).collect();
        let log_cap = log_sum_exp(&lw) - ln_s + 0.75 * ln_s;
        let lw_trunc: Vec<f64> = lw.iter().map(|w| w.min(log_cap)).collect();
        let num: Vec<f64> = lw_trunc.iter().zip(&col).map(|(w, l)| w + l).collect();
        let elpd_i = log_sum_exp(&num) - log_sum_exp(&lw_trunc);
        let lppd_i = log_sum_exp(&col) - ln_s;
        pointwise.push(elpd_i);
        total += elpd_i;
        p_loo += lppd_i - elpd_i;
    }
    Ok(CritValue {
        kind: CritKind::Looic,
        value: total,
        elpd: Some(total),
        elpd_pointwise: Some(pointwise),
        p_eff: Some(p_loo),
        p_eff_alt: None,
    })
}

/// Number of free parameters of a K-component mixture: K·dim(θ) + (K−1).
fn n_free_params(fit: &FitResult) -> f64 {
    let k = fit.n_comp() as f64;
    k * fit.kind().n_params() as f64 + (k - 1.0)
}

/// Highest recorded log-likelihood across the fit's retained draws — the
/// MCMC estimate of the maximized likelihood.
pub fn max_loglik(fit: &FitResult) -> f64 {
    fit.chains
        .iter()
        .flat_map(|c| c.loglik.iter())
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn aic(fit: &FitResult) -> Result<CritValue> {
    let l = max_loglik(fit);
    let m = n_free_params(fit);
    Ok(CritValue {
        kind: CritKind::Aic,
        value: -2.0 * l + 2.0 * m,
        elpd: None,
        elpd_pointwise: None,
        p_eff: Some(m),
        p_eff_alt: None,
    })
}

pub fn bic(fit: &FitResult) -> Result<CritValue> {
    let l = max_loglik(fit);
    let m = n_free_params(fit);
    let n = fit.data.len() as f64;
    Ok(CritValue {
        kind: CritKind::Bic,
        value: -2.0 * l + m * n.ln(),
        elpd: None,
        elpd_pointwise: None,
        p_eff: Some(m),
        p_eff_alt: None,
    })
}

/// Deviance information criterion. The variance form p_D = var(D)/2 is
/// reported; the plug-in form D̄ − D(η̄) (with circular averaging of the
/// means inside η̄) is carried alongside.
pub fn dic(fit: &FitResult) -> Result<CritValue> {
    let deviances: Vec<f64> = fit
        .chains
        .iter()
        .flat_map(|c| c.loglik.iter().map(|l| -2.0 * l))
        .collect();
    check_draws(&deviances.iter().map(|&d| vec![d]).collect::<Vec<_>>())?;
    let s = deviances.len() as f64;
    let dbar = deviances.iter().sum::<f64>() / s;
    let var_d = deviances.iter().map(|d| (d - dbar).powi(2)).sum::<f64>() / (s - 1.0);
    let p2 = var_d / 2.0;
    let eta_bar = pointest(fit, Reducer::Mean)?.state;
    let mix = MixtureDensity::new(fit.kind(), &eta_bar, fit.eval_config())?;
    let d_at_mean = -2.0 * mix.loglik_f64(&fit.data);
    let p1 = dbar - d_at_mean;
    Ok(CritValue {
        kind: CritKind::Dic,
        value: dbar + p2,
        elpd: None,
        elpd_pointwise: None,
        p_eff: Some(p2),
        p_eff_alt: Some(p1),
    })
}

/// Compute the requested criterion.
pub fn criterion(fit: &FitResult, kind: CritKind) -> Result<CritValue> {
    match kind {
        CritKind::Waic => waic(fit),
        CritKind::Looic => loo_is(fit),
        CritKind::Aic => aic(fit),
        CritKind::Bic => bic(fit),
        CritKind::Dic => dic(fit),
    }
}

/// elpd difference test between two criteria carrying pointwise vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElpdCompare {
    /// Σᵢ (elpd_B,i − elpd_A,i).
    pub elpd_diff: f64,
    /// √n times the standard deviation of the pointwise differences.
    pub se_diff: f64,
    pub z: f64,
}

pub fn elpd_compare(a: &CritValue, b: &CritValue) -> Result<ElpdCompare> {
    let pa = a
        .elpd_pointwise
        .as_ref()
        .ok_or_else(|| Error::config("criterion A carries no pointwise elpd"))?;
    let pb = b
        .elpd_pointwise
        .as_ref()
        .ok_or_else(|| Error::config("criterion B carries no pointwise elpd"))?;
    if pa.len() != pb.len() {
        return Err(Error::dimension("pointwise elpd vectors differ in length"));
    }
    let n = pa.len() as f64;
    let diffs: Vec<f64> = pb.iter().zip(pa).map(|(b, a)| b - a).collect();
    let total: f64 = diffs.iter().sum();
    let mean = total / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let se = n.sqrt() * sd;
    let z = if se > 0.0 {
        total / se
    } else if total == 0.0 {
        0.0
    } else {
        f64::INFINITY * total.signum()
    };
    Ok(ElpdCompare {
        elpd_diff: total,
        se_diff: se,
        z,
    })
}

/// Acklam's rational approximation of the standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    assert!((0.0..1.0).contains(&p) && p > 0.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Options of the incremental component-count search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementalConfig {
    pub crit: CritKind,
    /// One-sided level of the elpd z-test used with WAIC/LOOIC.
    pub alpha: f64,
    /// Initialize K ≥ 3 fits from the previous fit's MAP with its heaviest
    /// component duplicated (weight halved between the copies).
    pub prev_par: bool,
    /// Use only the chain with the highest average LPD for criterion
    /// computation and MAP extraction.
    pub use_best_chain: bool,
    pub start_ncomp: usize,
    pub max_ncomp: usize,
    pub return_all: bool,
}

impl Default for IncrementalConfig {
    fn default() -> Self {
        IncrementalConfig {
            crit: CritKind::Looic,
            alpha: 0.05,
            prev_par: true,
            use_best_chain: true,
            start_ncomp: 1,
            max_ncomp: 10,
            return_all: false,
        }
    }
}

/// Output of the incremental search.
#[derive(Debug)]
pub struct IncrementalResult {
    pub fit_best: FitResult,
    pub ncomp_best: usize,
    pub crit_all: Vec<CritValue>,
    pub crit_best: CritValue,
    pub maxllik_all: Vec<f64>,
    pub maxllik_best: f64,
    /// Component counts actually fitted, aligned with `crit_all`.
    pub ncomp_fitted: Vec<usize>,
    /// False when the search hit `max_ncomp` without the stopping rule
    /// firing.
    pub converged: bool,
    pub fit_all: Option<Vec<FitResult>>,
}

/// Duplicate the heaviest component of a state, halving its weight between
/// the two copies.
fn expand_state(state: &crate::data::MixtureState<f64>) -> crate::data::MixtureState<f64> {
    let mut heaviest = 0usize;
    for (j, &p) in state.pmix.iter().enumerate() {
        if p > state.pmix[heaviest] {
            heaviest = j;
        }
    }
    let mut comps = state.comps.clone();
    let mut pmix = state.pmix.clone();
    comps.push(comps[heaviest]);
    let half = pmix[heaviest] / 2.0;
    pmix[heaviest] = half;
    pmix.push(half);
    crate::data::MixtureState { comps, pmix }
}

/// Fit mixtures with an incremental number of components, stopping when the
/// criterion stops improving: first local minimum for AIC/BIC/DIC, or the
/// failure to reject H₀: elpd_K ≥ elpd_{K+1} (one-sided z-test at `alpha`)
/// for WAIC/LOOIC.
pub fn fit_incremental(
    base: &FitConfig,
    data: &AngleData,
    inc: &IncrementalConfig,
) -> Result<IncrementalResult> {
    if inc.start_ncomp == 0 || inc.max_ncomp < inc.start_ncomp {
        return Err(Error::config("need 1 <= start_ncomp <= max_ncomp"));
    }
    if !(0.0..1.0).contains(&inc.alpha) || inc.alpha <= 0.0 {
        return Err(Error::config("alpha must lie in (0, 1)"));
    }
    let z_crit = normal_quantile(1.0 - inc.alpha);

    let mut fits: Vec<FitResult> = Vec::new();
    let mut crits: Vec<CritValue> = Vec::new();
    let mut maxlliks: Vec<f64> = Vec::new();
    let mut ks: Vec<usize> = Vec::new();
    let mut best_index: Option<usize> = None;
    let mut converged = false;

    for k in inc.start_ncomp..=inc.max_ncomp {
        let mut cfg = base.clone();
        cfg.ncomp = k;
        let start = if inc.prev_par && k >= 3 && !fits.is_empty() {
            let prev = fits.last().unwrap();
            let est_src = if inc.use_best_chain {
                select_chains(prev, &[prev.best_chain()])?
            } else {
                prev.clone()
            };
            let map = pointest(&est_src, Reducer::Mode)?.state;
            Some(expand_state(&map))
        } else {
            None
        };
        let fit = fit_angmix(&cfg, data, start)?;
        let crit_src = if inc.use_best_chain {
            select_chains(&fit, &[fit.best_chain()])?
        } else {
            fit.clone()
        };
        let crit = criterion(&crit_src, inc.crit)?;
        let maxllik = max_loglik(&crit_src);
        fits.push(fit);
        crits.push(crit);
        maxlliks.push(maxllik);
        ks.push(k);

        let m = crits.len();
        if m >= 2 {
            let stop = if inc.crit.larger_is_better() {
                // H0K: elpd_K >= elpd_{K+1}; stop when not rejected.
                let cmp = elpd_compare(&crits[m - 2], &crits[m - 1])?;
                cmp.z <= z_crit
            } else {
                crits[m - 1].value >= crits[m - 2].value
            };
            if stop {
                best_index = Some(m - 2);
                converged = true;
                break;
            }
        }
    }

    let best_index = best_index.unwrap_or(crits.len() - 1);
    // Single fitted model (start == max): it is the best by construction.
    if crits.len() == 1 {
        converged = inc.start_ncomp == inc.max_ncomp;
    }
    Ok(IncrementalResult {
        fit_best: fits[best_index].clone(),
        ncomp_best: ks[best_index],
        crit_best: crits[best_index].clone(),
        maxllik_best: maxlliks[best_index],
        crit_all: crits,
        maxllik_all: maxlliks,
        ncomp_fitted: ks,
        converged,
        fit_all: if inc.return_all { Some(fits) } else { None },
    })
}
