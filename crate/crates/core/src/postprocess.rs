//! Post-processing of fits: extra burn-in/thinning, chain subsetting,
//! label-switching repair, point and interval estimation, latent allocation,
//! and density evaluation / random generation from a fitted model.

use crate::data::{AngleData, MixtureState};
use crate::densities::MixtureDensity;
use crate::error::{Error, Result};
use crate::mcmc::{apply_permutation, FitResult};
use crate::scalar::wrap_angle;
use rand::Rng;

/// Point-estimator choice: posterior mean (circular for the angles) or the
/// MCMC-based approximate MAP (the retained draw maximizing the recorded
/// log posterior density).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reducer {
    Mean,
    Mode,
}

impl Reducer {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(Reducer::Mean),
            "mode" | "map" => Ok(Reducer::Mode),
            other => Err(Error::config(format!("unknown point estimator '{other}'"))),
        }
    }
}

/// A point estimate of the full mixture state.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub reducer: Reducer,
    pub state: MixtureState<f64>,
}

/// Central credible bounds for one scalar parameter of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamInterval {
    pub param: String,
    pub component: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Per-parameter quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamQuantiles {
    pub param: String,
    pub component: usize,
    pub values: Vec<f64>,
}

/// Drop a leading fraction of the retained draws and keep every k-th of the
/// remainder, per chain.
pub fn add_burnin_thin(
    fit: &FitResult,
    extra_burnin_prop: f64,
    extra_thin: usize,
) -> Result<FitResult> {
    if !(0.0..1.0).contains(&extra_burnin_prop) {
        return Err(Error::config("extra burn-in proportion must lie in [0, 1)"));
    }
    if extra_thin == 0 {
        return Err(Error::config("extra thin must be >= 1"));
    }
    let mut out = fit.clone();
    for ch in &mut out.chains {
        let n = ch.states.len();
        let drop = (n as f64 * extra_burnin_prop).floor() as usize;
        if drop >= n {
            return Err(Error::config("extra burn-in would drop every retained draw"));
        }
        let keep: Vec<usize> = (drop..n).step_by(extra_thin).collect();
        ch.states = keep.iter().map(|&i| ch.states[i].clone()).collect();
        ch.allocations = keep.iter().map(|&i| ch.allocations[i].clone()).collect();
        ch.accepted = keep.iter().map(|&i| ch.accepted[i].clone()).collect();
        ch.loglik = keep.iter().map(|&i| ch.loglik[i]).collect();
        ch.lpd = keep.iter().map(|&i| ch.lpd[i]).collect();
    }
    Ok(out)
}

/// Keep only the listed chains (0-based ids, in the order given).
pub fn select_chains(fit: &FitResult, ids: &[usize]) -> Result<FitResult> {
    if ids.is_empty() {
        return Err(Error::config("select_chains needs at least one chain id"));
    }
    let mut out = fit.clone();
    out.chains = ids
        .iter()
        .map(|&i| {
            fit.chains
                .get(i)
                .cloned()
                .ok_or_else(|| Error::config(format!("unknown chain id {i}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(out)
}

/// Minimum-cost assignment by the Hungarian algorithm with potentials.
/// `cost[l][j]` is the cost of putting original component l into slot j;
/// returns `perm` with `perm[j] = l`.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    const BIG: f64 = 1e18;
    let at = |l: usize, j: usize, c: &[Vec<f64>]| c[l][j].min(BIG);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = at(i0 - 1, j - 1, cost) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[j - 1] = p[j] - 1;
    }
    perm
}

/// Outcome flags of a relabeling pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelReport {
    pub converged: bool,
    pub sweeps: usize,
}

/// Membership matrices of every retained draw of one chain, stored in f32 to
/// keep the memory footprint of long chains manageable.
fn membership_matrices(fit: &FitResult, chain: usize) -> Result<Vec<Vec<f32>>> {
    let n = fit.data.len();
    let k = fit.n_comp();
    let cfg = fit.eval_config();
    let mut out = Vec::with_capacity(fit.chains[chain].states.len());
    for state in &fit.chains[chain].states {
        let mix = MixtureDensity::new(fit.kind(), state, cfg)?;
        let mut mat = vec![0.0f32; n * k];
        for i in 0..n {
            let probs = mix.membership(fit.data.row(i))?;
            for j in 0..k {
                mat[i * k + j] = probs[j] as f32;
            }
        }
        out.push(mat);
    }
    Ok(out)
}

/// KL cost matrix of one draw against a reference average Q̄:
/// cost[l][j] = Σ_i p_il (ln p_il − ln q̄_ij).
fn kl_cost(p: &[f32], qbar: &[f64], n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut cost = vec![vec![0.0f64; k]; k];
    for i in 0..n {
        for l in 0..k {
            let pil = p[i * k + l] as f64;
            if pil <= 0.0 {
                continue;
            }
            let lp = pil.ln();
            for j in 0..k {
                let q = qbar[i * k + j].max(1e-300);
                cost[l][j] += pil * (lp - q.ln());
            }
        }
    }
    cost
}

fn average_permuted(mats: &[Vec<f32>], perms: &[Vec<usize>], n: usize, k: usize) -> Vec<f64> {
    let mut q = vec![0.0f64; n * k];
    for (m, perm) in mats.iter().zip(perms) {
        for i in 0..n {
            for j in 0..k {
                q[i * k + j] += m[i * k + perm[j]] as f64;
            }
        }
    }
    let s = mats.len() as f64;
    q.iter_mut().for_each(|x| *x /= s);
    q
}

/// Undo label switching by the Kullback-Leibler relabeling scheme: per chain,
/// alternate Hungarian assignments of each draw's membership matrix against
/// the running average until no permutation changes (or 100 sweeps), then
/// align all chains to the first chain's average.
pub fn fix_label(fit: &FitResult) -> Result<(FitResult, RelabelReport)> {
    let k = fit.n_comp();
    if k < 2 {
        return Ok((
            fit.clone(),
            RelabelReport {
                converged: true,
                sweeps: 0,
            },
        ));
    }
    let n = fit.data.len();
    let mut out = fit.clone();
    let mut report = RelabelReport {
        converged: true,
        sweeps: 0,
    };
    let mut chain_averages: Vec<Vec<f64>> = Vec::with_capacity(fit.n_chains());

    for c in 0..fit.n_chains() {
        let mats = membership_matrices(fit, c)?;
        let s = mats.len();
        let identity: Vec<usize> = (0..k).collect();
        let mut perms: Vec<Vec<usize>> = vec![identity.clone(); s];
        let mut qbar = average_permuted(&mats, &perms, n, k);
        let mut converged = false;
        let mut sweeps = 0usize;
        while sweeps < 100 {
            sweeps += 1;
            let mut changed = false;
            for (m, perm) in mats.iter().zip(perms.iter_mut()) {
                // cost[l][j]: original component l into slot j. The draw's
                // matrix column perm'd by the CANDIDATE permutation must
                // approach qbar, so cost compares column l against column j
                // of the average.
                let cost = kl_cost(m, &qbar, n, k);
                let new_perm = hungarian(&cost);
                if new_perm != *perm {
                    *perm = new_perm;
                    changed = true;
                }
            }
            qbar = average_permuted(&mats, &perms, n, k);
            if !changed {
                converged = true;
                break;
            }
        }
        report.converged &= converged;
        report.sweeps = report.sweeps.max(sweeps);
        apply_chain_perms(&mut out, c, &perms);
        chain_averages.push(qbar);
    }

    // Cross-chain alignment to the first chain's average.
    for c in 1..fit.n_chains() {
        let avg32: Vec<f32> = chain_averages[c].iter().map(|&x| x as f32).collect();
        let cost = kl_cost(&avg32, &chain_averages[0], n, k);
        let perm = hungarian(&cost);
        if perm.iter().enumerate().any(|(j, &l)| j != l) {
            let s = out.chains[c].states.len();
            apply_chain_perms(&mut out, c, &vec![perm; s]);
        }
    }
    Ok((out, report))
}

fn apply_chain_perms(fit: &mut FitResult, chain: usize, perms: &[Vec<usize>]) {
    let ch = &mut fit.chains[chain];
    for (s, perm) in perms.iter().enumerate() {
        if perm.iter().enumerate().all(|(j, &l)| j == l) {
            continue;
        }
        apply_permutation(&mut ch.states[s], &mut ch.allocations[s], &mut [], perm);
        let old = ch.accepted[s].clone();
        for (j, &l) in perm.iter().enumerate() {
            ch.accepted[s][j] = old[l];
        }
    }
}

/// Point estimate of the mixture state: coordinate-wise posterior mean with
/// circular averaging of the angles, or the maximum-LPD draw.
pub fn pointest(fit: &FitResult, reducer: Reducer) -> Result<PointEstimate> {
    if fit.n_retained() == 0 {
        return Err(Error::config("no retained draws"));
    }
    let state = match reducer {
        Reducer::Mode => {
            let mut best: Option<(f64, &MixtureState<f64>)> = None;
            for (c, s, state) in fit.iter_states() {
                let lpd = fit.chains[c].lpd[s];
                if best.is_none_or(|(b, _)| lpd > b) {
                    best = Some((lpd, state));
                }
            }
            best.expect("nonempty").1.clone()
        }
        Reducer::Mean => mean_state(fit)?,
    };
    Ok(PointEstimate { reducer, state })
}

fn mean_state(fit: &FitResult) -> Result<MixtureState<f64>> {
    let k = fit.n_comp();
    let biv = fit.kind().is_bivariate();
    let mut count = 0.0f64;
    let mut pmix = vec![0.0f64; k];
    let mut kappas = vec![[0.0f64; 3]; k];
    let mut mu_vec = vec![[0.0f64; 4]; k]; // (sin, cos) per angle
    for (_, _, state) in fit.iter_states() {
        count += 1.0;
        for j in 0..k {
            pmix[j] += state.pmix[j];
            kappas[j][0] += state.comps[j].kappa1;
            kappas[j][1] += state.comps[j].kappa2;
            kappas[j][2] += state.comps[j].kappa3;
            mu_vec[j][0] += state.comps[j].mu1.sin();
            mu_vec[j][1] += state.comps[j].mu1.cos();
            mu_vec[j][2] += state.comps[j].mu2.sin();
            mu_vec[j][3] += state.comps[j].mu2.cos();
        }
    }
    let mut comps = Vec::with_capacity(k);
    for j in 0..k {
        let mu1 = wrap_angle(mu_vec[j][0].atan2(mu_vec[j][1]));
        let mu2 = wrap_angle(mu_vec[j][2].atan2(mu_vec[j][3]));
        comps.push(if biv {
            crate::data::ComponentParams::bivariate(
                mu1,
                mu2,
                kappas[j][0] / count,
                kappas[j][1] / count,
                kappas[j][2] / count,
            )
        } else {
            crate::data::ComponentParams::univariate(mu1, kappas[j][0] / count)
        });
    }
    let total: f64 = pmix.iter().sum();
    let pmix: Vec<f64> = pmix.iter().map(|p| p / total).collect();
    MixtureState::new(comps, pmix)
}

/// Apply a custom scalar reducer to every parameter's pooled draws. Angles
/// are passed through raw; the mixing proportions are renormalized so the
/// result is a valid state.
pub fn pointest_reduce(fit: &FitResult, f: impl Fn(&[f64]) -> f64) -> Result<PointEstimate> {
    let k = fit.n_comp();
    let biv = fit.kind().is_bivariate();
    let series = |get: &dyn Fn(&MixtureState<f64>) -> f64| -> Vec<f64> {
        fit.iter_states().map(|(_, _, s)| get(s)).collect()
    };
    let mut comps = Vec::with_capacity(k);
    let mut pmix = Vec::with_capacity(k);
    for j in 0..k {
        let k1 = f(&series(&|s| s.comps[j].kappa1));
        let mu1 = f(&series(&|s| s.comps[j].mu1));
        if biv {
            let k2 = f(&series(&|s| s.comps[j].kappa2));
            let k3 = f(&series(&|s| s.comps[j].kappa3));
            let mu2 = f(&series(&|s| s.comps[j].mu2));
            comps.push(crate::data::ComponentParams::bivariate(mu1, mu2, k1, k2, k3));
        } else {
            comps.push(crate::data::ComponentParams::univariate(mu1, k1));
        }
        pmix.push(f(&series(&|s| s.pmix[j])));
    }
    let total: f64 = pmix.iter().sum();
    if total <= 0.0 {
        return Err(Error::degenerate("reducer produced non-positive weights"));
    }
    let pmix: Vec<f64> = pmix.iter().map(|p| p / total).collect();
    Ok(PointEstimate {
        reducer: Reducer::Mean,
        state: MixtureState::new(comps, pmix)?,
    })
}

/// Type-7 (linear interpolation) sample quantile of unsorted data.
pub fn quantile_type7(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("quantile probability must lie in [0, 1]"));
    }
    let mut xs = values.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (xs.len() as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(xs.len() - 1);
    Ok(xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo]))
}

pub(crate) fn param_series(fit: &FitResult, param: &str, comp: usize) -> Vec<f64> {
    fit.iter_states()
        .map(|(_, _, s)| match param {
            "pmix" => s.pmix[comp],
            "kappa" | "kappa1" => s.comps[comp].kappa1,
            "kappa2" => s.comps[comp].kappa2,
            "kappa3" => s.comps[comp].kappa3,
            "mu" | "mu1" => s.comps[comp].mu1,
            "mu2" => s.comps[comp].mu2,
            _ => f64::NAN,
        })
        .collect()
}

/// All parameter names of the fit, mixing proportion first.
pub fn fit_param_names(fit: &FitResult) -> Vec<&'static str> {
    let mut names = vec!["pmix"];
    names.extend_from_slice(fit.kind().param_names());
    names
}

/// Pooled per-parameter quantiles at the given probabilities.
pub fn quantiles(fit: &FitResult, probs: &[f64]) -> Result<Vec<ParamQuantiles>> {
    let mut out = Vec::new();
    for &name in &fit_param_names(fit) {
        for comp in 0..fit.n_comp() {
            let series = param_series(fit, name, comp);
            let values = probs
                .iter()
                .map(|&p| quantile_type7(&series, p))
                .collect::<Result<Vec<_>>>()?;
            out.push(ParamQuantiles {
                param: name.to_string(),
                component: comp,
                values,
            });
        }
    }
    Ok(out)
}

/// Central (1 − a) credible intervals for every parameter.
pub fn credible_interval(fit: &FitResult, a: f64) -> Result<Vec<ParamInterval>> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::config("credible level requires a in [0, 1)"));
    }
    let qs = quantiles(fit, &[a / 2.0, 1.0 - a / 2.0])?;
    Ok(qs
        .into_iter()
        .map(|q| ParamInterval {
            param: q.param,
            component: q.component,
            lower: q.values[0],
            upper: q.values[1],
        })
        .collect())
}

/// Classify each observation by its largest posterior membership probability
/// at the point estimate (MAP by default); ties break to the lowest index.
pub fn latent_allocation(fit: &FitResult, reducer: Reducer) -> Result<Vec<u32>> {
    let est = pointest(fit, reducer)?;
    let mix = MixtureDensity::new(fit.kind(), &est.state, fit.eval_config())?;
    let mut labels = Vec::with_capacity(fit.data.len());
    for i in 0..fit.data.len() {
        let probs = mix.membership(fit.data.row(i))?;
        let mut best = 0usize;
        for (j, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = j;
            }
        }
        labels.push(best as u32);
    }
    Ok(labels)
}

/// log density of the fitted mixture (at the point estimate) at ψ.
pub fn d_fitted(psi: &[f64], fit: &FitResult, reducer: Reducer) -> Result<f64> {
    let est = pointest(fit, reducer)?;
    crate::densities::mixture_logpdf(fit.kind(), &est.state, psi, fit.eval_config())
}

/// Random draws from the fitted mixture (at the point estimate).
pub fn r_fitted<R: Rng>(
    n: usize,
    fit: &FitResult,
    reducer: Reducer,
    rng: &mut R,
) -> Result<AngleData> {
    let est = pointest(fit, reducer)?;
    crate::sampling::rmix_data(n, fit.kind(), &est.state, rng)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::data::{ComponentParams, ModelKind};
    use crate::mcmc::{ChainSamples, FitConfig, PriorSpec};

    /// Hand-built fit with the given per-chain (states, lpd) draws, for unit
    /// testing the post-processing machinery without running MCMC.
    pub(crate) fn synthetic_fit(
        kind: ModelKind,
        data: AngleData,
        chains: Vec<(Vec<MixtureState<f64>>, Vec<f64>)>,
    ) -> FitResult {
        let k = chains[0].0[0].n_comp();
        let mut config = FitConfig::new(kind, k);
        config.n_chains = chains.len();
        let n = data.len();
        let chains = chains
            .into_iter()
            .map(|(states, lpd)| {
                let s = states.len();
                ChainSamples {
                    allocations: vec![vec![0; n]; s],
                    loglik: lpd.clone(),
                    lpd,
                    accepted: vec![vec![true; k]; s],
                    tuning_history: Vec::new(),
                    final_epsilon: vec![0.1; k],
                    final_propscale: vec![vec![0.1; 2]; k],
                    states,
                }
            })
            .collect();
        FitResult {
            prior: PriorSpec::default_for(kind),
            init: MixtureState::new(
                vec![ComponentParams::univariate(0.0, 1.0); k],
                vec![1.0 / k as f64; k],
            )
            .unwrap(),
            config,
            data,
            chains,
        }
    }

    fn two_comp_state(mu1: f64, mu2: f64, w: f64) -> MixtureState<f64> {
        MixtureState::new(
            vec![
                ComponentParams::univariate(mu1, 8.0),
                ComponentParams::univariate(mu2, 4.0),
            ],
            vec![w, 1.0 - w],
        )
        .unwrap()
    }

    #[test]
    fn add_burnin_thin_identity() {
        let states: Vec<_> = (0..10)
            .map(|i| two_comp_state(1.0, 4.0, 0.3 + 0.01 * i as f64))
            .collect();
        let lpd: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(states.clone(), lpd)],
        );
        let same = add_burnin_thin(&fit, 0.0, 1).unwrap();
        assert_eq!(same.chains[0].states, states);
    }

    #[test]
    fn add_burnin_thin_keeps_trailing_half() {
        for n in [10usize, 11] {
            let states: Vec<_> = (0..n).map(|_| two_comp_state(1.0, 4.0, 0.5)).collect();
            let lpd: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let fit = synthetic_fit(
                ModelKind::Vm,
                AngleData::Univariate(vec![1.0, 4.0]),
                vec![(states, lpd)],
            );
            let half = add_burnin_thin(&fit, 0.5, 1).unwrap();
            assert_eq!(half.chains[0].states.len(), n.div_ceil(2));
            assert_eq!(half.chains[0].lpd[0] as usize, n / 2);
        }
    }

    #[test]
    fn add_burnin_thin_index_arithmetic() {
        // 1000 draws, drop a quarter, keep every 4th: 188 draws starting at
        // 0-based retained index 250.
        let states: Vec<_> = (0..1000).map(|_| two_comp_state(1.0, 4.0, 0.5)).collect();
        let lpd: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(states, lpd)],
        );
        let sub = add_burnin_thin(&fit, 0.25, 4).unwrap();
        assert_eq!(sub.chains[0].states.len(), 188);
        assert_eq!(sub.chains[0].lpd[0], 250.0);
        assert_eq!(sub.chains[0].lpd[1], 254.0);
        assert_eq!(*sub.chains[0].lpd.last().unwrap(), 998.0);
        assert!(add_burnin_thin(&fit, 2.0, 1).is_err());
    }

    #[test]
    fn select_chains_subsets_and_validates() {
        let mk = |v: f64| (vec![two_comp_state(1.0, 4.0, 0.5)], vec![v]);
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![mk(0.0), mk(1.0), mk(2.0)],
        );
        let all = select_chains(&fit, &[0, 1, 2]).unwrap();
        assert_eq!(all.chains.len(), 3);
        let one = select_chains(&fit, &[1]).unwrap();
        assert_eq!(one.chains[0].lpd[0], 1.0);
        assert!(select_chains(&fit, &[3]).is_err());
    }

    #[test]
    fn pointest_single_draw_is_identity() {
        let s = two_comp_state(1.0, 4.0, 0.3);
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(vec![s.clone()], vec![0.0])],
        );
        // Mode clones the draw exactly; Mean round-trips the angles through
        // sin/cos, so compare within float tolerance.
        assert_eq!(pointest(&fit, Reducer::Mode).unwrap().state, s);
        let mean = pointest(&fit, Reducer::Mean).unwrap().state;
        for (a, b) in mean.comps.iter().zip(&s.comps) {
            assert!((a.mu1 - b.mu1).abs() < 1e-12);
            assert!((a.kappa1 - b.kappa1).abs() < 1e-12);
        }
        for (a, b) in mean.pmix.iter().zip(&s.pmix) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pointest_mean_uses_circular_averaging() {
        // Means straddling the wrap point: 0.1 and 2π − 0.1 average to ~0.
        let a = two_comp_state(0.1, 4.0, 0.5);
        let b = two_comp_state(std::f64::consts::TAU - 0.1, 4.0, 0.5);
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(vec![a, b], vec![0.0, 0.0])],
        );
        let est = pointest(&fit, Reducer::Mean).unwrap();
        let mu = est.state.comps[0].mu1;
        assert!(mu < 1e-10 || std::f64::consts::TAU - mu < 1e-10);
        assert!((est.state.comps[0].kappa1 - 8.0).abs() < 1e-12);
        assert!((est.state.pmix[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pointest_mode_takes_max_lpd_draw() {
        let a = two_comp_state(1.0, 4.0, 0.2);
        let b = two_comp_state(2.0, 5.0, 0.7);
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(vec![a, b.clone()], vec![-5.0, -1.0])],
        );
        assert_eq!(pointest(&fit, Reducer::Mode).unwrap().state, b);
    }

    #[test]
    fn pointest_mode_invariant_to_label_permutation() {
        let a = two_comp_state(1.0, 4.0, 0.2);
        let b = two_comp_state(2.0, 5.0, 0.7);
        let fit1 = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(vec![a.clone(), b.clone()], vec![-5.0, -1.0])],
        );
        let fit2 = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(vec![a.permuted(&[1, 0]), b.clone()], vec![-5.0, -1.0])],
        );
        assert_eq!(
            pointest(&fit1, Reducer::Mode).unwrap().state,
            pointest(&fit2, Reducer::Mode).unwrap().state
        );
    }

    #[test]
    fn pointest_with_custom_reducer() {
        // Median reducer over three draws; weights renormalized.
        let states = vec![
            two_comp_state(1.0, 4.0, 0.2),
            two_comp_state(1.1, 4.1, 0.3),
            two_comp_state(1.2, 4.2, 0.7),
        ];
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(states, vec![0.0; 3])],
        );
        let med = pointest_reduce(&fit, |xs| quantile_type7(xs, 0.5).unwrap()).unwrap();
        assert!((med.state.comps[0].mu1 - 1.1).abs() < 1e-12);
        let total: f64 = med.state.pmix.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantiles_match_sorted_index_formula() {
        let values: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        assert_eq!(quantile_type7(&values, 0.5).unwrap(), 50.0);
        assert_eq!(quantile_type7(&values, 0.025).unwrap(), 2.5);
        assert_eq!(quantile_type7(&values, 1.0).unwrap(), 100.0);
        let constant = vec![3.3; 10];
        assert_eq!(quantile_type7(&constant, 0.025).unwrap(), 3.3);
        assert_eq!(quantile_type7(&constant, 0.975).unwrap(), 3.3);
    }

    #[test]
    fn credible_interval_brackets_mean_for_monotone_draws() {
        let states: Vec<_> = (0..101)
            .map(|i| two_comp_state(1.0 + 0.001 * i as f64, 4.0, 0.5))
            .collect();
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(states, vec![0.0; 101])],
        );
        let iv = credible_interval(&fit, 0.05).unwrap();
        let mu_iv = iv
            .iter()
            .find(|p| p.param == "mu" && p.component == 0)
            .unwrap();
        let mean = pointest(&fit, Reducer::Mean).unwrap().state.comps[0].mu1;
        assert!(mu_iv.lower <= mean && mean <= mu_iv.upper);
        assert!(mu_iv.lower <= mu_iv.upper);
    }

    #[test]
    fn hungarian_identity_and_swap() {
        let id = hungarian(&[vec![0.0, 5.0], vec![5.0, 0.0]]);
        assert_eq!(id, vec![0, 1]);
        let swap = hungarian(&[vec![5.0, 0.0], vec![0.0, 5.0]]);
        assert_eq!(swap, vec![1, 0]);
        let c = vec![
            vec![10.0, 0.0, 10.0],
            vec![10.0, 10.0, 0.0],
            vec![0.0, 10.0, 10.0],
        ];
        let p = hungarian(&c);
        assert_eq!(p, vec![2, 0, 1]);
    }

    #[test]
    fn fix_label_restores_injected_permutations() {
        // 40 draws of a well-separated state; permute a minority subset at
        // known positions and recover them exactly.
        let base = two_comp_state(1.0, 4.5, 0.3);
        let swapped = base.permuted(&[1, 0]);
        let mut states = vec![base.clone(); 40];
        for &i in &[3usize, 11, 27] {
            states[i] = swapped.clone();
        }
        let data = AngleData::Univariate(vec![0.9, 1.1, 4.4, 4.6, 1.0, 4.5]);
        let fit = synthetic_fit(ModelKind::Vm, data, vec![(states, vec![0.0; 40])]);
        let before: Vec<f64> = (0..40)
            .map(|s| {
                crate::densities::mixture_logpdf(
                    ModelKind::Vm,
                    &fit.chains[0].states[s],
                    &[1.0],
                    fit.eval_config(),
                )
                .unwrap()
            })
            .collect();
        let (fixed, report) = fix_label(&fit).unwrap();
        assert!(report.converged);
        for (s, want) in before.iter().enumerate() {
            assert_eq!(fixed.chains[0].states[s], base, "draw {s} not restored");
            let after = crate::densities::mixture_logpdf(
                ModelKind::Vm,
                &fixed.chains[0].states[s],
                &[1.0],
                fit.eval_config(),
            )
            .unwrap();
            assert!((after - want).abs() < 1e-12);
        }
    }

    #[test]
    fn fix_label_aligns_across_chains() {
        let base = two_comp_state(1.0, 4.5, 0.3);
        let swapped = base.permuted(&[1, 0]);
        let data = AngleData::Univariate(vec![0.9, 1.1, 4.4, 4.6]);
        let fit = synthetic_fit(
            ModelKind::Vm,
            data,
            vec![
                (vec![base.clone(); 10], vec![0.0; 10]),
                (vec![swapped; 10], vec![0.0; 10]),
            ],
        );
        let (fixed, _) = fix_label(&fit).unwrap();
        for s in 0..10 {
            assert_eq!(fixed.chains[1].states[s], base);
        }
    }

    #[test]
    fn fix_label_identity_on_aligned_fit() {
        let base = two_comp_state(1.0, 4.5, 0.3);
        let data = AngleData::Univariate(vec![0.9, 1.1, 4.4, 4.6]);
        let fit = synthetic_fit(ModelKind::Vm, data, vec![(vec![base; 15], vec![0.0; 15])]);
        let (fixed, report) = fix_label(&fit).unwrap();
        assert!(report.converged);
        assert_eq!(fixed.chains, fit.chains);
    }

    #[test]
    fn latent_allocation_ties_break_low() {
        let state = MixtureState::new(
            vec![
                ComponentParams::univariate(2.0, 3.0),
                ComponentParams::univariate(2.0, 3.0),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 2.0, 3.0]),
            vec![(vec![state], vec![0.0])],
        );
        let labels = latent_allocation(&fit, Reducer::Mode).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn latent_allocation_separated_clusters() {
        let state = two_comp_state(1.0, 4.5, 0.5);
        let data = AngleData::Univariate(vec![0.9, 1.1, 1.0, 4.4, 4.6, 4.5]);
        let fit = synthetic_fit(ModelKind::Vm, data, vec![(vec![state], vec![0.0])]);
        let labels = latent_allocation(&fit, Reducer::Mode).unwrap();
        assert_eq!(&labels[..], &[0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn d_fitted_equals_mixture_logpdf_at_estimate() {
        let state = two_comp_state(1.0, 4.5, 0.4);
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(vec![state.clone()], vec![0.0])],
        );
        let d = d_fitted(&[2.0], &fit, Reducer::Mode).unwrap();
        let want =
            crate::densities::mixture_logpdf(ModelKind::Vm, &state, &[2.0], fit.eval_config())
                .unwrap();
        assert_eq!(d, want);
    }

    #[test]
    fn r_fitted_reproducible() {
        use crate::sampling::RngStream;
        let state = two_comp_state(1.0, 4.5, 0.4);
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(vec![state], vec![0.0])],
        );
        let a = r_fitted(100, &fit, Reducer::Mode, &mut RngStream::new(5, 1).rng()).unwrap();
        let b = r_fitted(100, &fit, Reducer::Mode, &mut RngStream::new(5, 1).rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn r_fitted_histogram_consistent_with_d_fitted() {
        use crate::sampling::RngStream;
        let state = two_comp_state(1.0, 4.5, 0.4);
        let fit = synthetic_fit(
            ModelKind::Vm,
            AngleData::Univariate(vec![1.0, 4.0]),
            vec![(vec![state], vec![0.0])],
        );
        let draws = r_fitted(100_000, &fit, Reducer::Mode, &mut RngStream::new(6, 1).rng())
            .unwrap();
        let xs = match draws {
            AngleData::Univariate(v) => v,
            _ => unreachable!(),
        };
        let bins = 40;
        let h = std::f64::consts::TAU / bins as f64;
        let mut counts = vec![0.0; bins];
        for x in &xs {
            counts[((x / h) as usize).min(bins - 1)] += 1.0 / xs.len() as f64;
        }
        let mut tv = 0.0;
        for (b, &c) in counts.iter().enumerate() {
            // Cell mass of the fitted density by midpoint subdivision.
            let mut mass = 0.0;
            for s in 0..8 {
                let x = b as f64 * h + (s as f64 + 0.5) * h / 8.0;
                mass += d_fitted(&[x], &fit, Reducer::Mode).unwrap().exp() * h / 8.0;
            }
            tv += (c - mass).abs();
        }
        tv *= 0.5;
        assert!(tv < 0.03, "TV distance {tv}");
    }
}
