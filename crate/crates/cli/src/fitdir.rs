//! On-disk fit format: a directory holding a versioned JSON manifest plus
//! CSV tables, readable back into a [`FitResult`] by this module.
//!
//! ```text
//! <dir>/manifest.json      version, config, prior, init state
//! <dir>/data.csv           the model-ready (wrapped) input angles
//! <dir>/samples.csv        chain,iteration,parameter,component,value
//! <dir>/allocations.csv    chain,iteration,observation,label
//! ```
//!
//! `samples.csv` carries one row per retained scalar draw (components are
//! 1-based); per-iteration rows use component 0: `loglik`, `lpd`, and one
//! `accepted` row per component.

use crate::cli_error::{CliError, CliResult};
use crate::io::{write_angles, write_json};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use torusmix::data::{ComponentParams, MixtureState};
use torusmix::mcmc::{ChainSamples, FitConfig, FitResult, PriorSpec};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub config: FitConfig,
    pub prior: PriorSpec,
    pub init: MixtureState<f64>,
    pub n_chains: usize,
    pub n_retained: usize,
    pub n_obs: usize,
    #[serde(default)]
    pub relabeled: bool,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::data(format!("'{}': {e}", path.display()))
}

/// Original iteration number of retained draw `idx` under the fit's burn-in
/// and thinning.
fn iteration_number(config: &FitConfig, idx: usize) -> usize {
    config.burnin_iters() + idx * config.thin
}

pub fn write_fit(dir: &Path, fit: &FitResult, relabeled: bool) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::data(format!("cannot create '{}': {e}", dir.display())))?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        config: fit.config.clone(),
        prior: fit.prior.clone(),
        init: fit.init.clone(),
        n_chains: fit.n_chains(),
        n_retained: fit.n_retained(),
        n_obs: fit.data.len(),
        relabeled,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    write_angles(&dir.join("data.csv"), &fit.data)?;

    let samples_path = dir.join("samples.csv");
    let mut w = csv::Writer::from_path(&samples_path)
        .map_err(csv_err(&samples_path))?;
    w.write_record(["chain", "iteration", "parameter", "component", "value"])
        .map_err(csv_err(&samples_path))?;
    let names = fit.kind().param_names();
    for (c, ch) in fit.chains.iter().enumerate() {
        for (s, state) in ch.states.iter().enumerate() {
            let iter = iteration_number(&fit.config, s);
            let mut row = |param: &str, comp: usize, value: f64| {
                w.write_record([
                    (c + 1).to_string(),
                    iter.to_string(),
                    param.to_string(),
                    comp.to_string(),
                    format!("{value}"),
                ])
            };
            for (j, comp) in state.comps.iter().enumerate() {
                row("pmix", j + 1, state.pmix[j]).map_err(csv_err(&samples_path))?;
                for (&name, &value) in names.iter().zip(comp.values(fit.kind()).iter()) {
                    row(name, j + 1, value).map_err(csv_err(&samples_path))?;
                }
            }
            row("loglik", 0, ch.loglik[s]).map_err(csv_err(&samples_path))?;
            row("lpd", 0, ch.lpd[s]).map_err(csv_err(&samples_path))?;
            for (j, &acc) in ch.accepted[s].iter().enumerate() {
                row("accepted", j + 1, if acc { 1.0 } else { 0.0 })
                    .map_err(csv_err(&samples_path))?;
            }
        }
    }
    w.flush()
        .map_err(|e| CliError::data(format!("flush samples.csv: {e}")))?;

    let alloc_path = dir.join("allocations.csv");
    let mut w = csv::Writer::from_path(&alloc_path).map_err(csv_err(&alloc_path))?;
    w.write_record(["chain", "iteration", "observation", "label"])
        .map_err(csv_err(&alloc_path))?;
    for (c, ch) in fit.chains.iter().enumerate() {
        for (s, alloc) in ch.allocations.iter().enumerate() {
            let iter = iteration_number(&fit.config, s);
            for (i, &l) in alloc.iter().enumerate() {
                w.write_record([
                    (c + 1).to_string(),
                    iter.to_string(),
                    (i + 1).to_string(),
                    (l + 1).to_string(),
                ])
                .map_err(csv_err(&alloc_path))?;
            }
        }
    }
    w.flush()
        .map_err(|e| CliError::data(format!("flush allocations.csv: {e}")))?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::data(format!("cannot read '{}': {e}", path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("'{}': {e}", path.display())))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(CliError::data(format!(
            "unsupported fit format version {}",
            manifest.format_version
        )));
    }
    Ok(manifest)
}

pub fn load_fit(dir: &Path) -> CliResult<FitResult> {
    let manifest = read_manifest(dir)?;
    let (data, _) = crate::io::read_angles(&dir.join("data.csv"), false)?;
    data.check_kind(manifest.config.model).map_err(CliError::from)?;
    let kind = manifest.config.model;
    let k = manifest.config.ncomp;
    let names = kind.param_names();

    // chain -> iteration -> (per-component parameter map, loglik, lpd, accepted)
    type DrawAcc = (Vec<BTreeMap<String, f64>>, Option<f64>, Option<f64>, Vec<bool>);
    let mut acc: BTreeMap<usize, BTreeMap<usize, DrawAcc>> = BTreeMap::new();
    let samples_path = dir.join("samples.csv");
    let mut rdr = csv::Reader::from_path(&samples_path).map_err(csv_err(&samples_path))?;
    for record in rdr.records() {
        let record = record.map_err(csv_err(&samples_path))?;
        let parse = |i: usize| -> CliResult<f64> {
            record
                .get(i)
                .ok_or_else(|| CliError::data("short samples.csv row"))?
                .parse::<f64>()
                .map_err(|e| CliError::data(format!("samples.csv: {e}")))
        };
        let chain = parse(0)? as usize;
        let iteration = parse(1)? as usize;
        let param = record.get(2).unwrap_or_default().to_string();
        let comp = parse(3)? as usize;
        let value = parse(4)?;
        let slot = acc
            .entry(chain)
            .or_default()
            .entry(iteration)
            .or_insert_with(|| (vec![BTreeMap::new(); k], None, None, vec![false; k]));
        match param.as_str() {
            "loglik" => slot.1 = Some(value),
            "lpd" => slot.2 = Some(value),
            "accepted" => {
                if comp == 0 || comp > k {
                    return Err(CliError::data("accepted row with bad component"));
                }
                slot.3[comp - 1] = value != 0.0;
            }
            name => {
                if comp == 0 || comp > k {
                    return Err(CliError::data(format!("row for '{name}' with bad component")));
                }
                slot.0[comp - 1].insert(name.to_string(), value);
            }
        }
    }

    // Allocations.
    let alloc_path = dir.join("allocations.csv");
    let mut alloc_acc: BTreeMap<usize, BTreeMap<usize, Vec<u32>>> = BTreeMap::new();
    let mut rdr = csv::Reader::from_path(&alloc_path).map_err(csv_err(&alloc_path))?;
    for record in rdr.records() {
        let record = record.map_err(csv_err(&alloc_path))?;
        let get = |i: usize| -> CliResult<usize> {
            record
                .get(i)
                .ok_or_else(|| CliError::data("short allocations.csv row"))?
                .parse::<usize>()
                .map_err(|e| CliError::data(format!("allocations.csv: {e}")))
        };
        let (chain, iteration, obs, label) = (get(0)?, get(1)?, get(2)?, get(3)?);
        let v = alloc_acc
            .entry(chain)
            .or_default()
            .entry(iteration)
            .or_insert_with(|| vec![0; manifest.n_obs]);
        if obs == 0 || obs > manifest.n_obs || label == 0 || label > k {
            return Err(CliError::data("allocations.csv row out of range"));
        }
        v[obs - 1] = (label - 1) as u32;
    }

    let mut chains = Vec::with_capacity(manifest.n_chains);
    for c in 1..=manifest.n_chains {
        let draws = acc
            .remove(&c)
            .ok_or_else(|| CliError::data(format!("samples.csv missing chain {c}")))?;
        let allocs = alloc_acc
            .remove(&c)
            .ok_or_else(|| CliError::data(format!("allocations.csv missing chain {c}")))?;
        let mut ch = ChainSamples {
            states: Vec::with_capacity(draws.len()),
            allocations: Vec::with_capacity(draws.len()),
            loglik: Vec::new(),
            lpd: Vec::new(),
            accepted: Vec::new(),
            tuning_history: Vec::new(),
            final_epsilon: Vec::new(),
            final_propscale: Vec::new(),
        };
        for (iteration, (params, loglik, lpd, accepted)) in draws {
            let mut comps = Vec::with_capacity(k);
            let mut pmix = Vec::with_capacity(k);
            for map in &params {
                let get = |n: &str| -> CliResult<f64> {
                    map.get(n).copied().ok_or_else(|| {
                        CliError::data(format!("samples.csv missing '{n}' at iteration {iteration}"))
                    })
                };
                pmix.push(get("pmix")?);
                let values: Vec<f64> = names
                    .iter()
                    .map(|n| get(n))
                    .collect::<CliResult<Vec<_>>>()?;
                comps.push(
                    ComponentParams::from_values(kind, &values).map_err(CliError::from)?,
                );
            }
            ch.states.push(MixtureState { comps, pmix });
            ch.loglik
                .push(loglik.ok_or_else(|| CliError::data("missing loglik row"))?);
            ch.lpd
                .push(lpd.ok_or_else(|| CliError::data("missing lpd row"))?);
            ch.accepted.push(accepted);
            let alloc = allocs
                .get(&iteration)
                .ok_or_else(|| CliError::data(format!("missing allocation at {iteration}")))?;
            ch.allocations.push(alloc.clone());
        }
        if ch.states.len() != manifest.n_retained {
            return Err(CliError::data(format!(
                "chain {c}: expected {} retained draws, found {}",
                manifest.n_retained,
                ch.states.len()
            )));
        }
        chains.push(ch);
    }

    Ok(FitResult {
        config: manifest.config,
        prior: manifest.prior,
        data,
        init: manifest.init,
        chains,
    })
}
