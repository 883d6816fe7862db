//! CSV/JSON input and output helpers.

use crate::cli_error::{CliError, CliResult};
use serde::Deserialize;
use std::path::Path;
use torusmix::data::{AngleData, ComponentParams, MixtureState, ModelKind};

/// Read a 1- or 2-column numeric CSV of angles. Values are interpreted in
/// radians (degrees with `degrees = true`) and reduced mod 2π; returns the
/// data plus how many values fell outside [0, 2π) before wrapping.
pub fn read_angles(path: &Path, degrees: bool) -> CliResult<(AngleData, usize)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read '{}': {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(mut values) => {
                if degrees {
                    for v in &mut values {
                        *v = v.to_radians();
                    }
                }
                rows.push(values);
            }
            Err(_) if lineno == 0 => continue, // header line
            Err(e) => {
                return Err(CliError::data(format!(
                    "'{}' line {}: not numeric: {e}",
                    path.display(),
                    lineno + 1
                )));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::data(format!("'{}' holds no data rows", path.display())));
    }
    let width = rows[0].len();
    if width == 0 || width > 2 {
        return Err(CliError::data(format!(
            "'{}' must have 1 or 2 numeric columns, found {width}",
            path.display()
        )));
    }
    if rows.iter().any(|r| r.len() != width) {
        return Err(CliError::data(format!(
            "'{}' has rows of inconsistent width",
            path.display()
        )));
    }
    Ok(if width == 1 {
        AngleData::from_raw_univariate(rows.into_iter().map(|r| r[0]).collect())
    } else {
        AngleData::from_raw_bivariate(rows.into_iter().map(|r| [r[0], r[1]]).collect())
    })
}

/// Write angles as CSV with a `psi1[,psi2]` header.
pub fn write_angles(path: &Path, data: &AngleData) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::data(format!("cannot write '{}': {e}", path.display())))?;
    let io_err = |e: csv::Error| CliError::data(format!("write '{}': {e}", path.display()));
    match data {
        AngleData::Univariate(v) => {
            w.write_record(["psi1"]).map_err(io_err)?;
            for x in v {
                w.write_record([format!("{x}")]).map_err(io_err)?;
            }
        }
        AngleData::Bivariate(v) => {
            w.write_record(["psi1", "psi2"]).map_err(io_err)?;
            for r in v {
                w.write_record([format!("{}", r[0]), format!("{}", r[1])])
                    .map_err(io_err)?;
            }
        }
    }
    w.flush()
        .map_err(|e| CliError::data(format!("flush '{}': {e}", path.display())))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::numeric(format!("serialize JSON: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::data(format!("cannot write '{}': {e}", path.display())))
}

/// Model parameter file: a model kind, one or more component parameter
/// blocks, and optional mixing proportions (defaulting to uniform).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub model: String,
    #[serde(alias = "comps")]
    pub components: Vec<ComponentParams<f64>>,
    #[serde(default)]
    pub pmix: Option<Vec<f64>>,
}

pub fn read_params(path: &Path) -> CliResult<(ModelKind, MixtureState<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read '{}': {e}", path.display())))?;
    let parsed: ParamsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("'{}': {e}", path.display())))?;
    let kind = ModelKind::parse(&parsed.model)?;
    if parsed.components.is_empty() {
        return Err(CliError::config("params file lists no components"));
    }
    let k = parsed.components.len();
    let pmix = parsed.pmix.unwrap_or_else(|| vec![1.0 / k as f64; k]);
    let state = MixtureState::new(parsed.components, pmix).map_err(CliError::from)?;
    state.validate(kind).map_err(CliError::from)?;
    Ok((kind, state))
}
