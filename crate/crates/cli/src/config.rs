//! Flat `key = value` configuration files.
//!
//! The file is parsed with TOML syntax but only top-level scalars and arrays
//! of scalars are accepted. List-valued keys also take a single number.
//! Every key defaults to the paper configuration, so an empty file is valid.

use cdma_downlink::experiment::ExperimentConfig;
use cdma_downlink::policy::PolicyKind;
use toml::{Table, Value};

use crate::error::CliError;

/// Every recognised key, in the order the resolved config is echoed.
pub const KEYS: &[&str] = &[
    "M",
    "km_list",
    "r_net",
    "r_bs",
    "rbs_list",
    "r_m",
    "alpha",
    "d0",
    "sigma_s_dB",
    "m_serving",
    "m_interfering",
    "Gamma_dB",
    "G_spread",
    "h_chip",
    "f_p",
    "epsilon_hat",
    "policy",
    "n_trials",
    "master_seed",
    "cell_edge_fraction",
    "bootstrap_resamples",
    "ccdf_r_max",
    "ccdf_r_step",
];

fn float(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::config(key, format!("expected a number, got {v}"))),
    }
}

fn floats(key: &str, v: &Value) -> Result<Vec<f64>, CliError> {
    match v {
        Value::Array(items) => items.iter().map(|x| float(key, x)).collect(),
        other => Ok(vec![float(key, other)?]),
    }
}

fn unsigned(key: &str, v: &Value) -> Result<u64, CliError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::Integer(i) => Err(CliError::config(
            key,
            format!("must be non-negative, got {i}"),
        )),
        _ => Err(CliError::config(
            key,
            format!("expected an integer, got {v}"),
        )),
    }
}

/// Parses `rate`, `power` or `both` (or an array of the first two).
pub fn policies(key: &str, v: &Value) -> Result<Vec<PolicyKind>, CliError> {
    let one = |s: &str| -> Result<Vec<PolicyKind>, CliError> {
        if s == "both" {
            return Ok(PolicyKind::ALL.to_vec());
        }
        s.parse::<PolicyKind>().map(|k| vec![k]).map_err(|_| {
            CliError::config(
                key,
                format!("unknown policy `{s}`; use rate, power or both"),
            )
        })
    };
    let mut out = match v {
        Value::String(s) => one(s)?,
        Value::Array(items) => {
            let mut all = Vec::new();
            for item in items {
                match item {
                    Value::String(s) => all.extend(one(s)?),
                    other => {
                        return Err(CliError::config(
                            key,
                            format!("expected a policy name, got {other}"),
                        ))
                    }
                }
            }
            all
        }
        other => {
            return Err(CliError::config(
                key,
                format!("expected a policy name, got {other}"),
            ))
        }
    };
    out.sort();
    out.dedup();
    Ok(out)
}

fn apply(cfg: &mut ExperimentConfig, key: &str, v: &Value) -> Result<(), CliError> {
    match key {
        "M" => cfg.num_base_stations = unsigned(key, v)? as usize,
        "km_list" => cfg.km_list = floats(key, v)?,
        "r_net" => cfg.r_net = float(key, v)?,
        "r_bs" => cfg.r_bs = float(key, v)?,
        "rbs_list" => cfg.rbs_list = floats(key, v)?,
        "r_m" => cfg.r_m = float(key, v)?,
        "alpha" => cfg.alpha = float(key, v)?,
        "d0" => cfg.d0 = float(key, v)?,
        "sigma_s_dB" => cfg.sigma_s_db = floats(key, v)?,
        "m_serving" => {
            cfg.m_serving =
                u32::try_from(unsigned(key, v)?).map_err(|_| CliError::config(key, "too large"))?
        }
        "m_interfering" => cfg.m_interfering = float(key, v)?,
        "Gamma_dB" => cfg.gamma_db = float(key, v)?,
        "G_spread" => cfg.spreading_factor = unsigned(key, v)? as usize,
        "h_chip" => cfg.chip_factor = float(key, v)?,
        "f_p" => cfg.pilot_fraction = float(key, v)?,
        "epsilon_hat" => cfg.epsilon_hat = float(key, v)?,
        "policy" => cfg.policies = policies(key, v)?,
        "n_trials" => cfg.n_trials = unsigned(key, v)? as usize,
        "master_seed" => {
            cfg.master_seed = match v {
                Value::String(s) => s.parse().map_err(|_| {
                    CliError::config(key, format!("`{s}` is not an unsigned integer"))
                })?,
                other => unsigned(key, other)?,
            }
        }
        "cell_edge_fraction" => cfg.cell_edge_fraction = float(key, v)?,
        "bootstrap_resamples" => cfg.bootstrap_resamples = unsigned(key, v)? as usize,
        "ccdf_r_max" => cfg.ccdf_r_max = float(key, v)?,
        "ccdf_r_step" => cfg.ccdf_r_step = float(key, v)?,
        _ => return Err(CliError::config(key, "unknown key")),
    }
    Ok(())
}

pub fn parse_table(text: &str) -> Result<Table, CliError> {
    text.parse::<Table>().map_err(|e| {
        let reason = e.message().to_string();
        // point at the offending line when the parser can
        let key = e
            .span()
            .and_then(|span| text[..span.start].lines().last())
            .and_then(|line| line.split('=').next())
            .map(str::trim)
            .filter(|k| !k.is_empty())
            .unwrap_or("<file>")
            .to_string();
        CliError::Config { key, reason }
    })
}

/// Builds a config from the paper defaults, then `file`, then `overrides`.
/// The result has passed full range validation.
pub fn resolve(file: &Table, overrides: &Table) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    for table in [file, overrides] {
        for (key, value) in table {
            apply(&mut cfg, key, value)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The resolved configuration as a table that `resolve` reads back exactly.
pub fn to_table(cfg: &ExperimentConfig) -> Table {
    let list = |xs: &[f64]| Value::Array(xs.iter().map(|&x| Value::Float(x)).collect());
    let policy = match cfg.policies.as_slice() {
        [one] => Value::String(one.as_str().into()),
        many => Value::Array(
            many.iter()
                .map(|k| Value::String(k.as_str().into()))
                .collect(),
        ),
    };
    let entries = [
        ("M", Value::Integer(cfg.num_base_stations as i64)),
        ("km_list", list(&cfg.km_list)),
        ("r_net", Value::Float(cfg.r_net)),
        ("r_bs", Value::Float(cfg.r_bs)),
        ("rbs_list", list(&cfg.rbs_list)),
        ("r_m", Value::Float(cfg.r_m)),
        ("alpha", Value::Float(cfg.alpha)),
        ("d0", Value::Float(cfg.d0)),
        ("sigma_s_dB", list(&cfg.sigma_s_db)),
        ("m_serving", Value::Integer(i64::from(cfg.m_serving))),
        ("m_interfering", Value::Float(cfg.m_interfering)),
        ("Gamma_dB", Value::Float(cfg.gamma_db)),
        ("G_spread", Value::Integer(cfg.spreading_factor as i64)),
        ("h_chip", Value::Float(cfg.chip_factor)),
        ("f_p", Value::Float(cfg.pilot_fraction)),
        ("epsilon_hat", Value::Float(cfg.epsilon_hat)),
        ("policy", policy),
        ("n_trials", Value::Integer(cfg.n_trials as i64)),
        // TOML integers are signed, so very large seeds are echoed as strings
        (
            "master_seed",
            i64::try_from(cfg.master_seed)
                .map(Value::Integer)
                .unwrap_or_else(|_| Value::String(cfg.master_seed.to_string())),
        ),
        ("cell_edge_fraction", Value::Float(cfg.cell_edge_fraction)),
        (
            "bootstrap_resamples",
            Value::Integer(cfg.bootstrap_resamples as i64),
        ),
        ("ccdf_r_max", Value::Float(cfg.ccdf_r_max)),
        ("ccdf_r_step", Value::Float(cfg.ccdf_r_step)),
    ];
    debug_assert_eq!(entries.len(), KEYS.len());
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}
