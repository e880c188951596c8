//! Flat key-value run configuration.
//!
//! A config file is TOML with top-level keys only. Every key is optional;
//! anything missing falls back to the built-in scenario and is logged at
//! `info` level. See `config/schema.toml` in the repository for the full list.

use std::collections::BTreeMap;
use std::path::Path;

use irsdm_core::channel::{dbm_to_watts, sigma2_for_snr, ScenarioConfig};
use irsdm_core::opt_gao::GaoSettings;
use log::info;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use toml::Table;

use crate::error::CliError;

/// Scenario plus the solver and run controls that live in the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let gao = GaoSettings::default();
        Self {
            scenario: ScenarioConfig::default(),
            epsilon: gao.epsilon,
            max_iter: gao.max_iter,
            seed: 1,
            trials: 1,
        }
    }
}

const ANGLE_KEYS: [&str; 10] = [
    "theta_t_ai",
    "theta_r_ai",
    "theta_t_ab",
    "theta_r_ab",
    "theta_t_ae",
    "theta_r_ae",
    "theta_t_ib",
    "theta_r_ib",
    "theta_t_ie",
    "theta_r_ie",
];

const COUNT_KEYS: [&str; 4] = ["n_a", "n_b", "n_e", "m"];

const REAL_KEYS: [&str; 10] = [
    "d_ai",
    "d_ab",
    "d_ae",
    "d_ib",
    "d_ie",
    "beta1",
    "beta2",
    "beta3",
    "alpha",
    "spacing_over_wavelength",
];

const POWER_KEYS: [&str; 4] = ["ps_w", "ps_dbm", "sigma2_w", "snr_db"];

const RUN_KEYS: [&str; 4] = ["epsilon", "max_iter", "seed", "trials"];

fn is_known(key: &str) -> bool {
    ANGLE_KEYS
        .iter()
        .chain(&COUNT_KEYS)
        .chain(&REAL_KEYS)
        .chain(&POWER_KEYS)
        .chain(&RUN_KEYS)
        .any(|k| *k == key)
}

fn angle_slot<'a>(cfg: &'a mut ScenarioConfig, key: &str) -> &'a mut f64 {
    let l = &mut cfg.links;
    match key {
        "theta_t_ai" => &mut l.ai.departure,
        "theta_r_ai" => &mut l.ai.arrival,
        "theta_t_ab" => &mut l.ab.departure,
        "theta_r_ab" => &mut l.ab.arrival,
        "theta_t_ae" => &mut l.ae.departure,
        "theta_r_ae" => &mut l.ae.arrival,
        "theta_t_ib" => &mut l.ib.departure,
        "theta_r_ib" => &mut l.ib.arrival,
        "theta_t_ie" => &mut l.ie.departure,
        "theta_r_ie" => &mut l.ie.arrival,
        _ => unreachable!("not an angle key: {key}"),
    }
}

fn real_slot<'a>(cfg: &'a mut ScenarioConfig, key: &str) -> &'a mut f64 {
    match key {
        "d_ai" => &mut cfg.d_ai,
        "d_ab" => &mut cfg.d_ab,
        "d_ae" => &mut cfg.d_ae,
        "d_ib" => &mut cfg.d_ib,
        "d_ie" => &mut cfg.d_ie,
        "beta1" => &mut cfg.beta1,
        "beta2" => &mut cfg.beta2,
        "beta3" => &mut cfg.beta3,
        "alpha" => &mut cfg.alpha,
        "spacing_over_wavelength" => &mut cfg.spacing_over_wavelength,
        _ => unreachable!("not a real key: {key}"),
    }
}

fn count_slot<'a>(cfg: &'a mut ScenarioConfig, key: &str) -> &'a mut usize {
    match key {
        "n_a" => &mut cfg.n_a,
        "n_b" => &mut cfg.n_b,
        "n_e" => &mut cfg.n_e,
        "m" => &mut cfg.m,
        _ => unreachable!("not a count key: {key}"),
    }
}

fn get_real(table: &Table, key: &str) -> Result<Option<f64>, CliError> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(x)) => Ok(Some(*x)),
        Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(other) => Err(CliError::validation(
            key,
            format!("expected a number, found {}", other.type_str()),
        )),
    }
}

fn get_int(table: &Table, key: &str, min: i64) -> Result<Option<i64>, CliError> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) if *i >= min => Ok(Some(*i)),
        Some(toml::Value::Integer(i)) => Err(CliError::validation(key, format!("must be at least {min}, got {i}"))),
        Some(other) => Err(CliError::validation(
            key,
            format!("expected an integer, found {}", other.type_str()),
        )),
    }
}

fn defaulted(key: &str, value: impl std::fmt::Display) {
    info!("config: {key} not set, using default {value}");
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Parses config text. An empty string yields the default scenario.
pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    let table: Table = toml::from_str(text).map_err(|e| CliError::Validation(format!("malformed config: {e}")))?;
    if let Some(key) = table.keys().find(|k| !is_known(k)) {
        return Err(CliError::validation(key, "unknown key"));
    }

    let mut run = RunConfig::default();
    let cfg = &mut run.scenario;

    for key in COUNT_KEYS {
        let slot = count_slot(cfg, key);
        match get_int(&table, key, 0)? {
            Some(v) => *slot = v as usize,
            None => defaulted(key, *slot),
        }
    }
    for key in ANGLE_KEYS {
        let slot = angle_slot(cfg, key);
        match get_real(&table, key)? {
            Some(v) => *slot = v,
            None => defaulted(key, *slot),
        }
    }
    for key in REAL_KEYS {
        let slot = real_slot(cfg, key);
        match get_real(&table, key)? {
            Some(v) => *slot = v,
            None => defaulted(key, *slot),
        }
    }

    match (get_real(&table, "ps_w")?, get_real(&table, "ps_dbm")?) {
        (Some(_), Some(_)) => return Err(CliError::validation("ps_dbm", "give either ps_w or ps_dbm, not both")),
        (Some(w), None) => cfg.ps = w,
        (None, Some(dbm)) => cfg.ps = dbm_to_watts(dbm),
        (None, None) => defaulted("ps_w", cfg.ps),
    }
    if !(cfg.ps.is_finite() && cfg.ps > 0.0) {
        let key = if table.contains_key("ps_dbm") { "ps_dbm" } else { "ps_w" };
        return Err(CliError::validation(key, "transmit power must be positive and finite"));
    }
    match (get_real(&table, "sigma2_w")?, get_real(&table, "snr_db")?) {
        (Some(_), Some(_)) => {
            return Err(CliError::validation(
                "snr_db",
                "give either sigma2_w or snr_db, not both",
            ))
        }
        (Some(s), None) => cfg.sigma2 = s,
        (None, Some(snr)) => cfg.sigma2 = sigma2_for_snr(cfg.ps, snr),
        (None, None) => defaulted("sigma2_w", cfg.sigma2),
    }
    if !(cfg.sigma2.is_finite() && cfg.sigma2 > 0.0) {
        let key = if table.contains_key("snr_db") {
            "snr_db"
        } else {
            "sigma2_w"
        };
        return Err(CliError::validation(key, "noise power must be positive and finite"));
    }

    match get_real(&table, "epsilon")? {
        Some(e) => run.epsilon = e,
        None => defaulted("epsilon", run.epsilon),
    }
    if !(run.epsilon.is_finite() && run.epsilon > 0.0) {
        return Err(CliError::validation("epsilon", "must be positive and finite"));
    }
    match get_int(&table, "max_iter", 1)? {
        Some(v) => run.max_iter = v as usize,
        None => defaulted("max_iter", run.max_iter),
    }
    match get_int(&table, "seed", 0)? {
        Some(v) => run.seed = v as u64,
        None => defaulted("seed", run.seed),
    }
    match get_int(&table, "trials", 1)? {
        Some(v) => run.trials = v as usize,
        None => defaulted("trials", run.trials),
    }

    run.scenario.validate()?;
    Ok(run)
}

impl RunConfig {
    /// Fully resolved config as a JSON object with sorted keys.
    pub fn canonical(&self) -> Value {
        let mut c = self.scenario.clone();
        let mut map = BTreeMap::new();
        for key in COUNT_KEYS {
            map.insert(key.to_string(), json!(*count_slot(&mut c, key)));
        }
        for key in ANGLE_KEYS {
            map.insert(key.to_string(), json!(*angle_slot(&mut c, key)));
        }
        for key in REAL_KEYS {
            map.insert(key.to_string(), json!(*real_slot(&mut c, key)));
        }
        map.insert("ps_w".into(), json!(c.ps));
        map.insert("sigma2_w".into(), json!(c.sigma2));
        map.insert("epsilon".into(), json!(self.epsilon));
        map.insert("max_iter".into(), json!(self.max_iter));
        map.insert("seed".into(), json!(self.seed));
        map.insert("trials".into(), json!(self.trials));
        json!(map)
    }

    /// SHA-256 of the canonical form, as lowercase hex.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(&self.canonical()).expect("canonical config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
