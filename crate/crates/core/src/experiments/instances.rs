//! Instance and network files, and solving a stored instance.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::selection::{coverage_instance, DEFAULT_SAMPLES};
use super::{certificate_curvature, resolve_samples, set_label, table_cvar, CoverageStudyConfig};
use crate::casestudies::{
    mod_gamma, mod_generate, mod_scenarios, CoverageInstance, CoverageTable, ModInstance, COVERAGE_SCHEMA, MOD_SCHEMA,
};
use crate::error::{Error, Result};
use crate::io::{read_json, write_json};
use crate::matroid::Matroid;
use crate::risk::{RiskParams, ScenarioTable};
use crate::sets::GroundSet;
use crate::sga::{certificate, curvature_diagnostics, sga_solve, Certificate, CurvatureDiagnostics, SgaResult};
use crate::streetnet::{synth_city_with, CityOptions};

pub const SOLUTION_SCHEMA: &str = "solution-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Mod,
    Coverage,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenInstanceConfig {
    pub kind: InstanceKind,
    pub seed: u64,
    pub n_demands: usize,
    pub n_vehicles: usize,
    pub width: usize,
    pub height: usize,
    pub obstacles: Option<usize>,
    pub n_candidates: usize,
    pub budget: usize,
}

impl Default for GenInstanceConfig {
    fn default() -> Self {
        let c = CoverageStudyConfig::default();
        Self {
            kind: InstanceKind::Mod,
            seed: 1,
            n_demands: 4,
            n_vehicles: 6,
            width: c.width,
            height: c.height,
            obstacles: c.obstacles,
            n_candidates: c.n_candidates,
            budget: c.budget,
        }
    }
}

/// Write a generated instance to `out/instance.json`.
pub fn gen_instance(cfg: &GenInstanceConfig, out: &Path) -> Result<PathBuf> {
    let path = out.join("instance.json");
    match cfg.kind {
        InstanceKind::Mod => {
            let inst = mod_generate(cfg.n_demands, cfg.n_vehicles, cfg.seed).map_err(to_config)?;
            write_json(&path, &inst)?;
        }
        InstanceKind::Coverage => {
            let c = CoverageStudyConfig {
                seed: cfg.seed,
                width: cfg.width,
                height: cfg.height,
                obstacles: cfg.obstacles,
                n_candidates: cfg.n_candidates,
                budget: cfg.budget,
                ..CoverageStudyConfig::default()
            };
            write_json(&path, &coverage_instance(&c)?)?;
        }
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenCityConfig {
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub diagonal_prob: f64,
}

impl Default for GenCityConfig {
    fn default() -> Self {
        Self {
            rows: 5,
            cols: 5,
            seed: 7,
            diagonal_prob: 0.0,
        }
    }
}

/// Write a synthetic street network to `out/city.json`.
pub fn gen_city(cfg: &GenCityConfig, out: &Path) -> Result<PathBuf> {
    let opts = CityOptions {
        diagonal_prob: cfg.diagonal_prob,
        ..CityOptions::default()
    };
    let net = synth_city_with(cfg.rows, cfg.cols, cfg.seed, opts).map_err(to_config)?;
    let path = out.join("city.json");
    write_json(&path, &net.to_file())?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveConfig {
    pub instance: PathBuf,
    pub alpha: f64,
    pub n_s: Option<usize>,
    pub epsilon: Option<f64>,
    pub delta_conf: Option<f64>,
    pub gamma_cap: Option<f64>,
    pub delta_step: f64,
    /// Coverage only: enumerate every working pattern.
    pub exact: bool,
}

impl SolveConfig {
    pub fn new(instance: impl Into<PathBuf>) -> Self {
        Self {
            instance: instance.into(),
            alpha: 0.1,
            n_s: None,
            epsilon: None,
            delta_conf: None,
            gamma_cap: None,
            delta_step: 1.0,
            exact: false,
        }
    }
}

/// Contents of `solution.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub schema: String,
    pub instance_schema: String,
    pub instance_seed: u64,
    pub alpha: f64,
    pub n_s: usize,
    pub gamma_cap: f64,
    pub delta_step: f64,
    pub selected_labels: String,
    pub result: SgaResult,
    pub certificate: Certificate,
    /// `None` when some element has zero expected singleton value.
    pub curvature: Option<CurvatureDiagnostics>,
    pub mean_utility: f64,
    /// Empirical CVaR at the solve's α.
    pub cvar: f64,
}

fn to_config(e: Error) -> Error {
    match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    }
}

fn parse<T: serde::de::DeserializeOwned>(v: serde_json::Value, path: &Path) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Instance(format!("{}: {e}", path.display())))
}

/// Solve a stored instance and write `out/solution.json`.
pub fn solve(cfg: &SolveConfig, out: &Path) -> Result<Solution> {
    let raw: serde_json::Value = read_json(&cfg.instance)?;
    let schema = raw
        .get("schema")
        .and_then(|s| s.as_str())
        .ok_or_else(|| Error::Instance(format!("{}: missing \"schema\" field", cfg.instance.display())))?
        .to_string();
    let sol = match schema.as_str() {
        MOD_SCHEMA => {
            if cfg.exact {
                return Err(Error::Config("exact mode is only available for coverage instances".into()));
            }
            let inst: ModInstance = parse(raw, &cfg.instance)?;
            inst.validate()?;
            let gamma = cfg.gamma_cap.unwrap_or_else(|| mod_gamma(&inst));
            let n_s = resolve_samples(cfg.n_s, cfg.epsilon, cfg.delta_conf, gamma, DEFAULT_SAMPLES)?;
            let table = mod_scenarios(&inst, n_s);
            solve_table(cfg, &schema, inst.seed, &table, &inst.matroid(), &inst.ground(), gamma)?
        }
        COVERAGE_SCHEMA => {
            let inst: CoverageInstance = parse(raw, &cfg.instance)?;
            inst.validate()?;
            let gamma = cfg.gamma_cap.unwrap_or_else(|| inst.gamma());
            let table = if cfg.exact {
                if cfg.n_s.is_some() || cfg.epsilon.is_some() {
                    return Err(Error::Config("exact mode takes no --ns or --eps".into()));
                }
                CoverageTable::exact(&inst)?
            } else {
                let n_s = resolve_samples(cfg.n_s, cfg.epsilon, cfg.delta_conf, gamma, DEFAULT_SAMPLES)?;
                CoverageTable::sampled(&inst, n_s)
            };
            solve_table(cfg, &schema, inst.seed, &table, &inst.matroid(), &inst.ground(), gamma)?
        }
        other => {
            return Err(Error::Instance(format!(
                "{}: unknown schema {other:?}; expected {MOD_SCHEMA:?} or {COVERAGE_SCHEMA:?}",
                cfg.instance.display()
            )))
        }
    };
    write_json(&out.join("solution.json"), &sol)?;
    Ok(sol)
}

fn solve_table<T: ScenarioTable + Sync>(
    cfg: &SolveConfig,
    schema: &str,
    seed: u64,
    table: &T,
    matroid: &Matroid,
    ground: &GroundSet,
    gamma: f64,
) -> Result<Solution> {
    let mut p = RiskParams::new(cfg.alpha, gamma, cfg.delta_step).map_err(to_config)?;
    p.epsilon = cfg.epsilon;
    let result = sga_solve(table, matroid, ground, &p)?;
    let (k_f, _) = certificate_curvature(table, ground)?;
    let cert = certificate(&result, k_f, &p)?;
    let curvature = match curvature_diagnostics(table, ground, &p) {
        Ok(c) => Some(c),
        Err(Error::ZeroSingleton { .. }) => None,
        Err(e) => return Err(e),
    };
    let values = table.values(&result.selected);
    let cvar = table_cvar(table, &values, cfg.alpha)?;
    Ok(Solution {
        schema: SOLUTION_SCHEMA.to_string(),
        instance_schema: schema.to_string(),
        instance_seed: seed,
        alpha: cfg.alpha,
        n_s: table.n_scenarios(),
        gamma_cap: gamma,
        delta_step: cfg.delta_step,
        selected_labels: set_label(&result.selected, ground),
        mean_utility: table.mean_value(&result.selected),
        cvar,
        result,
        certificate: cert,
        curvature,
    })
}
