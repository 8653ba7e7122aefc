//! Risk-level sweeps on the assignment and coverage families.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{alpha_sweep, certificate_curvature, check_alphas, default_alpha_grid, num, resolve_samples, sweep_tables, CsvTable};
use crate::casestudies::{
    coverage_generate, default_obstacles, mod_gamma, mod_generate, mod_scenarios, random_obstacles, CoverageInstance,
    CoverageTable, ModInstance,
};
use crate::error::{Error, Result};
use crate::io::{read_json, write_json};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModStudyConfig {
    pub seed: u64,
    pub n_demands: usize,
    pub n_vehicles: usize,
    /// Load this instance instead of generating one.
    pub instance: Option<PathBuf>,
    pub alphas: Vec<f64>,
    pub n_s: Option<usize>,
    pub epsilon: Option<f64>,
    pub delta_conf: Option<f64>,
    /// Defaults to the instance's analytic bound.
    pub gamma_cap: Option<f64>,
    pub delta_step: f64,
}

impl Default for ModStudyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_demands: 4,
            n_vehicles: 6,
            instance: None,
            alphas: default_alpha_grid(),
            n_s: None,
            epsilon: None,
            delta_conf: None,
            gamma_cap: None,
            delta_step: 1.0,
        }
    }
}

#[derive(Serialize)]
struct Resolved<'a, C> {
    study: &'a str,
    #[serde(flatten)]
    cfg: &'a C,
    resolved_n_s: usize,
    resolved_gamma_cap: f64,
    k_f: f64,
}

pub(crate) const DEFAULT_SAMPLES: usize = 1000;

fn load_or<T, F>(path: &Option<PathBuf>, generate: F) -> Result<T>
where
    T: serde::de::DeserializeOwned,
    F: FnOnce() -> Result<T>,
{
    match path {
        Some(p) => read_json(p),
        None => generate(),
    }
}

/// Assignment study: SGA over the α grid on one shared scenario table.
pub fn run_mod_offline(cfg: &ModStudyConfig, out: &Path) -> Result<Vec<PathBuf>> {
    check_alphas(&cfg.alphas)?;
    let inst: ModInstance = load_or(&cfg.instance, || {
        mod_generate(cfg.n_demands, cfg.n_vehicles, cfg.seed).map_err(|e| match e {
            Error::Parameter(m) => Error::Config(m),
            other => other,
        })
    })?;
    inst.validate()?;
    let gamma = cfg.gamma_cap.unwrap_or_else(|| mod_gamma(&inst));
    let n_s = resolve_samples(cfg.n_s, cfg.epsilon, cfg.delta_conf, gamma, DEFAULT_SAMPLES)?;
    let table = mod_scenarios(&inst, n_s);
    let ground = inst.ground();
    let matroid = inst.matroid();
    let (k_f, _) = certificate_curvature(&table, &ground)?;
    let runs = alpha_sweep(&table, &matroid, &ground, &cfg.alphas, gamma, cfg.delta_step, cfg.epsilon, k_f)
        .map_err(config_if_param)?;

    let header = Resolved {
        study: "mod-offline",
        cfg,
        resolved_n_s: n_s,
        resolved_gamma_cap: gamma,
        k_f,
    };
    let instance_path = out.join("instance.json");
    write_json(&instance_path, &inst)?;
    let mut files = vec![instance_path];
    files.extend(sweep_tables(out, &header, "mod", &runs, &ground)?);

    let mut assign = CsvTable::new("mod-assignments-v1", &header, &["alpha", "demand", "vehicle", "mean_eff", "halfwidth"]);
    for r in &runs {
        for e in r.result.selected.sorted() {
            let (i, j) = inst.pair(e);
            assign.push(vec![
                num(r.alpha),
                i.to_string(),
                j.to_string(),
                num(inst.mean_eff[i][j]),
                num(inst.eff_halfwidth[i][j]),
            ]);
        }
    }
    files.push(assign.write(out, "assignments.csv")?);
    Ok(files)
}

fn config_if_param(e: Error) -> Error {
    match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageStudyConfig {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// Random rectangle count; `None` uses the fixed three-obstacle layout.
    pub obstacles: Option<usize>,
    pub n_candidates: usize,
    pub budget: usize,
    pub instance: Option<PathBuf>,
    pub alphas: Vec<f64>,
    pub n_s: Option<usize>,
    pub epsilon: Option<f64>,
    pub delta_conf: Option<f64>,
    /// Defaults to the free-cell count.
    pub gamma_cap: Option<f64>,
    pub delta_step: f64,
    /// Enumerate every working pattern instead of sampling.
    pub exact: bool,
}

impl Default for CoverageStudyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            width: 20,
            height: 20,
            obstacles: None,
            n_candidates: 8,
            budget: 4,
            instance: None,
            alphas: default_alpha_grid(),
            n_s: None,
            epsilon: None,
            delta_conf: None,
            gamma_cap: None,
            delta_step: 1.0,
            exact: false,
        }
    }
}

/// Generate the coverage instance described by `cfg`.
pub fn coverage_instance(cfg: &CoverageStudyConfig) -> Result<CoverageInstance> {
    let obstacles = match cfg.obstacles {
        None => default_obstacles(),
        Some(c) => random_obstacles(cfg.width, cfg.height, c, cfg.seed),
    };
    coverage_generate(cfg.width, cfg.height, &obstacles, cfg.n_candidates, cfg.budget, cfg.seed).map_err(config_if_param)
}

/// Coverage study: footprints, α sweep, and the selected sensors per α.
pub fn run_coverage(cfg: &CoverageStudyConfig, out: &Path) -> Result<Vec<PathBuf>> {
    check_alphas(&cfg.alphas)?;
    let inst: CoverageInstance = load_or(&cfg.instance, || coverage_instance(cfg))?;
    inst.validate()?;
    let gamma = cfg.gamma_cap.unwrap_or_else(|| inst.gamma());
    let ground = inst.ground();
    let matroid = inst.matroid();

    let (n_s, runs, k_f) = if cfg.exact {
        if cfg.n_s.is_some() || cfg.epsilon.is_some() {
            return Err(Error::Config("exact mode takes no --ns or --eps".into()));
        }
        let table = CoverageTable::exact(&inst)?;
        let (k_f, _) = certificate_curvature(&table, &ground)?;
        let runs = alpha_sweep(&table, &matroid, &ground, &cfg.alphas, gamma, cfg.delta_step, None, k_f)
            .map_err(config_if_param)?;
        (table_len(&table), runs, k_f)
    } else {
        let n_s = resolve_samples(cfg.n_s, cfg.epsilon, cfg.delta_conf, gamma, DEFAULT_SAMPLES)?;
        let table = CoverageTable::sampled(&inst, n_s);
        let (k_f, _) = certificate_curvature(&table, &ground)?;
        let runs = alpha_sweep(&table, &matroid, &ground, &cfg.alphas, gamma, cfg.delta_step, cfg.epsilon, k_f)
            .map_err(config_if_param)?;
        (n_s, runs, k_f)
    };

    let header = Resolved {
        study: "coverage",
        cfg,
        resolved_n_s: n_s,
        resolved_gamma_cap: gamma,
        k_f,
    };
    let instance_path = out.join("instance.json");
    write_json(&instance_path, &inst)?;
    let mut files = vec![instance_path];

    let mut fp = CsvTable::new("coverage-footprints-v1", &header, &["candidate", "x", "y", "visible_cells", "success_prob"]);
    for (i, c) in inst.candidates.iter().enumerate() {
        fp.push(vec![
            i.to_string(),
            c[0].to_string(),
            c[1].to_string(),
            inst.footprints[i].len().to_string(),
            num(inst.success_prob[i]),
        ]);
    }
    files.push(fp.write(out, "footprints.csv")?);
    files.extend(sweep_tables(out, &header, "coverage", &runs, &ground)?);

    let mut sel = CsvTable::new("coverage-selections-v1", &header, &["alpha", "candidate", "x", "y", "visible_cells", "success_prob"]);
    for r in &runs {
        for e in r.result.selected.sorted() {
            let c = inst.candidates[e.0];
            sel.push(vec![
                num(r.alpha),
                e.0.to_string(),
                c[0].to_string(),
                c[1].to_string(),
                inst.footprints[e.0].len().to_string(),
                num(inst.success_prob[e.0]),
            ]);
        }
    }
    files.push(sel.write(out, "selections.csv")?);
    Ok(files)
}

fn table_len<T: crate::risk::ScenarioTable>(t: &T) -> usize {
    t.n_scenarios()
}
