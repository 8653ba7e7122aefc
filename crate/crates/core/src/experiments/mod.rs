//! Seeded study runners that write CSV and JSON result files.
//!
//! Every CSV starts with `# schema: <name>` and `# config: <json>` lines.
//! The config line holds the fully resolved settings (output directory
//! excluded), so identical headers mean identical files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::greedy::Curvature;
use crate::matroid::Matroid;
use crate::risk::{estimate_cvar, required_samples, weighted_cvar, RiskParams, ScenarioTable};
use crate::sets::{ElementSet, GroundSet};
use crate::sga::{certificate, eval_count_bound, mean_utility_curvature, sga_solve, Certificate, SgaResult};

mod compare;
mod instances;
mod selection;

pub use compare::{ota_compare_runs, run_ota_compare, summarize, CompareRow, OtaCompareConfig, Scale};
pub use instances::{gen_city, gen_instance, solve, GenCityConfig, GenInstanceConfig, InstanceKind, Solution, SolveConfig};
pub use selection::{run_coverage, run_mod_offline, CoverageStudyConfig, ModStudyConfig};

/// `{0.01, 0.1, 0.2, …, 1}`
pub fn default_alpha_grid() -> Vec<f64> {
    let mut v = vec![0.01];
    v.extend((1..=10).map(|i| i as f64 / 10.0));
    v
}

/// Scenario count from either `n_s` or `(ε, δ)`.
pub fn resolve_samples(ns: Option<usize>, eps: Option<f64>, delta: Option<f64>, gamma: f64, default: usize) -> Result<usize> {
    match (ns, eps, delta) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            Err(Error::Config("give either --ns or --eps/--delta-conf, not both".into()))
        }
        (Some(0), _, _) => Err(Error::Config("--ns must be positive".into())),
        (Some(n), None, None) => Ok(n),
        (None, Some(e), Some(d)) => {
            let n = required_samples(gamma, e, d).map_err(|e| Error::Config(e.to_string()))?;
            usize::try_from(n).map_err(|_| Error::Config(format!("{n} scenarios do not fit in memory")))
        }
        (None, None, None) => Ok(default),
        _ => Err(Error::Config("--eps and --delta-conf must be given together".into())),
    }
}

pub(crate) fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::Config("alpha grid is empty".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(Error::Config(format!("alpha must lie in (0,1], got {a}")));
    }
    Ok(())
}

/// A CSV file with schema and config header lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub schema: String,
    pub config: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<C: Serialize>(schema: &str, config: &C, columns: &[&str]) -> Self {
        Self {
            schema: schema.to_string(),
            config: serde_json::to_string(config).expect("config serializes"),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = format!("# schema: {}\n# config: {}\n{}\n", self.schema, self.config, self.columns.join(","));
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        let path = dir.join(name);
        crate::io::write_text(&path, &self.render())?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Selected elements joined by `;`, by label when available.
pub fn set_label(set: &ElementSet, ground: &GroundSet) -> String {
    set.iter()
        .map(|e| ground.label(e).map_or_else(|| e.0.to_string(), str::to_string))
        .collect::<Vec<_>>()
        .join(";")
}

/// SGA outcome for one risk level on a shared scenario table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaRun {
    pub alpha: f64,
    pub result: SgaResult,
    pub certificate: Certificate,
    pub values: Vec<f64>,
    pub mean_utility: f64,
    /// Empirical CVaR at α = 0.1 of the selected set.
    pub cvar_10: f64,
    pub eval_bound: u64,
}

/// Curvature for the certificate, falling back to 1 when some element has
/// zero expected singleton value.
pub fn certificate_curvature<T: ScenarioTable + ?Sized>(table: &T, ground: &GroundSet) -> Result<(f64, Option<Curvature>)> {
    match mean_utility_curvature(table, ground) {
        Ok(c) => Ok((c.value, Some(c))),
        Err(Error::ZeroSingleton { .. }) => Ok((1.0, None)),
        Err(e) => Err(e),
    }
}

/// Run SGA for every α on the same table.
#[allow(clippy::too_many_arguments)]
pub fn alpha_sweep<T: ScenarioTable + Sync>(
    table: &T,
    matroid: &Matroid,
    ground: &GroundSet,
    alphas: &[f64],
    gamma_cap: f64,
    delta_step: f64,
    epsilon: Option<f64>,
    k_f: f64,
) -> Result<Vec<AlphaRun>> {
    alphas
        .iter()
        .map(|&alpha| {
            let mut p = RiskParams::new(alpha, gamma_cap, delta_step)?;
            p.epsilon = epsilon;
            let result = sga_solve(table, matroid, ground, &p)?;
            let cert = certificate(&result, k_f, &p)?;
            let values = table.values(&result.selected);
            let mean_utility = table.mean_value(&result.selected);
            let cvar_10 = table_cvar(table, &values, 0.1)?;
            Ok(AlphaRun {
                alpha,
                eval_bound: eval_count_bound(ground, &p, table.n_scenarios() as u64),
                result,
                certificate: cert,
                values,
                mean_utility,
                cvar_10,
            })
        })
        .collect()
}

/// Empirical CVaR, weighted when the table carries probabilities.
pub fn table_cvar<T: ScenarioTable + ?Sized>(table: &T, values: &[f64], alpha: f64) -> Result<f64> {
    match table.probabilities() {
        Some(p) => weighted_cvar(values, p, alpha),
        None => Ok(estimate_cvar(values, alpha)?.cvar),
    }
}

/// The four tables shared by both selection studies.
pub(crate) fn sweep_tables<C: Serialize>(dir: &Path, cfg: &C, prefix: &str, runs: &[AlphaRun], ground: &GroundSet) -> Result<Vec<PathBuf>> {
    let mut h = CsvTable::new(
        &format!("{prefix}-h-vs-alpha-v1"),
        cfg,
        &["alpha", "tau_g", "h_value", "mean_utility", "cvar_0.1", "eval_count", "eval_bound", "selected"],
    );
    let mut trace = CsvTable::new(&format!("{prefix}-h-trace-v1"), cfg, &["alpha", "tau", "h", "selected"]);
    let mut samples = CsvTable::new(&format!("{prefix}-utility-samples-v1"), cfg, &["alpha", "scenario", "utility"]);
    let mut add = CsvTable::new(
        &format!("{prefix}-additive-v1"),
        cfg,
        &["alpha", "k_f", "additive_term", "delta_step", "epsilon", "optimum_upper_bound"],
    );
    for r in runs {
        h.push(vec![
            num(r.alpha),
            num(r.result.tau_g),
            num(r.result.h_value),
            num(r.mean_utility),
            num(r.cvar_10),
            r.result.eval_count.to_string(),
            r.eval_bound.to_string(),
            set_label(&r.result.selected, ground),
        ]);
        for t in &r.result.trace {
            trace.push(vec![num(r.alpha), num(t.tau), num(t.h), set_label(&t.set, ground)]);
        }
        for (k, v) in r.values.iter().enumerate() {
            samples.push(vec![num(r.alpha), k.to_string(), num(*v)]);
        }
        let c = &r.certificate;
        add.push(vec![
            num(r.alpha),
            num(c.k_f),
            num(c.additive_term),
            num(c.delta_step),
            num(c.epsilon),
            num(c.optimum_upper_bound),
        ]);
    }
    Ok(vec![
        h.write(dir, "h_vs_alpha.csv")?,
        trace.write(dir, "h_trace.csv")?,
        samples.write(dir, "utility_samples.csv")?,
        add.write(dir, "additive.csv")?,
    ])
}
