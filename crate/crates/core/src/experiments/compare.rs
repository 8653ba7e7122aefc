//! Replanning strategies compared on a street network.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{num, CsvTable};
use crate::error::{Error, Result};
use crate::io::{read_json, write_text};
use crate::streetnet::ota::random_placement;
use crate::streetnet::{ota_run, synth_city, NetworkFile, OtaConfig, OtaMode, StreetNetwork};

/// Fleet size and demand count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    pub vehicles: usize,
    pub demands: usize,
}

impl Scale {
    pub const fn new(vehicles: usize, demands: usize) -> Self {
        Self { vehicles, demands }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtaCompareConfig {
    /// Network file; `None` synthesizes a city from the three fields below.
    pub city: Option<PathBuf>,
    pub city_rows: usize,
    pub city_cols: usize,
    pub city_seed: u64,
    pub scales: Vec<Scale>,
    pub seeds: Vec<u64>,
    pub modes: Vec<OtaMode>,
    /// Trigger thresholds; trigger modes run once per value.
    pub gammas: Vec<f64>,
    pub alpha: f64,
    pub n_s: usize,
    pub grid_points: usize,
    pub max_steps: usize,
    /// Write one NDJSON event log per run.
    #[serde(skip)]
    pub logs: bool,
    /// Write measured wall times to `timing.csv`.
    #[serde(skip)]
    pub timing: bool,
}

impl Default for OtaCompareConfig {
    fn default() -> Self {
        let base = OtaConfig::default();
        Self {
            city: None,
            city_rows: 5,
            city_cols: 5,
            city_seed: 7,
            scales: vec![Scale::new(3, 2), Scale::new(6, 4), Scale::new(12, 5)],
            seeds: (0..10).collect(),
            modes: OtaMode::ALL.to_vec(),
            gammas: vec![0.3, 0.5, 0.7],
            alpha: base.alpha,
            n_s: base.n_s,
            grid_points: base.grid_points,
            max_steps: base.max_steps,
            logs: false,
            timing: false,
        }
    }
}

/// One simulated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub scale: Scale,
    pub seed: u64,
    pub mode: OtaMode,
    /// `None` for modes without a trigger.
    pub gamma: Option<f64>,
    pub arrival_time: f64,
    pub assignment_count: usize,
    pub triggers: usize,
    pub recoveries: usize,
    pub steps: usize,
    #[serde(skip)]
    pub wall_time_s: f64,
    #[serde(skip)]
    pub log: Option<String>,
}

fn has_trigger(mode: OtaMode) -> bool {
    matches!(mode, OtaMode::OtaStreet | OtaMode::OtaGeneral)
}

impl OtaCompareConfig {
    pub fn network(&self) -> Result<StreetNetwork> {
        match &self.city {
            Some(p) => StreetNetwork::from_file(read_json::<NetworkFile>(p)?),
            None => synth_city(self.city_rows, self.city_cols, self.city_seed),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.scales.is_empty() || self.seeds.is_empty() || self.modes.is_empty() {
            return Err(Error::Config("scales, seeds and modes must be non-empty".into()));
        }
        if let Some(s) = self.scales.iter().find(|s| s.vehicles < s.demands || s.demands == 0) {
            return Err(Error::Config(format!(
                "scale {}/{} needs at least one demand and no fewer vehicles than demands",
                s.vehicles, s.demands
            )));
        }
        if self.modes.iter().any(|m| has_trigger(*m)) && self.gammas.is_empty() {
            return Err(Error::Config("trigger modes need at least one gamma".into()));
        }
        for &g in &self.gammas {
            self.ota_config(g).validate()?;
        }
        Ok(())
    }

    fn ota_config(&self, gamma: f64) -> OtaConfig {
        OtaConfig {
            alpha: self.alpha,
            gamma_trigger: gamma,
            n_s: self.n_s,
            grid_points: self.grid_points,
            max_steps: self.max_steps,
        }
    }

    fn tasks(&self) -> Vec<(Scale, u64, OtaMode, Option<f64>)> {
        let mut out = Vec::new();
        for &scale in &self.scales {
            for &seed in &self.seeds {
                for &mode in &self.modes {
                    if has_trigger(mode) {
                        out.extend(self.gammas.iter().map(|&g| (scale, seed, mode, Some(g))));
                    } else {
                        out.push((scale, seed, mode, None));
                    }
                }
            }
        }
        out
    }
}

/// Simulate every (scale, seed, mode, γ) combination, fanned out over threads.
///
/// Rows come back in task order regardless of scheduling.
pub fn ota_compare_runs(cfg: &OtaCompareConfig) -> Result<Vec<CompareRow>> {
    cfg.validate()?;
    let net = cfg.network()?;
    let tasks = cfg.tasks();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(tasks.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<CompareRow>>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());

    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(scale, seed, mode, gamma)) = tasks.get(i) else { break };
                let row = run_one(&net, cfg, scale, seed, mode, gamma);
                slots.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every task ran"))
        .collect()
}

fn run_one(net: &StreetNetwork, cfg: &OtaCompareConfig, scale: Scale, seed: u64, mode: OtaMode, gamma: Option<f64>) -> Result<CompareRow> {
    let (vehicles, demands) = random_placement(net, scale.vehicles, scale.demands, seed)?;
    let ota = cfg.ota_config(gamma.unwrap_or(OtaConfig::default().gamma_trigger));
    let run = ota_run(net, &vehicles, &demands, &ota, seed, mode)?;
    Ok(CompareRow {
        scale,
        seed,
        mode,
        gamma,
        arrival_time: run.arrival_time,
        assignment_count: run.assignment_count,
        triggers: run.trigger_steps.len(),
        recoveries: run.recovery_steps.len(),
        steps: run.events.len(),
        wall_time_s: run.wall_time_s,
        log: cfg.logs.then(|| run.to_ndjson()),
    })
}

/// Mean arrival time and assignment count per (scale, mode, γ), in first-seen order.
pub fn summarize(rows: &[CompareRow]) -> Vec<(Scale, OtaMode, Option<f64>, f64, f64)> {
    let mut keys: Vec<(Scale, OtaMode, Option<f64>)> = Vec::new();
    for r in rows {
        let k = (r.scale, r.mode, r.gamma);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(scale, mode, gamma)| {
            let group: Vec<&CompareRow> = rows.iter().filter(|r| r.scale == scale && r.mode == mode && r.gamma == gamma).collect();
            let n = group.len() as f64;
            let arrival = group.iter().map(|r| r.arrival_time).sum::<f64>() / n;
            let count = group.iter().map(|r| r.assignment_count as f64).sum::<f64>() / n;
            (scale, mode, gamma, arrival, count)
        })
        .collect()
}

fn gamma_cell(g: Option<f64>) -> String {
    g.map_or_else(String::new, num)
}

/// Run the comparison and write `runs.csv` and `summary.csv` (plus logs and
/// timings when enabled).
pub fn run_ota_compare(cfg: &OtaCompareConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let rows = ota_compare_runs(cfg)?;
    let mut runs = CsvTable::new(
        "ota-compare-runs-v1",
        cfg,
        &["vehicles", "demands", "seed", "mode", "gamma", "arrival_time", "assignment_count", "triggers", "recoveries", "steps"],
    );
    let mut timing = CsvTable::new("ota-compare-timing-v1", cfg, &["vehicles", "demands", "seed", "mode", "gamma", "wall_time_s"]);
    let mut files = Vec::new();
    for r in &rows {
        runs.push(vec![
            r.scale.vehicles.to_string(),
            r.scale.demands.to_string(),
            r.seed.to_string(),
            r.mode.to_string(),
            gamma_cell(r.gamma),
            num(r.arrival_time),
            r.assignment_count.to_string(),
            r.triggers.to_string(),
            r.recoveries.to_string(),
            r.steps.to_string(),
        ]);
        timing.push(vec![
            r.scale.vehicles.to_string(),
            r.scale.demands.to_string(),
            r.seed.to_string(),
            r.mode.to_string(),
            gamma_cell(r.gamma),
            num(r.wall_time_s),
        ]);
        if let Some(log) = &r.log {
            let g = r.gamma.map_or_else(String::new, |g| format!("_g{g}"));
            let name = format!("{}x{}_seed{}_{}{g}.ndjson", r.scale.vehicles, r.scale.demands, r.seed, r.mode);
            let path = out.join("logs").join(name);
            write_text(&path, log)?;
            files.push(path);
        }
    }
    let mut summary = CsvTable::new(
        "ota-compare-summary-v1",
        cfg,
        &["vehicles", "demands", "mode", "gamma", "mean_arrival_time", "mean_assignment_count"],
    );
    for (scale, mode, gamma, arrival, count) in summarize(&rows) {
        summary.push(vec![
            scale.vehicles.to_string(),
            scale.demands.to_string(),
            mode.to_string(),
            gamma_cell(gamma),
            num(arrival),
            num(count),
        ]);
    }
    files.insert(0, runs.write(out, "runs.csv")?);
    files.insert(1, summary.write(out, "summary.csv")?);
    if cfg.timing {
        files.push(timing.write(out, "timing.csv")?);
    }
    Ok(files)
}
