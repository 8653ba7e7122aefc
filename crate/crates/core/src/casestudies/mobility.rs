//! Vehicle-to-demand assignment with uncertain arrival efficiency.
//!
//! Element `i·R + j` assigns vehicle `j` to demand `i`. Each vehicle serves
//! at most one demand, so feasible sets are independent in the partition
//! matroid whose blocks are the vehicles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::check_schema;
use crate::matroid::Matroid;
use crate::risk::ScenarioTable;
use crate::rng::{self, Domain};
use crate::sets::{ElementId, ElementSet, GroundSet};

pub const MOD_SCHEMA: &str = "mod-instance-v1";
/// Side of the square environment.
pub const MOD_SIDE: f64 = 10.0;
/// Positions closer than this are redrawn.
pub const MIN_PAIR_DISTANCE: f64 = 1e-3;
pub const MAX_GENERATION_ATTEMPTS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModInstance {
    pub schema: String,
    pub seed: u64,
    pub n_demands: usize,
    pub n_vehicles: usize,
    pub demands: Vec<[f64; 2]>,
    pub vehicles: Vec<[f64; 2]>,
    /// `mean_eff[i][j] = 10 / d_ij`
    pub mean_eff: Vec<Vec<f64>>,
    /// Half the width of the uniform efficiency interval of each pair.
    pub eff_halfwidth: Vec<Vec<f64>>,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Random instance in the 10-unit square.
///
/// The textbook halfwidth `ē^2.5 / max ē` exceeds `ē` for every pair with
/// `ē^1.5 > max ē`, so it is capped at `ē`: intervals keep their mean and
/// samples stay non-negative.
pub fn mod_generate(n_demands: usize, n_vehicles: usize, seed: u64) -> Result<ModInstance> {
    if n_demands == 0 {
        return Err(Error::param("need at least one demand"));
    }
    if n_vehicles < n_demands {
        return Err(Error::param(format!(
            "need at least as many vehicles as demands, got R={n_vehicles} < N={n_demands}"
        )));
    }
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut rng = rng::stream(seed, Domain::ModPositions, attempt, 0);
        let mut point = || {
            use rand::Rng;
            [rng.random::<f64>() * MOD_SIDE, rng.random::<f64>() * MOD_SIDE]
        };
        let demands: Vec<[f64; 2]> = (0..n_demands).map(|_| point()).collect();
        let vehicles: Vec<[f64; 2]> = (0..n_vehicles).map(|_| point()).collect();
        let too_close = demands
            .iter()
            .any(|&d| vehicles.iter().any(|&v| dist(d, v) < MIN_PAIR_DISTANCE));
        if too_close {
            continue;
        }
        return Ok(ModInstance::from_positions(seed, demands, vehicles));
    }
    Err(Error::Generation(format!(
        "no valid layout after {MAX_GENERATION_ATTEMPTS} attempts"
    )))
}

impl ModInstance {
    /// Build efficiency intervals from fixed positions.
    pub fn from_positions(seed: u64, demands: Vec<[f64; 2]>, vehicles: Vec<[f64; 2]>) -> Self {
        let mean_eff: Vec<Vec<f64>> = demands
            .iter()
            .map(|&d| vehicles.iter().map(|&v| 10.0 / dist(d, v)).collect())
            .collect();
        let max = mean_eff.iter().flatten().copied().fold(0.0, f64::max);
        let eff_halfwidth = mean_eff
            .iter()
            .map(|row| row.iter().map(|&e| (e.powf(2.5) / max).min(e)).collect())
            .collect();
        Self {
            schema: MOD_SCHEMA.to_string(),
            seed,
            n_demands: demands.len(),
            n_vehicles: vehicles.len(),
            demands,
            vehicles,
            mean_eff,
            eff_halfwidth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_schema(&self.schema, MOD_SCHEMA)?;
        let (n, r) = (self.n_demands, self.n_vehicles);
        if n == 0 || r < n {
            return Err(Error::Instance(format!("need 1 <= N <= R, got N={n}, R={r}")));
        }
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|row| row.len() == r);
        if self.demands.len() != n
            || self.vehicles.len() != r
            || !shape_ok(&self.mean_eff)
            || !shape_ok(&self.eff_halfwidth)
        {
            return Err(Error::Instance("array sizes disagree with n_demands/n_vehicles".into()));
        }
        for i in 0..n {
            for j in 0..r {
                let (m, h) = (self.mean_eff[i][j], self.eff_halfwidth[i][j]);
                if !(m.is_finite() && m > 0.0 && h >= 0.0 && h <= m) {
                    return Err(Error::Instance(format!(
                        "pair ({i},{j}) has mean {m} and halfwidth {h}; need 0 <= halfwidth <= mean"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_pairs(&self) -> usize {
        self.n_demands * self.n_vehicles
    }

    pub fn ground(&self) -> GroundSet {
        let labels = (0..self.n_pairs())
            .map(|e| {
                let (i, j) = self.pair(ElementId(e));
                format!("d{i}-v{j}")
            })
            .collect();
        GroundSet::with_labels(labels).expect("instance has at least one pair")
    }

    /// One vehicle per demand at most: blocks are vehicles with capacity 1.
    pub fn matroid(&self) -> Matroid {
        let ground = GroundSet::new(self.n_pairs()).expect("non-empty");
        let block_of = (0..self.n_pairs()).map(|e| e % self.n_vehicles).collect();
        Matroid::partition(&ground, block_of, vec![1; self.n_vehicles]).expect("valid partition")
    }

    /// `(demand, vehicle)` of a pair element.
    pub fn pair(&self, e: ElementId) -> (usize, usize) {
        (e.0 / self.n_vehicles, e.0 % self.n_vehicles)
    }

    pub fn element(&self, demand: usize, vehicle: usize) -> ElementId {
        ElementId(demand * self.n_vehicles + vehicle)
    }

    /// Efficiency interval `[lo, hi]` of a pair.
    pub fn interval(&self, e: ElementId) -> (f64, f64) {
        let (i, j) = self.pair(e);
        let (m, h) = (self.mean_eff[i][j], self.eff_halfwidth[i][j]);
        (m - h, m + h)
    }

    /// Efficiency of pair `e` in scenario `k`.
    pub fn sample_efficiency(&self, e: ElementId, k: usize) -> f64 {
        let (lo, hi) = self.interval(e);
        lo + (hi - lo) * rng::uniform(self.seed, Domain::ModEfficiency, k as u64, e.0 as u64)
    }
}

/// Σ over demands of the best sampled efficiency among assigned vehicles.
pub fn mod_utility(inst: &ModInstance, s: &ElementSet, scenario: usize) -> Result<f64> {
    let m = inst.matroid();
    if !m.contains(s)? {
        return Err(Error::MatroidViolation("a vehicle is assigned to more than one demand".into()));
    }
    let mut best = vec![0.0f64; inst.n_demands];
    for e in s.iter() {
        let (i, _) = inst.pair(e);
        best[i] = best[i].max(inst.sample_efficiency(e, scenario));
    }
    Ok(best.iter().sum())
}

/// `N · max` interval upper endpoint; bounds every sampled utility.
pub fn mod_gamma(inst: &ModInstance) -> f64 {
    let top = (0..inst.n_pairs())
        .map(|e| inst.interval(ElementId(e)).1)
        .fold(0.0, f64::max);
    inst.n_demands as f64 * top
}

/// Scenario table for any "sum over demands of the best assigned pair" utility.
///
/// Pairs need not form a full demand × vehicle grid, which lets the street
/// simulator drop unreachable pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentTable {
    n_demands: usize,
    demand_of: Vec<usize>,
    n: usize,
    seed: u64,
    /// `samples[k * n_pairs + e]`
    samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentState {
    /// `best[k * n_demands + i]`
    best: Vec<f64>,
}

impl AssignmentTable {
    /// Table with `sample(e, k)` evaluated once for every pair and scenario.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(
        n_demands: usize,
        demand_of: Vec<usize>,
        n: usize,
        seed: u64,
        mut sample: F,
    ) -> Self {
        let p = demand_of.len();
        let mut samples = Vec::with_capacity(n * p);
        for k in 0..n {
            for e in 0..p {
                samples.push(sample(e, k));
            }
        }
        Self {
            n_demands,
            demand_of,
            n,
            seed,
            samples,
        }
    }

    /// From per-pair sample columns: `columns[e][k]`.
    pub fn from_columns(n_demands: usize, demand_of: Vec<usize>, seed: u64, columns: &[Vec<f64>]) -> Self {
        let n = columns.first().map_or(0, Vec::len);
        Self::from_fn(n_demands, demand_of, n, seed, |e, k| columns[e][k])
    }

    pub fn sample(&self, e: ElementId, k: usize) -> f64 {
        self.samples[k * self.demand_of.len() + e.0]
    }

    pub fn demand_of(&self, e: ElementId) -> usize {
        self.demand_of[e.0]
    }

    /// Largest sample over all pairs and scenarios.
    pub fn max_sample(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }
}

impl ScenarioTable for AssignmentTable {
    type State = AssignmentState;

    fn n_scenarios(&self) -> usize {
        self.n
    }

    fn ground_size(&self) -> usize {
        self.demand_of.len()
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn empty_state(&self) -> AssignmentState {
        AssignmentState {
            best: vec![0.0; self.n * self.n_demands],
        }
    }

    fn insert(&self, state: &mut AssignmentState, e: ElementId) {
        let i = self.demand_of[e.0];
        for k in 0..self.n {
            let b = &mut state.best[k * self.n_demands + i];
            *b = b.max(self.sample(e, k));
        }
    }

    fn value(&self, state: &AssignmentState, k: usize) -> f64 {
        state.best[k * self.n_demands..(k + 1) * self.n_demands].iter().sum()
    }

    fn value_with(&self, state: &AssignmentState, e: ElementId, k: usize) -> f64 {
        let i = self.demand_of[e.0];
        let x = self.sample(e, k);
        state.best[k * self.n_demands..(k + 1) * self.n_demands]
            .iter()
            .enumerate()
            .map(|(d, &b)| if d == i { b.max(x) } else { b })
            .sum()
    }
}

/// Shared scenario table of `n` efficiency draws for every pair.
pub fn mod_scenarios(inst: &ModInstance, n: usize) -> AssignmentTable {
    let demand_of = (0..inst.n_pairs()).map(|e| e / inst.n_vehicles).collect();
    AssignmentTable::from_fn(inst.n_demands, demand_of, n, inst.seed, |e, k| {
        inst.sample_efficiency(ElementId(e), k)
    })
}
