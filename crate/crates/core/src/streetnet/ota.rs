//! Online triggering assignment on a street network, with the offline and
//! all-step baselines.
//!
//! Each step advances the clock by the smallest time any moving vehicle
//! needs to reach its next intersection. A vehicle at a new intersection
//! first draws its real-time wait there, then traverses the next edge. Waits
//! are drawn from the stream keyed by `(vehicle, node, visit)`, so every mode
//! sees the same wait for the same visit.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{path_edge_time, Path, ShortestPathTree, StreetNetwork};
use crate::casestudies::AssignmentTable;
use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::risk::RiskParams;
use crate::rng::{self, Domain};
use crate::sets::{ElementId, GroundSet};
use crate::sga::sga_solve;

/// Arrivals within this many seconds of the step end count as simultaneous.
pub const TIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OtaMode {
    /// Trigger on remaining path length and degree.
    OtaStreet,
    /// Trigger on mean and variance of remaining travel time.
    OtaGeneral,
    /// Assign once.
    Offline,
    /// Reassign at every step.
    AllStep,
}

impl OtaMode {
    pub const ALL: [OtaMode; 4] = [OtaMode::OtaStreet, OtaMode::OtaGeneral, OtaMode::Offline, OtaMode::AllStep];

    pub fn name(self) -> &'static str {
        match self {
            OtaMode::OtaStreet => "ota-street",
            OtaMode::OtaGeneral => "ota-general",
            OtaMode::Offline => "offline",
            OtaMode::AllStep => "all-step",
        }
    }
}

impl fmt::Display for OtaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OtaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OtaMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode {s:?}; expected ota-street, ota-general, offline or all-step")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtaConfig {
    pub alpha: f64,
    pub gamma_trigger: f64,
    /// Scenarios per assignment.
    pub n_s: usize,
    /// τ grid resolution: Δ = Γ / grid_points.
    pub grid_points: usize,
    pub max_steps: usize,
}

impl Default for OtaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma_trigger: 0.5,
            n_s: 200,
            grid_points: 200,
            max_steps: 100_000,
        }
    }
}

impl OtaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1], got {}", self.alpha)));
        }
        if !(self.gamma_trigger > 0.0 && self.gamma_trigger < 1.0) {
            return Err(Error::Config(format!("gamma_trigger must lie in (0,1), got {}", self.gamma_trigger)));
        }
        if self.n_s == 0 || self.grid_points == 0 || self.max_steps == 0 {
            return Err(Error::Config("n_s, grid_points and max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Assignment after a step: demand index per vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub assignment: Vec<Option<usize>>,
}

/// Vehicle position in the log: at `node`, or on the edge `node → next`
/// with `fraction` of it behind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleView {
    pub node: usize,
    pub next: Option<usize>,
    pub fraction: f64,
    pub demand: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEvent {
    pub step: usize,
    pub t_step: f64,
    pub clock: f64,
    pub trigger: bool,
    pub recovery: bool,
    pub reached: Vec<bool>,
    pub vehicles: Vec<VehicleView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtaRun {
    pub mode: OtaMode,
    pub seed: u64,
    pub config: OtaConfig,
    pub assignments: Vec<Snapshot>,
    /// Steps where the trigger (or the all-step schedule) reassigned.
    pub trigger_steps: Vec<usize>,
    /// Steps where every vehicle was idle with demands left, forcing a new
    /// assignment regardless of mode.
    pub recovery_steps: Vec<usize>,
    pub step_intervals: Vec<f64>,
    pub arrival_time: f64,
    pub assignment_count: usize,
    pub reached_at: Vec<f64>,
    pub events: Vec<StepEvent>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl OtaRun {
    /// One JSON object per line: the initial state, then every step.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("serializable"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Vehicle {
    node: usize,
    /// Remaining route, starting at `node`. Moving iff it has an edge.
    route: Vec<usize>,
    demand: Option<usize>,
    /// No wait drawn yet at `node`.
    fresh: bool,
    wait_rem: f64,
    edge_rem: f64,
    on_edge: bool,
}

impl Vehicle {
    fn moving(&self) -> bool {
        self.route.len() >= 2
    }

    fn t_next(&self) -> f64 {
        if self.moving() {
            self.wait_rem + self.edge_rem
        } else {
            f64::INFINITY
        }
    }

    /// Node where a new route would start.
    fn start(&self) -> usize {
        if self.on_edge {
            self.route[1]
        } else {
            self.node
        }
    }

    /// Nodes still ahead whose wait is unknown, plus known time and distance
    /// already committed.
    fn committed(&self, net: &StreetNetwork) -> (usize, f64, f64) {
        if self.on_edge {
            let e = net.edge_between(self.route[0], self.route[1]).expect("route edge");
            (0, self.edge_rem, e.maxv_mps * self.edge_rem / net.beta2)
        } else if self.fresh {
            (0, 0.0, 0.0)
        } else {
            (1, self.wait_rem, 0.0)
        }
    }
}

struct Remaining {
    length: f64,
    degree: usize,
    mean: f64,
    variance: f64,
}

fn remaining(net: &StreetNetwork, v: &Vehicle) -> Remaining {
    let nodes = if v.on_edge { &v.route[1..] } else { &v.route[..] };
    let path = Path {
        nodes: nodes.to_vec(),
        length: 0.0,
        degree: 0,
    };
    let (skip, known_t, known_len) = v.committed(net);
    let length = known_len
        + nodes
            .windows(2)
            .map(|w| net.edge_between(w[0], w[1]).expect("adjacent").len_m)
            .sum::<f64>();
    let degree = nodes.iter().map(|&n| net.degree(n)).sum();
    let mut mean = known_t + path_edge_time(net, &path);
    let mut variance = 0.0;
    for &n in &nodes[skip.min(nodes.len())..] {
        let w = net.wait_model(n);
        mean += w.mean();
        variance += w.variance();
    }
    Remaining {
        length,
        degree,
        mean,
        variance,
    }
}

struct Sim<'a> {
    net: &'a StreetNetwork,
    cfg: OtaConfig,
    seed: u64,
    demands: &'a [usize],
    trees: Vec<ShortestPathTree>,
    vehicles: Vec<Vehicle>,
    visits: Vec<Vec<u64>>,
    reached: Vec<bool>,
    reached_at: Vec<f64>,
    clock: f64,
    /// Dominance triples already acted on or present after the last assignment.
    known: Vec<(usize, usize, usize)>,
}

struct Candidate {
    demand: usize,
    vehicle: usize,
    path: Path,
}

impl Sim<'_> {
    fn all_reached(&self) -> bool {
        self.reached.iter().all(|&r| r)
    }

    fn candidates(&self) -> Vec<Candidate> {
        let mut out = Vec::new();
        for (d, tree) in self.trees.iter().enumerate() {
            if self.reached[d] {
                continue;
            }
            let reach: Vec<(usize, Path)> = self
                .vehicles
                .iter()
                .enumerate()
                .filter_map(|(j, v)| tree.path_from(self.net, v.start()).map(|p| (j, p)))
                .collect();
            for (j, path) in reach {
                out.push(Candidate { demand: d, vehicle: j, path });
            }
        }
        out
    }

    /// Run SGA on efficiencies of the current candidate pairs and apply it.
    fn assign(&mut self) -> Result<()> {
        let cands = self.candidates();
        if cands.is_empty() {
            return Err(Error::Unreachable);
        }
        let open: Vec<usize> = (0..self.demands.len()).filter(|&d| !self.reached[d]).collect();
        let local = |d: usize| open.iter().position(|&o| o == d).expect("open demand");
        let n_s = self.cfg.n_s;
        // planning waits are common random numbers keyed by (vehicle, node)
        let mut waits: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
        let columns: Vec<Vec<f64>> = cands
            .iter()
            .map(|c| {
                let v = &self.vehicles[c.vehicle];
                let (skip, known_t, _) = v.committed(self.net);
                let base = known_t + path_edge_time(self.net, &c.path);
                let mut t = vec![base; n_s];
                for &node in &c.path.nodes[skip.min(c.path.nodes.len())..] {
                    let w = waits.entry((c.vehicle, node)).or_insert_with(|| {
                        let model = self.net.wait_model(node);
                        let mut rng = rng::stream(self.seed, Domain::PlanningWait, c.vehicle as u64, node as u64);
                        (0..n_s).map(|_| model.sample(&mut rng)).collect()
                    });
                    for (tk, wk) in t.iter_mut().zip(w.iter()) {
                        *tk += wk;
                    }
                }
                t.into_iter().map(|tk| 1.0 / tk.max(TIME_TOLERANCE)).collect()
            })
            .collect();
        let demand_of = cands.iter().map(|c| local(c.demand)).collect();
        let table = AssignmentTable::from_columns(open.len(), demand_of, self.seed, &columns);

        let ground = GroundSet::new(cands.len())?;
        let block_of = cands.iter().map(|c| c.vehicle).collect();
        let matroid = Matroid::partition(&ground, block_of, vec![1; self.vehicles.len()])?;
        let gamma = open.len() as f64 * table.max_sample();
        let params = RiskParams::new(self.cfg.alpha, gamma, gamma / self.cfg.grid_points as f64)?;
        let result = sga_solve(&table, &matroid, &ground, &params)?;

        let mut chosen: Vec<Option<&Candidate>> = vec![None; self.vehicles.len()];
        for e in result.selected.iter() {
            let c = &cands[e.0];
            chosen[c.vehicle] = Some(c);
        }
        for (j, pick) in chosen.into_iter().enumerate() {
            let v = &mut self.vehicles[j];
            match pick {
                Some(c) => {
                    v.demand = Some(c.demand);
                    if v.on_edge {
                        v.route = std::iter::once(v.node).chain(c.path.nodes.iter().copied()).collect();
                    } else {
                        v.route = c.path.nodes.clone();
                    }
                }
                None => {
                    v.demand = None;
                    v.route.truncate(if v.on_edge { 2 } else { 1 });
                }
            }
            if !v.on_edge && !v.fresh {
                v.edge_rem = if v.moving() {
                    self.net.edge_time(self.net.edge_between(v.route[0], v.route[1]).expect("route edge"))
                } else {
                    0.0
                };
            }
        }
        self.settle();
        Ok(())
    }

    /// Mark demands whose assigned vehicle stands on them, and release every
    /// vehicle bound to a reached demand.
    fn settle(&mut self) {
        for v in &self.vehicles {
            if let Some(d) = v.demand {
                if !v.on_edge && v.route.len() == 1 && v.node == self.demands[d] && !self.reached[d] {
                    self.reached[d] = true;
                    self.reached_at[d] = self.clock;
                }
            }
        }
        for v in &mut self.vehicles {
            if v.demand.is_some_and(|d| self.reached[d]) {
                v.demand = None;
                v.route.truncate(if v.on_edge { 2 } else { 1 });
                if !v.on_edge {
                    v.edge_rem = 0.0;
                }
            }
        }
    }

    fn draw_waits(&mut self) {
        for (j, v) in self.vehicles.iter_mut().enumerate() {
            if v.fresh && v.moving() {
                let visit = &mut self.visits[j][v.node];
                let u = rng::uniform(self.seed, Domain::RealtimeWait, j as u64, (v.node as u64) << 32 | *visit);
                *visit += 1;
                v.wait_rem = self.net.wait_model(v.node).quantile(u);
                v.edge_rem = self.net.edge_time(self.net.edge_between(v.route[0], v.route[1]).expect("route edge"));
                v.fresh = false;
                v.on_edge = false;
            }
        }
    }

    fn advance(&mut self, t_step: f64) {
        for v in &mut self.vehicles {
            if !v.moving() {
                continue;
            }
            if v.t_next() <= t_step + TIME_TOLERANCE {
                v.route.remove(0);
                v.node = v.route[0];
                v.fresh = true;
                v.wait_rem = 0.0;
                v.edge_rem = 0.0;
                v.on_edge = false;
            } else if v.wait_rem >= t_step {
                v.wait_rem -= t_step;
            } else {
                v.edge_rem -= t_step - v.wait_rem;
                v.wait_rem = 0.0;
                v.on_edge = true;
            }
        }
        self.clock += t_step;
        self.settle();
    }

    /// Whether vehicle `j` could serve an open demand other than `d`.
    fn has_alternative(&self, j: usize, d: usize) -> bool {
        let start = self.vehicles[j].start();
        (0..self.demands.len()).any(|o| {
            o != d && !self.reached[o] && self.trees[o].distance(start).is_finite()
        })
    }

    /// `(demand, faster, slower)` triples satisfying the mode's trigger rule.
    fn dominated(&self, mode: OtaMode) -> Vec<(usize, usize, usize)> {
        let g = self.cfg.gamma_trigger;
        let mut out = Vec::new();
        for d in 0..self.demands.len() {
            if self.reached[d] {
                continue;
            }
            let rem: Vec<(usize, Remaining)> = self
                .vehicles
                .iter()
                .enumerate()
                .filter(|(_, v)| v.demand == Some(d))
                .map(|(j, v)| (j, remaining(self.net, v)))
                .collect();
            for (a, ra) in &rem {
                for (b, rb) in &rem {
                    let fires = a != b
                        && match mode {
                            OtaMode::OtaStreet => ra.length <= g * rb.length && ra.degree <= rb.degree,
                            OtaMode::OtaGeneral => ra.mean <= g * rb.mean && ra.variance <= rb.variance,
                            _ => false,
                        };
                    if fires && self.has_alternative(*b, d) {
                        out.push((d, *a, *b));
                    }
                }
            }
        }
        out
    }

    fn view(&self) -> Vec<VehicleView> {
        self.vehicles
            .iter()
            .map(|v| {
                let (next, fraction) = if v.on_edge {
                    let full = self.net.edge_time(self.net.edge_between(v.route[0], v.route[1]).expect("edge"));
                    (Some(v.route[1]), 1.0 - v.edge_rem / full)
                } else {
                    (None, 0.0)
                };
                VehicleView {
                    node: v.node,
                    next,
                    fraction,
                    demand: v.demand,
                }
            })
            .collect()
    }

    fn snapshot(&self, step: usize) -> Snapshot {
        Snapshot {
            step,
            assignment: self.vehicles.iter().map(|v| v.demand).collect(),
        }
    }

    fn event(&self, step: usize, t_step: f64, trigger: bool, recovery: bool) -> StepEvent {
        StepEvent {
            step,
            t_step,
            clock: self.clock,
            trigger,
            recovery,
            reached: self.reached.clone(),
            vehicles: self.view(),
        }
    }
}

/// Simulate until every demand is reached.
///
/// `vehicles` and `demands` are start and target node ids.
pub fn ota_run(
    net: &StreetNetwork,
    vehicles: &[usize],
    demands: &[usize],
    cfg: &OtaConfig,
    seed: u64,
    mode: OtaMode,
) -> Result<OtaRun> {
    let started = Instant::now();
    cfg.validate()?;
    if demands.is_empty() {
        return Err(Error::Config("need at least one demand".into()));
    }
    if vehicles.len() < demands.len() {
        return Err(Error::Config(format!(
            "need at least as many vehicles as demands, got R={} < N={}",
            vehicles.len(),
            demands.len()
        )));
    }
    for &v in vehicles.iter().chain(demands) {
        net.check_node(v)?;
    }
    let trees: Vec<ShortestPathTree> = demands.iter().map(|&d| net.tree_to(d)).collect();
    if trees.iter().any(|t| vehicles.iter().all(|&v| !t.distance(v).is_finite())) {
        return Err(Error::Unreachable);
    }

    let mut sim = Sim {
        net,
        cfg: *cfg,
        seed,
        demands,
        trees,
        vehicles: vehicles
            .iter()
            .map(|&n| Vehicle {
                node: n,
                route: vec![n],
                demand: None,
                fresh: true,
                wait_rem: 0.0,
                edge_rem: 0.0,
                on_edge: false,
            })
            .collect(),
        visits: vec![vec![0; net.n_nodes()]; vehicles.len()],
        reached: vec![false; demands.len()],
        reached_at: vec![f64::NAN; demands.len()],
        clock: 0.0,
        known: Vec::new(),
    };

    sim.assign()?;
    let mut assignments = vec![sim.snapshot(0)];
    let mut events = vec![sim.event(0, 0.0, false, false)];
    let mut trigger_steps = Vec::new();
    let mut recovery_steps = Vec::new();
    let mut step_intervals = Vec::new();
    let mut step = 0;

    while !sim.all_reached() {
        step += 1;
        if step > cfg.max_steps {
            return Err(Error::StepLimit(cfg.max_steps));
        }
        let mut recovery = false;
        if !sim.vehicles.iter().any(Vehicle::moving) {
            sim.assign()?;
            recovery_steps.push(step);
            recovery = true;
            if sim.all_reached() {
                step_intervals.push(0.0);
                assignments.push(sim.snapshot(step));
                events.push(sim.event(step, 0.0, false, true));
                break;
            }
            if !sim.vehicles.iter().any(Vehicle::moving) {
                return Err(Error::Unreachable);
            }
        }
        sim.draw_waits();
        let t_step = sim.vehicles.iter().map(Vehicle::t_next).fold(f64::INFINITY, f64::min);
        sim.advance(t_step);
        step_intervals.push(t_step);

        let mut trigger = false;
        if !sim.all_reached() {
            trigger = match mode {
                OtaMode::Offline => false,
                OtaMode::AllStep => sim.candidates().len() >= 2,
                OtaMode::OtaStreet | OtaMode::OtaGeneral => {
                    let now = sim.dominated(mode);
                    let fresh = now.iter().any(|t| !sim.known.contains(t));
                    sim.known = now;
                    fresh
                }
            };
            if trigger {
                sim.assign()?;
                trigger_steps.push(step);
                if matches!(mode, OtaMode::OtaStreet | OtaMode::OtaGeneral) {
                    sim.known = sim.dominated(mode);
                }
            }
        }
        assignments.push(sim.snapshot(step));
        events.push(sim.event(step, t_step, trigger, recovery));
    }

    let arrival_time = step_intervals.iter().sum();
    Ok(OtaRun {
        mode,
        seed,
        config: *cfg,
        assignments,
        assignment_count: 1 + trigger_steps.len() + recovery_steps.len(),
        trigger_steps,
        recovery_steps,
        step_intervals,
        arrival_time,
        reached_at: sim.reached_at,
        events,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Distinct random nodes: the first `n_demands` are demands, the rest vehicles.
pub fn random_placement(net: &StreetNetwork, n_vehicles: usize, n_demands: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let total = n_vehicles + n_demands;
    if total > net.n_nodes() {
        return Err(Error::Config(format!(
            "{total} distinct nodes requested from a network of {}",
            net.n_nodes()
        )));
    }
    let mut rng = rng::stream(seed, Domain::Placement, n_vehicles as u64, n_demands as u64);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, net.n_nodes(), total).into_vec();
    let vehicles = picked.split_off(n_demands);
    Ok((vehicles, picked))
}

/// Demand picked by each vehicle, as element ids of the full pair grid.
pub fn assignment_elements(snapshot: &Snapshot, n_vehicles: usize) -> Vec<ElementId> {
    snapshot
        .assignment
        .iter()
        .enumerate()
        .filter_map(|(j, d)| d.map(|d| ElementId(d * n_vehicles + j)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streetnet::synth_city;

    #[test]
    fn single_pair_needs_one_assignment() {
        let net = synth_city(3, 3, 1).unwrap();
        for mode in OtaMode::ALL {
            let run = ota_run(&net, &[0], &[8], &OtaConfig::default(), 4, mode).unwrap();
            assert_eq!(run.assignment_count, 1, "{mode}");
            assert!(run.trigger_steps.is_empty());
            let sum: f64 = run.step_intervals.iter().sum();
            assert_eq!(run.arrival_time, sum);
        }
    }

    #[test]
    fn offline_never_triggers() {
        let net = synth_city(4, 4, 2).unwrap();
        let run = ota_run(&net, &[0, 5, 10], &[15, 3], &OtaConfig::default(), 1, OtaMode::Offline).unwrap();
        assert!(run.trigger_steps.is_empty());
        assert!(run.reached_at.iter().all(|t| t.is_finite()));
    }

    #[test]
    fn config_errors() {
        let net = synth_city(3, 3, 1).unwrap();
        let cfg = OtaConfig::default();
        assert!(matches!(ota_run(&net, &[0], &[4, 8], &cfg, 0, OtaMode::Offline), Err(Error::Config(_))));
        let bad = OtaConfig { gamma_trigger: 1.0, ..cfg };
        assert!(matches!(ota_run(&net, &[0], &[4], &bad, 0, OtaMode::Offline), Err(Error::Config(_))));
        assert!("sometimes".parse::<OtaMode>().is_err());
        assert_eq!("all-step".parse::<OtaMode>().unwrap(), OtaMode::AllStep);
    }

    #[test]
    fn vehicle_already_on_demand() {
        let net = synth_city(3, 3, 1).unwrap();
        let run = ota_run(&net, &[4], &[4], &OtaConfig::default(), 0, OtaMode::OtaStreet).unwrap();
        assert_eq!(run.arrival_time, 0.0);
        assert_eq!(run.reached_at, vec![0.0]);
    }
}
