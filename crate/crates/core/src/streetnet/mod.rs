//! Directed street networks with stochastic intersection waits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::check_schema;
use crate::rng::TruncatedNormal;

pub mod city;
pub mod ota;

pub use city::{synth_city, synth_city_with, CityOptions};
pub use ota::{ota_run, OtaConfig, OtaMode, OtaRun};

pub const STREETNET_SCHEMA: &str = "streetnet-v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub len_m: f64,
    pub maxv_mps: f64,
}

/// On-disk form of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub schema: String,
    pub beta1: f64,
    pub beta2: f64,
    pub t_max_factor: f64,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreetNetwork {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    /// Wait variance per unit degree.
    pub beta1: f64,
    /// Edge time multiplier.
    pub beta2: f64,
    /// Maximum wait per unit degree.
    pub t_max_factor: f64,
    degree: Vec<usize>,
    out: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl StreetNetwork {
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>, beta1: f64, beta2: f64, t_max_factor: f64) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::Instance("network has no nodes".into()));
        }
        if let Some((i, _)) = nodes.iter().enumerate().find(|(i, nd)| nd.id != *i) {
            return Err(Error::Instance(format!("node at position {i} must have id {i}")));
        }
        if !(beta1 > 0.0 && beta2 >= 1.0 && t_max_factor >= 0.0) {
            return Err(Error::Instance(format!(
                "need beta1 > 0, beta2 >= 1, t_max_factor >= 0; got {beta1}, {beta2}, {t_max_factor}"
            )));
        }
        let mut degree = vec![0; n];
        let mut out = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            if e.from >= n || e.to >= n {
                return Err(Error::Instance(format!("edge {k} references a missing node")));
            }
            if !(e.len_m > 0.0 && e.maxv_mps > 0.0) {
                return Err(Error::Instance(format!("edge {k} needs positive length and speed")));
            }
            degree[e.from] += 1;
            degree[e.to] += 1;
            out[e.from].push(k);
            incoming[e.to].push(k);
        }
        Ok(Self {
            nodes,
            edges,
            beta1,
            beta2,
            t_max_factor,
            degree,
            out,
            incoming,
        })
    }

    pub fn from_file(f: NetworkFile) -> Result<Self> {
        check_schema(&f.schema, STREETNET_SCHEMA)?;
        Self::new(f.nodes, f.edges, f.beta1, f.beta2, f.t_max_factor)
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            schema: STREETNET_SCHEMA.to_string(),
            beta1: self.beta1,
            beta2: self.beta2,
            t_max_factor: self.t_max_factor,
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// In-degree plus out-degree.
    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.n_nodes() {
            Ok(())
        } else {
            Err(Error::InvalidElement {
                index: v,
                size: self.n_nodes(),
            })
        }
    }

    /// Shortest edge `u → v`, smallest index on ties.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<&Edge> {
        self.out[u]
            .iter()
            .map(|&k| &self.edges[k])
            .filter(|e| e.to == v)
            .min_by(|a, b| a.len_m.total_cmp(&b.len_m))
    }

    /// `β₂ · len / maxv`
    pub fn edge_time(&self, e: &Edge) -> f64 {
        self.beta2 * e.len_m / e.maxv_mps
    }

    /// Wait distribution at an intersection.
    pub fn wait_model(&self, v: usize) -> TruncatedNormal {
        let d = self.degree[v] as f64;
        TruncatedNormal::new(self.beta1 * d, self.t_max_factor * d)
    }

    /// Distances to `target` from every node.
    pub fn tree_to(&self, target: usize) -> ShortestPathTree {
        let n = self.n_nodes();
        let mut dist = vec![f64::INFINITY; n];
        dist[target] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Entry(0.0, target));
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &k in &self.incoming[u] {
                let e = &self.edges[k];
                let nd = d + e.len_m;
                if nd < dist[e.from] {
                    dist[e.from] = nd;
                    heap.push(Entry(nd, e.from));
                }
            }
        }
        ShortestPathTree { target, dist }
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Node sequence with its length and degree sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub length: f64,
    /// Σ deg(v) over the nodes of the path.
    pub degree: usize,
}

impl Path {
    pub fn edge_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

/// All shortest distances to one target.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub target: usize,
    pub dist: Vec<f64>,
}

fn on_shortest(len: f64, rest: f64, total: f64) -> bool {
    (len + rest - total).abs() <= 1e-9 * total.max(1.0)
}

impl ShortestPathTree {
    pub fn distance(&self, from: usize) -> f64 {
        self.dist[from]
    }

    /// Lexicographically smallest shortest path from `from`, if reachable.
    pub fn path_from(&self, net: &StreetNetwork, from: usize) -> Option<Path> {
        if !self.dist[from].is_finite() {
            return None;
        }
        let mut nodes = vec![from];
        let mut u = from;
        while u != self.target {
            let next = net.out[u]
                .iter()
                .map(|&k| &net.edges[k])
                .filter(|e| on_shortest(e.len_m, self.dist[e.to], self.dist[u]) && self.dist[e.to] < self.dist[u])
                .map(|e| e.to)
                .min()?;
            nodes.push(next);
            u = next;
        }
        let length = nodes
            .windows(2)
            .map(|w| net.edge_between(w[0], w[1]).expect("consecutive path nodes are adjacent").len_m)
            .sum();
        let degree = nodes.iter().map(|&v| net.degree(v)).sum();
        Some(Path { nodes, length, degree })
    }
}

/// Minimum-length path; `Ok(None)` when `to` is unreachable.
pub fn shortest_path(net: &StreetNetwork, from: usize, to: usize) -> Result<Option<Path>> {
    net.check_node(from)?;
    net.check_node(to)?;
    Ok(net.tree_to(to).path_from(net, from))
}

/// Σ edge times along the path.
pub fn path_edge_time(net: &StreetNetwork, path: &Path) -> f64 {
    path.nodes
        .windows(2)
        .map(|w| net.edge_time(net.edge_between(w[0], w[1]).expect("adjacent")))
        .sum()
}

/// `n` draws of Σ_v wait(v) + Σ_w β₂·len(w)/maxv(w), waits drawn node by
/// node within each sample.
pub fn path_travel_time_samples<R: Rng + ?Sized>(net: &StreetNetwork, path: &Path, n: usize, rng: &mut R) -> Vec<f64> {
    let edges = path_edge_time(net, path);
    let models: Vec<TruncatedNormal> = path.nodes.iter().map(|&v| net.wait_model(v)).collect();
    (0..n)
        .map(|_| models.iter().map(|m| m.sample(rng)).sum::<f64>() + edges)
        .collect()
}

/// Mean and variance of the path travel time.
pub fn path_travel_time_moments(net: &StreetNetwork, path: &Path) -> (f64, f64) {
    let edges = path_edge_time(net, path);
    path.nodes.iter().fold((edges, 0.0), |(m, v), &node| {
        let w = net.wait_model(node);
        (m + w.mean(), v + w.variance())
    })
}
