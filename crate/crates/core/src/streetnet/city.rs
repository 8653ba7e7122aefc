//! Synthetic grid cities.

use rand::Rng;

use super::{Edge, Node, StreetNetwork};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Spacing of node coordinates, meters.
pub const BLOCK_M: f64 = 200.0;
pub const SPEEDS_MPS: [f64; 4] = [5.0, 10.0, 15.0, 20.0];
pub const MIN_EDGE_M: f64 = 80.0;
pub const MAX_EDGE_M: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityOptions {
    /// Chance that a grid square gets a two-way diagonal.
    pub diagonal_prob: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub t_max_factor: f64,
}

impl Default for CityOptions {
    fn default() -> Self {
        Self {
            diagonal_prob: 0.0,
            beta1: 1.0,
            beta2: 1.0,
            t_max_factor: 5.0,
        }
    }
}

/// Two-way `rows × cols` grid with random lengths and speed limits.
pub fn synth_city(rows: usize, cols: usize, seed: u64) -> Result<StreetNetwork> {
    synth_city_with(rows, cols, seed, CityOptions::default())
}

pub fn synth_city_with(rows: usize, cols: usize, seed: u64, opts: CityOptions) -> Result<StreetNetwork> {
    if rows < 2 || cols < 2 {
        return Err(Error::param(format!("city needs at least 2x2 nodes, got {rows}x{cols}")));
    }
    if !(0.0..=1.0).contains(&opts.diagonal_prob) {
        return Err(Error::param("diagonal_prob must lie in [0,1]"));
    }
    let mut rng = rng::stream(seed, Domain::City, rows as u64, cols as u64);
    let id = |r: usize, c: usize| r * cols + c;
    let nodes = (0..rows * cols)
        .map(|i| Node {
            id: i,
            x: (i % cols) as f64 * BLOCK_M,
            y: (i / cols) as f64 * BLOCK_M,
        })
        .collect();
    let mut edges = Vec::new();
    let mut street = |rng: &mut rand_chacha::ChaCha8Rng, a: usize, b: usize| {
        let len_m = rng.random_range(MIN_EDGE_M..=MAX_EDGE_M);
        let maxv_mps = SPEEDS_MPS[rng.random_range(0..SPEEDS_MPS.len())];
        edges.push(Edge { from: a, to: b, len_m, maxv_mps });
        edges.push(Edge { from: b, to: a, len_m, maxv_mps });
    };
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                street(&mut rng, id(r, c), id(r, c + 1));
            }
            if r + 1 < rows {
                street(&mut rng, id(r, c), id(r + 1, c));
            }
            if opts.diagonal_prob > 0.0 && r + 1 < rows && c + 1 < cols && rng.random::<f64>() < opts.diagonal_prob {
                street(&mut rng, id(r, c), id(r + 1, c + 1));
            }
        }
    }
    StreetNetwork::new(nodes, edges, opts.beta1, opts.beta2, opts.t_max_factor)
}
