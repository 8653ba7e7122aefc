//! Sensor selection with independent failures on an occupancy grid.
//!
//! Visibility is cell-to-cell line of sight: a free cell is visible from a
//! candidate if the segment between the two cell centers passes through no
//! obstacle cell. A segment through the exact corner of four cells is
//! blocked when either of the two side cells is an obstacle.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::BRUTE_FORCE_MAX_GROUND;
use crate::io::check_schema;
use crate::matroid::Matroid;
use crate::risk::ScenarioTable;
use crate::rng::{self, Domain};
use crate::sets::{ElementId, ElementSet, GroundSet};

pub const COVERAGE_SCHEMA: &str = "coverage-instance-v1";

/// Axis-aligned block of obstacle cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageInstance {
    pub schema: String,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// One string per row, `#` obstacle and `.` free; row 0 is `y = 0`.
    pub grid: Vec<String>,
    pub budget: usize,
    /// Candidate cells as `[x, y]`.
    pub candidates: Vec<[usize; 2]>,
    /// Visible free cells per candidate, as sorted `y * width + x` indices.
    pub footprints: Vec<Vec<usize>>,
    pub success_prob: Vec<f64>,
}

/// Occupancy grid, `true` for obstacles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    blocked: Vec<bool>,
}

impl Grid {
    pub fn new(width: usize, height: usize, obstacles: &[Rect]) -> Self {
        let mut blocked = vec![false; width * height];
        for r in obstacles {
            for y in r.y..(r.y + r.h).min(height) {
                for x in r.x..(r.x + r.w).min(width) {
                    blocked[y * width + x] = true;
                }
            }
        }
        Self {
            width,
            height,
            blocked,
        }
    }

    pub fn from_rows(rows: &[String]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut blocked = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(Error::Instance("grid rows differ in length".into()));
            }
            for c in row.chars() {
                blocked.push(match c {
                    '#' => true,
                    '.' => false,
                    other => return Err(Error::Instance(format!("unexpected grid character {other:?}"))),
                });
            }
        }
        Ok(Self {
            width,
            height,
            blocked,
        })
    }

    pub fn rows(&self) -> Vec<String> {
        self.blocked
            .chunks(self.width)
            .map(|r| r.iter().map(|&b| if b { '#' } else { '.' }).collect())
            .collect()
    }

    pub fn is_blocked(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return true;
        }
        self.blocked[y as usize * self.width + x as usize]
    }

    pub fn free_cells(&self) -> Vec<usize> {
        (0..self.blocked.len()).filter(|&i| !self.blocked[i]).collect()
    }

    pub fn free_count(&self) -> usize {
        self.blocked.iter().filter(|b| !**b).count()
    }

    /// Line of sight between the centers of two cells.
    pub fn visible(&self, from: [usize; 2], to: [usize; 2]) -> bool {
        let (mut x, mut y) = (from[0] as i64, from[1] as i64);
        let (dx, dy) = (to[0] as i64 - x, to[1] as i64 - y);
        let (sx, sy) = (dx.signum(), dy.signum());
        let (nx, ny) = (dx.abs(), dy.abs());
        let (mut ix, mut iy) = (0, 0);
        while ix < nx || iy < ny {
            // next x boundary at (2ix+1)/(2nx) of the segment, y at (2iy+1)/(2ny)
            let tx = (2 * ix + 1) * ny;
            let ty = (2 * iy + 1) * nx;
            if ix < nx && (iy == ny || tx < ty) {
                x += sx;
                ix += 1;
            } else if iy < ny && (ix == nx || ty < tx) {
                y += sy;
                iy += 1;
            } else {
                if self.is_blocked(x + sx, y) || self.is_blocked(x, y + sy) {
                    return false;
                }
                x += sx;
                y += sy;
                ix += 1;
                iy += 1;
            }
            if self.is_blocked(x, y) {
                return false;
            }
        }
        true
    }

    /// Sorted indices of free cells visible from `cell`, including itself.
    pub fn footprint(&self, cell: [usize; 2]) -> Vec<usize> {
        self.free_cells()
            .into_iter()
            .filter(|&c| self.visible(cell, [c % self.width, c / self.width]))
            .collect()
    }
}

/// The three-obstacle 20×20 layout used by the bundled experiments.
pub fn default_obstacles() -> Vec<Rect> {
    vec![
        Rect { x: 4, y: 3, w: 3, h: 8 },
        Rect { x: 11, y: 2, w: 6, h: 3 },
        Rect { x: 10, y: 12, w: 4, h: 5 },
    ]
}

/// `count` random rectangles with sides between 2 and a quarter of the grid.
pub fn random_obstacles(width: usize, height: usize, count: usize, seed: u64) -> Vec<Rect> {
    let mut rng = rng::stream(seed, Domain::CoverageLayout, 1, 0);
    let side = |rng: &mut rand_chacha::ChaCha8Rng, dim: usize| {
        let hi = (dim / 4).max(2).min(dim);
        rng.random_range(hi.min(2)..=hi)
    };
    (0..count)
        .map(|_| {
            let w = side(&mut rng, width);
            let h = side(&mut rng, height);
            Rect {
                x: rng.random_range(0..=width - w),
                y: rng.random_range(0..=height - h),
                w,
                h,
            }
        })
        .collect()
}

/// Place `n` candidates uniformly without replacement in the free cells.
pub fn coverage_generate(
    width: usize,
    height: usize,
    obstacles: &[Rect],
    n: usize,
    budget: usize,
    seed: u64,
) -> Result<CoverageInstance> {
    if width == 0 || height == 0 {
        return Err(Error::param("grid must be at least 1x1"));
    }
    if n == 0 || budget == 0 {
        return Err(Error::param("need at least one candidate and a positive budget"));
    }
    let grid = Grid::new(width, height, obstacles);
    let free = grid.free_cells();
    if free.len() < n {
        return Err(Error::Generation(format!(
            "{} free cells cannot hold {n} candidates",
            free.len()
        )));
    }
    let mut rng = rng::stream(seed, Domain::CoverageLayout, 0, 0);
    let candidates: Vec<[usize; 2]> = index::sample(&mut rng, free.len(), n)
        .into_iter()
        .map(|i| [free[i] % width, free[i] / width])
        .collect();
    Ok(CoverageInstance::from_grid(seed, &grid, candidates, budget))
}

impl CoverageInstance {
    pub fn from_grid(seed: u64, grid: &Grid, candidates: Vec<[usize; 2]>, budget: usize) -> Self {
        let v_free = grid.free_count() as f64;
        let footprints: Vec<Vec<usize>> = candidates.iter().map(|&c| grid.footprint(c)).collect();
        let success_prob = footprints.iter().map(|f| 1.0 - f.len() as f64 / v_free).collect();
        Self {
            schema: COVERAGE_SCHEMA.to_string(),
            seed,
            width: grid.width,
            height: grid.height,
            grid: grid.rows(),
            budget,
            candidates,
            footprints,
            success_prob,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::from_rows(&self.grid)
    }

    pub fn validate(&self) -> Result<()> {
        check_schema(&self.schema, COVERAGE_SCHEMA)?;
        let grid = self.grid()?;
        if grid.width != self.width || grid.height != self.height {
            return Err(Error::Instance("grid size disagrees with width/height".into()));
        }
        let n = self.candidates.len();
        if n == 0 || self.footprints.len() != n || self.success_prob.len() != n {
            return Err(Error::Instance("candidate arrays are empty or differ in length".into()));
        }
        if self.budget == 0 {
            return Err(Error::Instance("budget must be positive".into()));
        }
        for (i, c) in self.candidates.iter().enumerate() {
            if grid.is_blocked(c[0] as i64, c[1] as i64) {
                return Err(Error::Instance(format!("candidate {i} sits on an obstacle")));
            }
            if self.footprints[i].iter().any(|&cell| {
                cell >= self.width * self.height || grid.is_blocked((cell % self.width) as i64, (cell / self.width) as i64)
            }) {
                return Err(Error::Instance(format!("footprint {i} covers a non-free cell")));
            }
            if !(0.0..=1.0).contains(&self.success_prob[i]) {
                return Err(Error::Instance(format!("success probability {i} outside [0,1]")));
            }
        }
        Ok(())
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn free_count(&self) -> usize {
        self.grid.iter().flat_map(|r| r.chars()).filter(|&c| c == '.').count()
    }

    /// Upper bound on coverage: all free cells.
    pub fn gamma(&self) -> f64 {
        self.free_count() as f64
    }

    pub fn ground(&self) -> GroundSet {
        let labels = self.candidates.iter().map(|c| format!("({},{})", c[0], c[1])).collect();
        GroundSet::with_labels(labels).expect("at least one candidate")
    }

    pub fn matroid(&self) -> Matroid {
        let g = GroundSet::new(self.n_candidates()).expect("non-empty");
        Matroid::uniform(&g, self.budget).expect("positive budget")
    }

    /// Whether sensor `i` works in scenario `k`.
    pub fn alive(&self, i: usize, k: usize) -> bool {
        rng::uniform(self.seed, Domain::SensorAlive, k as u64, i as u64) < self.success_prob[i]
    }

    fn covered(&self, alive: impl Iterator<Item = usize>) -> usize {
        let mut seen = vec![false; self.width * self.height];
        let mut count = 0;
        for i in alive {
            for &c in &self.footprints[i] {
                if !seen[c] {
                    seen[c] = true;
                    count += 1;
                }
            }
        }
        count
    }
}

fn check_budget(inst: &CoverageInstance, s: &ElementSet) -> Result<()> {
    if !inst.matroid().contains(s)? {
        return Err(Error::MatroidViolation(format!(
            "{} sensors selected, budget is {}",
            s.len(),
            inst.budget
        )));
    }
    Ok(())
}

/// Free cells covered by the working sensors of `s` in scenario `k`.
pub fn coverage_utility(inst: &CoverageInstance, s: &ElementSet, scenario: usize) -> Result<f64> {
    check_budget(inst, s)?;
    Ok(inst.covered(s.iter().map(|e| e.0).filter(|&i| inst.alive(i, scenario))) as f64)
}

/// Every working/failed outcome of `s` with its probability and coverage.
///
/// Outcome `b` has sensor `s[t]` working iff bit `t` of `b` is clear, so the
/// all-working outcome comes first.
pub fn coverage_exact_scenarios(inst: &CoverageInstance, s: &ElementSet) -> Result<Vec<(f64, f64)>> {
    if s.len() > BRUTE_FORCE_MAX_GROUND {
        return Err(Error::InstanceTooLarge(format!(
            "{} sensors, enumeration limit is {BRUTE_FORCE_MAX_GROUND}",
            s.len()
        )));
    }
    s.validate(&inst.ground())?;
    let members = s.as_slice();
    Ok((0..1usize << members.len())
        .map(|b| {
            let mut p = 1.0;
            for (t, e) in members.iter().enumerate() {
                let q = inst.success_prob[e.0];
                p *= if b >> t & 1 == 0 { q } else { 1.0 - q };
            }
            let alive = members.iter().enumerate().filter(|(t, _)| b >> t & 1 == 0).map(|(_, e)| e.0);
            (p, inst.covered(alive) as f64)
        })
        .collect())
}

/// Coverage scenarios as per-sensor working flags over bitset footprints.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTable {
    n_sensors: usize,
    words: usize,
    n: usize,
    seed: u64,
    footprints: Vec<Vec<u64>>,
    /// `alive[k * n_sensors + i]`
    alive: Vec<bool>,
    probabilities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageState {
    /// `covered[k * words ..]`
    covered: Vec<u64>,
    count: Vec<u32>,
}

impl CoverageTable {
    fn base(inst: &CoverageInstance) -> (usize, Vec<Vec<u64>>) {
        let words = (inst.width * inst.height).div_ceil(64);
        let footprints = inst
            .footprints
            .iter()
            .map(|f| {
                let mut bits = vec![0u64; words];
                for &c in f {
                    bits[c / 64] |= 1 << (c % 64);
                }
                bits
            })
            .collect();
        (words, footprints)
    }

    /// `n` sampled scenarios.
    pub fn sampled(inst: &CoverageInstance, n: usize) -> Self {
        let (words, footprints) = Self::base(inst);
        let m = inst.n_candidates();
        let mut alive = Vec::with_capacity(n * m);
        for k in 0..n {
            for i in 0..m {
                alive.push(inst.alive(i, k));
            }
        }
        Self {
            n_sensors: m,
            words,
            n,
            seed: inst.seed,
            footprints,
            alive,
            probabilities: None,
        }
    }

    /// All `2^N` working patterns of the candidates, weighted exactly.
    pub fn exact(inst: &CoverageInstance) -> Result<Self> {
        let m = inst.n_candidates();
        if m > BRUTE_FORCE_MAX_GROUND {
            return Err(Error::InstanceTooLarge(format!(
                "{m} candidates, enumeration limit is {BRUTE_FORCE_MAX_GROUND}"
            )));
        }
        let (words, footprints) = Self::base(inst);
        let n = 1usize << m;
        let mut alive = Vec::with_capacity(n * m);
        let mut probabilities = Vec::with_capacity(n);
        for b in 0..n {
            let mut p = 1.0;
            for i in 0..m {
                let up = b >> i & 1 == 0;
                let q = inst.success_prob[i];
                p *= if up { q } else { 1.0 - q };
                alive.push(up);
            }
            probabilities.push(p);
        }
        Ok(Self {
            n_sensors: m,
            words,
            n,
            seed: inst.seed,
            footprints,
            alive,
            probabilities: Some(probabilities),
        })
    }

    pub fn is_alive(&self, i: usize, k: usize) -> bool {
        self.alive[k * self.n_sensors + i]
    }
}

impl ScenarioTable for CoverageTable {
    type State = CoverageState;

    fn n_scenarios(&self) -> usize {
        self.n
    }

    fn ground_size(&self) -> usize {
        self.n_sensors
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn probabilities(&self) -> Option<&[f64]> {
        self.probabilities.as_deref()
    }

    fn empty_state(&self) -> CoverageState {
        CoverageState {
            covered: vec![0; self.n * self.words],
            count: vec![0; self.n],
        }
    }

    fn insert(&self, state: &mut CoverageState, e: ElementId) {
        let fp = &self.footprints[e.0];
        for k in 0..self.n {
            if !self.is_alive(e.0, k) {
                continue;
            }
            let row = &mut state.covered[k * self.words..(k + 1) * self.words];
            let mut added = 0;
            for (c, f) in row.iter_mut().zip(fp) {
                added += (f & !*c).count_ones();
                *c |= f;
            }
            state.count[k] += added;
        }
    }

    fn value(&self, state: &CoverageState, k: usize) -> f64 {
        state.count[k] as f64
    }

    fn value_with(&self, state: &CoverageState, e: ElementId, k: usize) -> f64 {
        let mut v = state.count[k];
        if self.is_alive(e.0, k) {
            let row = &state.covered[k * self.words..(k + 1) * self.words];
            v += row
                .iter()
                .zip(&self.footprints[e.0])
                .map(|(c, f)| (f & !c).count_ones())
                .sum::<u32>();
        }
        v as f64
    }
}
