//! Uniform and partition matroids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{ElementId, ElementSet, GroundSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatroidKind {
    /// At most `rank` elements.
    Uniform { rank: usize },
    /// At most `caps[b]` elements from block `b`; `block_of[e]` names the block of `e`.
    Partition { block_of: Vec<usize>, caps: Vec<usize> },
}

/// Independence system over a ground set of known size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matroid {
    ground_size: usize,
    #[serde(flatten)]
    kind: MatroidKind,
}

impl Matroid {
    pub fn uniform(ground: &GroundSet, rank: usize) -> Result<Self> {
        if rank == 0 || rank > ground.len() {
            return Err(Error::param(format!(
                "uniform rank {rank} must lie in 1..={}",
                ground.len()
            )));
        }
        Ok(Self {
            ground_size: ground.len(),
            kind: MatroidKind::Uniform { rank },
        })
    }

    pub fn partition(ground: &GroundSet, block_of: Vec<usize>, caps: Vec<usize>) -> Result<Self> {
        let m = Self {
            ground_size: ground.len(),
            kind: MatroidKind::Partition { block_of, caps },
        };
        m.validate()?;
        Ok(m)
    }

    /// Re-check the invariants, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            MatroidKind::Uniform { rank } => {
                if *rank == 0 || *rank > self.ground_size {
                    return Err(Error::param(format!("uniform rank {rank} out of range")));
                }
            }
            MatroidKind::Partition { block_of, caps } => {
                if block_of.len() != self.ground_size {
                    return Err(Error::param(format!(
                        "partition assigns {} elements, ground set has {}",
                        block_of.len(),
                        self.ground_size
                    )));
                }
                if caps.is_empty() || caps.contains(&0) {
                    return Err(Error::param("every partition block needs a cap >= 1"));
                }
                if let Some(&b) = block_of.iter().find(|&&b| b >= caps.len()) {
                    return Err(Error::param(format!("block index {b} has no cap")));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    /// Size of every maximal independent set.
    pub fn rank(&self) -> usize {
        match &self.kind {
            MatroidKind::Uniform { rank } => *rank,
            MatroidKind::Partition { block_of, caps } => {
                let mut sizes = vec![0usize; caps.len()];
                for &b in block_of {
                    sizes[b] += 1;
                }
                sizes.iter().zip(caps).map(|(&s, &c)| s.min(c)).sum()
            }
        }
    }

    /// Independence test.
    pub fn contains(&self, set: &ElementSet) -> Result<bool> {
        let mut t = self.tracker();
        for e in set.iter() {
            if e.0 >= self.ground_size {
                return Err(Error::InvalidElement {
                    index: e.0,
                    size: self.ground_size,
                });
            }
            if !t.can_add(e) {
                return Ok(false);
            }
            t.add(e);
        }
        Ok(true)
    }

    /// Incremental independence bookkeeping starting from the empty set.
    pub fn tracker(&self) -> Tracker<'_> {
        let counts = match &self.kind {
            MatroidKind::Uniform { .. } => vec![0],
            MatroidKind::Partition { caps, .. } => vec![0; caps.len()],
        };
        Tracker {
            matroid: self,
            counts,
        }
    }
}

/// Tracks block usage of a growing independent set.
#[derive(Debug, Clone)]
pub struct Tracker<'a> {
    matroid: &'a Matroid,
    counts: Vec<usize>,
}

impl Tracker<'_> {
    fn slot(&self, e: ElementId) -> (usize, usize) {
        match &self.matroid.kind {
            MatroidKind::Uniform { rank } => (0, *rank),
            MatroidKind::Partition { block_of, caps } => {
                let b = block_of[e.0];
                (b, caps[b])
            }
        }
    }

    /// Whether adding `e` keeps the tracked set independent. `e` must not already be in it.
    pub fn can_add(&self, e: ElementId) -> bool {
        let (slot, cap) = self.slot(e);
        self.counts[slot] < cap
    }

    pub fn add(&mut self, e: ElementId) {
        let (slot, _) = self.slot(e);
        self.counts[slot] += 1;
    }

    /// Undo a previous `add(e)`.
    pub fn remove(&mut self, e: ElementId) {
        let (slot, _) = self.slot(e);
        self.counts[slot] -= 1;
    }
}
