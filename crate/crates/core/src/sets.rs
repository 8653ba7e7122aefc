//! Ground sets and selections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of one element of a ground set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub usize);

impl ElementId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for ElementId {
    fn from(i: usize) -> Self {
        ElementId(i)
    }
}

/// Finite universe of selectable items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundSet {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::param("ground set must contain at least one element"));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut g = Self::new(labels.len())?;
        g.labels = Some(labels);
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.size
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn label(&self, e: ElementId) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(e.0)).map(String::as_str)
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> {
        (0..self.size).map(ElementId)
    }

    pub fn check(&self, e: ElementId) -> Result<()> {
        if e.0 < self.size {
            Ok(())
        } else {
            Err(Error::InvalidElement {
                index: e.0,
                size: self.size,
            })
        }
    }
}

/// Ordered selection of distinct elements; order is insertion (pick) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementSet {
    members: Vec<ElementId>,
}

impl ElementSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from indices, rejecting duplicates.
    pub fn from_indices<I: IntoIterator<Item = usize>>(items: I) -> Result<Self> {
        let mut s = Self::new();
        for i in items {
            if !s.insert(ElementId(i)) {
                return Err(Error::param(format!("duplicate element {i} in set")));
            }
        }
        Ok(s)
    }

    /// Appends `e`; returns false if it was already present.
    pub fn insert(&mut self, e: ElementId) -> bool {
        if self.contains(e) {
            return false;
        }
        self.members.push(e);
        true
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.members.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn as_slice(&self) -> &[ElementId] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.members.iter().copied()
    }

    /// Members in ascending id order.
    pub fn sorted(&self) -> Vec<ElementId> {
        let mut v = self.members.clone();
        v.sort_unstable();
        v
    }

    pub fn validate(&self, ground: &GroundSet) -> Result<()> {
        self.members.iter().try_for_each(|&e| ground.check(e))
    }
}

impl FromIterator<ElementId> for ElementSet {
    fn from_iter<T: IntoIterator<Item = ElementId>>(iter: T) -> Self {
        let mut s = ElementSet::new();
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl<'a> IntoIterator for &'a ElementSet {
    type Item = &'a ElementId;
    type IntoIter = std::slice::Iter<'a, ElementId>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}
