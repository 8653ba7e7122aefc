//! Deterministic greedy maximization, curvature, and an exhaustive oracle.
//!
//! The greedy loop repeatedly adds the feasible element with the largest
//! marginal gain until no element can be added, i.e. it always returns a
//! maximal independent set. Ties go to the smallest `ElementId`; negative
//! gains (floating noise on monotone objectives) are clamped to zero before
//! comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::sets::{ElementId, ElementSet, GroundSet};

/// Answers value queries for a selection that only ever grows.
pub trait MarginalOracle {
    /// Value of the current selection.
    fn current(&mut self) -> f64;
    /// Value of the current selection with `e` added.
    fn with(&mut self, e: ElementId) -> f64;
    /// Add `e` to the current selection.
    fn commit(&mut self, e: ElementId);
}

/// Adapts a plain set function to [`MarginalOracle`].
pub struct FnOracle<F> {
    eval: F,
    set: ElementSet,
}

impl<F: FnMut(&ElementSet) -> f64> FnOracle<F> {
    pub fn new(eval: F) -> Self {
        Self {
            eval,
            set: ElementSet::new(),
        }
    }
}

impl<F: FnMut(&ElementSet) -> f64> MarginalOracle for FnOracle<F> {
    fn current(&mut self) -> f64 {
        (self.eval)(&self.set)
    }

    fn with(&mut self, e: ElementId) -> f64 {
        let mut s = self.set.clone();
        s.insert(e);
        (self.eval)(&s)
    }

    fn commit(&mut self, e: ElementId) {
        self.set.insert(e);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyOutcome {
    /// Selected elements in pick order.
    pub set: ElementSet,
    /// Objective value of `set`.
    pub value: f64,
    /// Number of `with` queries issued.
    pub evaluations: u64,
}

/// Greedy over an arbitrary oracle.
pub fn greedy_with<O: MarginalOracle + ?Sized>(oracle: &mut O, matroid: &Matroid) -> GreedyOutcome {
    let n = matroid.ground_size();
    let mut tracker = matroid.tracker();
    let mut chosen = vec![false; n];
    let mut set = ElementSet::new();
    let mut value = oracle.current();
    let mut evaluations = 0u64;

    loop {
        let mut best: Option<(ElementId, f64, f64)> = None;
        for i in 0..n {
            let e = ElementId(i);
            if chosen[i] || !tracker.can_add(e) {
                continue;
            }
            let v = oracle.with(e);
            evaluations += 1;
            let gain = (v - value).max(0.0);
            // strict comparison keeps the smallest id on ties
            if best.is_none_or(|(_, g, _)| gain > g) {
                best = Some((e, gain, v));
            }
        }
        let Some((e, _, v)) = best else { break };
        oracle.commit(e);
        tracker.add(e);
        chosen[e.0] = true;
        set.insert(e);
        value = v;
    }

    GreedyOutcome {
        set,
        value,
        evaluations,
    }
}

/// Greedy maximization of a monotone set function under a matroid.
pub fn greedy_maximize<F>(eval: F, matroid: &Matroid, ground: &GroundSet) -> Result<GreedyOutcome>
where
    F: FnMut(&ElementSet) -> f64,
{
    check_ground(matroid, ground)?;
    Ok(greedy_with(&mut FnOracle::new(eval), matroid))
}

fn check_ground(matroid: &Matroid, ground: &GroundSet) -> Result<()> {
    if matroid.ground_size() != ground.len() {
        return Err(Error::param(format!(
            "matroid is over {} elements but the ground set has {}",
            matroid.ground_size(),
            ground.len()
        )));
    }
    Ok(())
}

/// Marginal of one element at the full ground set, next to its singleton value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementMarginal {
    pub element: ElementId,
    /// f(X) - f(X \ {s})
    pub top_marginal: f64,
    /// f({s})
    pub singleton: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    pub value: f64,
    pub marginals: Vec<ElementMarginal>,
}

/// Singleton values at or below this are rejected by [`curvature_estimate`].
pub const SINGLETON_TOLERANCE: f64 = 1e-12;

/// Total curvature `1 - min_s [f(X) - f(X\{s})] / f({s})`, clamped to `[0, 1]`.
///
/// Marginals are taken at the full ground set. For submodular `f` that is
/// the smallest marginal each element can have, so the result bounds the
/// curvature over any matroid from above.
pub fn curvature_estimate<F>(mut eval: F, ground: &GroundSet) -> Result<Curvature>
where
    F: FnMut(&ElementSet) -> f64,
{
    let full: ElementSet = ground.elements().collect();
    let f_full = eval(&full);
    let mut marginals = Vec::with_capacity(ground.len());
    let mut min_ratio = f64::INFINITY;
    for s in ground.elements() {
        let singleton = eval(&std::iter::once(s).collect());
        if singleton <= SINGLETON_TOLERANCE {
            return Err(Error::ZeroSingleton {
                index: s.0,
                value: singleton,
            });
        }
        let without: ElementSet = ground.elements().filter(|&e| e != s).collect();
        let top_marginal = f_full - eval(&without);
        min_ratio = min_ratio.min(top_marginal / singleton);
        marginals.push(ElementMarginal {
            element: s,
            top_marginal,
            singleton,
        });
    }
    Ok(Curvature {
        value: (1.0 - min_ratio).clamp(0.0, 1.0),
        marginals,
    })
}

/// Exact maximizer over independent sets and a τ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceMax {
    pub set: ElementSet,
    pub tau: f64,
    pub value: f64,
    pub evaluations: u64,
}

pub const BRUTE_FORCE_MAX_GROUND: usize = 20;
pub const BRUTE_FORCE_MAX_EVALUATIONS: u64 = 10_000_000;

/// Enumerate independent sets in lexicographic order of their sorted members.
pub fn independent_sets(matroid: &Matroid) -> Vec<ElementSet> {
    fn rec(
        start: usize,
        n: usize,
        current: &mut Vec<ElementId>,
        tracker: &mut crate::matroid::Tracker<'_>,
        out: &mut Vec<ElementSet>,
    ) {
        out.push(current.iter().copied().collect());
        for i in start..n {
            let e = ElementId(i);
            if tracker.can_add(e) {
                tracker.add(e);
                current.push(e);
                rec(i + 1, n, current, tracker, out);
                current.pop();
                tracker.remove(e);
            }
        }
    }
    let mut out = Vec::new();
    let mut tracker = matroid.tracker();
    rec(0, matroid.ground_size(), &mut Vec::new(), &mut tracker, &mut out);
    out
}

/// Exhaustive maximization of `h(S, τ)` over all independent `S` and grid `τ`.
///
/// Ties keep the lexicographically smallest set, then the smallest τ.
pub fn brute_force_max_h<F>(
    mut h_eval: F,
    matroid: &Matroid,
    ground: &GroundSet,
    tau_grid: &[f64],
) -> Result<BruteForceMax>
where
    F: FnMut(&ElementSet, f64) -> f64,
{
    check_ground(matroid, ground)?;
    if tau_grid.is_empty() {
        return Err(Error::param("tau grid is empty"));
    }
    if ground.len() > BRUTE_FORCE_MAX_GROUND {
        return Err(Error::InstanceTooLarge(format!(
            "ground set has {} elements, limit is {BRUTE_FORCE_MAX_GROUND}",
            ground.len()
        )));
    }
    let sets = independent_sets(matroid);
    let total = sets.len() as u64 * tau_grid.len() as u64;
    if total > BRUTE_FORCE_MAX_EVALUATIONS {
        return Err(Error::InstanceTooLarge(format!(
            "{} independent sets x {} grid points exceeds {BRUTE_FORCE_MAX_EVALUATIONS} evaluations",
            sets.len(),
            tau_grid.len()
        )));
    }
    let mut taus = tau_grid.to_vec();
    taus.sort_by(f64::total_cmp);

    let mut best: Option<(usize, f64, f64)> = None;
    for (si, s) in sets.iter().enumerate() {
        for &tau in &taus {
            let v = h_eval(s, tau);
            if best.is_none_or(|(_, _, bv)| v > bv) {
                best = Some((si, tau, v));
            }
        }
    }
    let (si, tau, value) = best.expect("grid and set list are non-empty");
    Ok(BruteForceMax {
        set: sets[si].clone(),
        tau,
        value,
        evaluations: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modular(weights: &'static [f64]) -> impl FnMut(&ElementSet) -> f64 {
        move |s: &ElementSet| s.iter().map(|e| weights[e.0]).sum()
    }

    #[test]
    fn modular_greedy_is_optimal() {
        let g = GroundSet::new(3).unwrap();
        let m = Matroid::uniform(&g, 2).unwrap();
        let out = greedy_maximize(modular(&[3.0, 2.0, 1.0]), &m, &g).unwrap();
        assert_eq!(out.set.as_slice(), &[ElementId(0), ElementId(1)]);
        assert_eq!(out.value, 5.0);
    }

    #[test]
    fn full_rank_takes_everything() {
        let g = GroundSet::new(4).unwrap();
        let m = Matroid::uniform(&g, 4).unwrap();
        let out = greedy_maximize(|s: &ElementSet| (s.len() as f64).min(1.0), &m, &g).unwrap();
        assert_eq!(out.set.len(), 4);
    }

    #[test]
    fn ties_go_to_smallest_id() {
        let g = GroundSet::new(3).unwrap();
        let m = Matroid::uniform(&g, 1).unwrap();
        let out = greedy_maximize(modular(&[1.0, 2.0, 2.0]), &m, &g).unwrap();
        assert_eq!(out.set.as_slice(), &[ElementId(1)]);
    }

    #[test]
    fn greedy_counts_candidate_queries() {
        let g = GroundSet::new(3).unwrap();
        let m = Matroid::uniform(&g, 3).unwrap();
        let out = greedy_maximize(modular(&[1.0, 2.0, 3.0]), &m, &g).unwrap();
        assert_eq!(out.evaluations, 3 + 2 + 1);
        assert_eq!(out.set.as_slice(), &[ElementId(2), ElementId(1), ElementId(0)]);
    }

    #[test]
    fn curvature_modular_is_zero() {
        let g = GroundSet::new(3).unwrap();
        let c = curvature_estimate(modular(&[3.0, 2.0, 1.0]), &g).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(c.marginals.iter().all(|m| m.top_marginal == m.singleton));
    }

    #[test]
    fn curvature_redundant_is_one() {
        let g = GroundSet::new(2).unwrap();
        let c = curvature_estimate(|s: &ElementSet| (s.len() as f64).min(1.0), &g).unwrap();
        assert_eq!(c.value, 1.0);
    }

    #[test]
    fn curvature_rejects_zero_singleton() {
        let g = GroundSet::new(2).unwrap();
        let err = curvature_estimate(modular(&[1.0, 0.0]), &g).unwrap_err();
        assert!(matches!(err, Error::ZeroSingleton { index: 1, .. }));
    }

    #[test]
    fn brute_force_single_element() {
        let g = GroundSet::new(1).unwrap();
        let m = Matroid::uniform(&g, 1).unwrap();
        let f = |s: &ElementSet| if s.is_empty() { 0.0 } else { 5.0 };
        let best = brute_force_max_h(
            |s, tau| tau - (tau - f(s)).max(0.0),
            &m,
            &g,
            &[0.0, 5.0, 10.0],
        )
        .unwrap();
        assert_eq!(best.set.as_slice(), &[ElementId(0)]);
        assert_eq!(best.tau, 5.0);
        assert_eq!(best.value, 5.0);
    }

    #[test]
    fn brute_force_rank_one_picks_larger() {
        let g = GroundSet::new(2).unwrap();
        let m = Matroid::uniform(&g, 1).unwrap();
        let mut f = modular(&[2.0, 3.0]);
        let best = brute_force_max_h(|s, _| f(s), &m, &g, &[0.0]).unwrap();
        assert_eq!(best.set.as_slice(), &[ElementId(1)]);
    }

    #[test]
    fn brute_force_guard_trips() {
        let g = GroundSet::new(21).unwrap();
        let m = Matroid::uniform(&g, 1).unwrap();
        assert!(matches!(
            brute_force_max_h(|_, _| 0.0, &m, &g, &[0.0]),
            Err(Error::InstanceTooLarge(_))
        ));
        let g = GroundSet::new(20).unwrap();
        let m = Matroid::uniform(&g, 20).unwrap();
        let grid: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(matches!(
            brute_force_max_h(|_, _| 0.0, &m, &g, &grid),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn independent_sets_are_lexicographic() {
        let g = GroundSet::new(3).unwrap();
        let m = Matroid::uniform(&g, 2).unwrap();
        let sets: Vec<Vec<usize>> = independent_sets(&m)
            .iter()
            .map(|s| s.iter().map(|e| e.0).collect())
            .collect();
        assert_eq!(
            sets,
            vec![vec![], vec![0], vec![0, 1], vec![0, 2], vec![1], vec![1, 2], vec![2]]
        );
    }
}
