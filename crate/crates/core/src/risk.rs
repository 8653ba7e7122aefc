//! Empirical VaR/CVaR, the sampled auxiliary function Ĥ, and DKW sample sizing.
//!
//! Tail convention: on `n` samples the α-tail is exactly the `⌈α·n⌉`
//! smallest order statistics. Under ties this differs from the
//! measure-theoretic conditional expectation by O(1/n).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{ElementId, ElementSet};

/// Risk level and τ search parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskParams {
    /// Risk level α in (0, 1].
    pub alpha: f64,
    /// Upper bound Γ on τ.
    pub gamma_cap: f64,
    /// τ search separation Δ in (0, Γ].
    pub delta_step: f64,
    /// Sampling accuracy ε, when the scenario count was sized from (ε, δ).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_conf: Option<f64>,
}

impl RiskParams {
    pub fn new(alpha: f64, gamma_cap: f64, delta_step: f64) -> Result<Self> {
        let p = Self {
            alpha,
            gamma_cap,
            delta_step,
            epsilon: None,
            delta_conf: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_sampling(mut self, epsilon: f64, delta_conf: f64) -> Result<Self> {
        self.epsilon = Some(epsilon);
        self.delta_conf = Some(delta_conf);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.gamma_cap.is_finite() && self.gamma_cap > 0.0) {
            return Err(Error::param(format!("gamma_cap must be > 0, got {}", self.gamma_cap)));
        }
        if !(self.delta_step > 0.0 && self.delta_step <= self.gamma_cap) {
            return Err(Error::param(format!(
                "delta_step must lie in (0, {}], got {}",
                self.gamma_cap, self.delta_step
            )));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::param(format!("epsilon must lie in (0,1], got {e}")));
            }
        }
        if let Some(d) = self.delta_conf {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::param(format!("delta_conf must lie in (0,1), got {d}")));
            }
        }
        Ok(())
    }

    /// Number of τ grid points, `⌈Γ/Δ⌉ + 1`.
    pub fn grid_len(&self) -> usize {
        grid_steps(self.gamma_cap, self.delta_step) + 1
    }

    /// τ_i = iΔ for i in 0..=⌈Γ/Δ⌉.
    pub fn tau_grid(&self) -> Vec<f64> {
        (0..self.grid_len())
            .map(|i| i as f64 * self.delta_step)
            .collect()
    }
}

/// `⌈Γ/Δ⌉`, ignoring rounding noise below 1e-9 relative.
pub fn grid_steps(gamma_cap: f64, delta_step: f64) -> usize {
    ceil_tolerant(gamma_cap / delta_step) as usize
}

fn ceil_tolerant(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha must lie in (0,1], got {alpha}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvarEstimate {
    pub var: f64,
    pub cvar: f64,
    /// `⌈α·n⌉`
    pub tail_count: usize,
}

/// Number of order statistics in the α-tail of `n` samples.
pub fn tail_count(n: usize, alpha: f64) -> usize {
    (ceil_tolerant(alpha * n as f64) as usize).clamp(1, n)
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Empirical VaR: the `⌈α·n⌉`-th smallest value.
pub fn estimate_var(values: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let v = sorted(values)?;
    Ok(v[tail_count(v.len(), alpha) - 1])
}

/// Empirical CVaR: the mean of the `⌈α·n⌉` smallest values.
pub fn estimate_cvar(values: &[f64], alpha: f64) -> Result<CvarEstimate> {
    check_alpha(alpha)?;
    let v = sorted(values)?;
    let m = tail_count(v.len(), alpha);
    let cvar = if m == v.len() {
        // α = 1: sum in original order so the result is the plain mean
        values.iter().sum::<f64>() / values.len() as f64
    } else {
        v[..m].iter().sum::<f64>() / m as f64
    };
    Ok(CvarEstimate {
        var: v[m - 1],
        cvar,
        tail_count: m,
    })
}

/// CVaR of a discrete distribution: `(1/α) ∫_0^α F⁻¹(u) du`.
pub fn weighted_cvar(values: &[f64], probabilities: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.len() != probabilities.len() {
        return Err(Error::param("values and probabilities differ in length"));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut mass = 0.0;
    let mut acc = 0.0;
    for i in idx {
        let take = probabilities[i].min(alpha - mass);
        if take <= 0.0 {
            break;
        }
        acc += take * values[i];
        mass += take;
    }
    Ok(acc / alpha)
}

/// Fixed table of sampled (or enumerated) realizations of the random input.
///
/// Values are exposed through an incremental state so that greedy
/// evaluation of `S ∪ {e}` costs O(1) per scenario for the bundled
/// utilities. All sums over scenarios run in ascending index order.
pub trait ScenarioTable {
    /// Per-set bookkeeping across all scenarios.
    type State: Clone;

    fn n_scenarios(&self) -> usize;
    fn ground_size(&self) -> usize;
    fn seed(&self) -> u64;

    /// Scenario probabilities; `None` means uniform `1/n`.
    fn probabilities(&self) -> Option<&[f64]> {
        None
    }

    fn empty_state(&self) -> Self::State;
    fn insert(&self, state: &mut Self::State, e: ElementId);
    /// f(S, ỹ_k) for the set tracked by `state`.
    fn value(&self, state: &Self::State, k: usize) -> f64;
    /// f(S ∪ {e}, ỹ_k).
    fn value_with(&self, state: &Self::State, e: ElementId, k: usize) -> f64;

    fn state_of(&self, set: &ElementSet) -> Self::State {
        let mut st = self.empty_state();
        for e in set.iter() {
            self.insert(&mut st, e);
        }
        st
    }

    /// f(S, ỹ_k) for every scenario.
    fn values(&self, set: &ElementSet) -> Vec<f64> {
        let st = self.state_of(set);
        (0..self.n_scenarios()).map(|k| self.value(&st, k)).collect()
    }

    /// Expected utility under the table's scenario weights.
    fn mean_value(&self, set: &ElementSet) -> f64 {
        let v = self.values(set);
        match self.probabilities() {
            Some(p) => v.iter().zip(p).map(|(x, w)| x * w).sum(),
            None => v.iter().sum::<f64>() / v.len() as f64,
        }
    }
}

/// Ĥ from an iterator of scenario values, summed in the iterator's order.
pub fn h_from_values<I>(values: I, tau: f64, alpha: f64, probabilities: Option<&[f64]>, n: usize) -> f64
where
    I: IntoIterator<Item = f64>,
{
    match probabilities {
        None => {
            let s: f64 = values.into_iter().map(|f| (tau - f).max(0.0)).sum();
            tau - s / (n as f64 * alpha)
        }
        Some(p) => {
            let s: f64 = values
                .into_iter()
                .zip(p)
                .map(|(f, w)| w * (tau - f).max(0.0))
                .sum();
            tau - s / alpha
        }
    }
}

/// Ĥ(S, τ) = τ − (1/(n_s α)) Σ_k (τ − f(S, ỹ_k))₊
pub fn auxiliary_h<T: ScenarioTable + ?Sized>(set: &ElementSet, tau: f64, table: &T, alpha: f64) -> f64 {
    let st = table.state_of(set);
    let n = table.n_scenarios();
    h_from_values((0..n).map(|k| table.value(&st, k)), tau, alpha, table.probabilities(), n)
}

/// Smallest `n` with `1 − 2 exp(−2 n ε² / Γ²) ≥ 1 − δ`.
pub fn required_samples(gamma_cap: f64, epsilon: f64, delta_conf: f64) -> Result<u64> {
    if !(gamma_cap > 0.0 && gamma_cap.is_finite()) {
        return Err(Error::param(format!("gamma_cap must be > 0, got {gamma_cap}")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::param(format!("epsilon must lie in (0,1], got {epsilon}")));
    }
    if !(delta_conf > 0.0 && delta_conf < 1.0) {
        return Err(Error::param(format!("delta_conf must lie in (0,1), got {delta_conf}")));
    }
    let n = gamma_cap * gamma_cap / (2.0 * epsilon * epsilon) * (2.0 / delta_conf).ln();
    Ok(ceil_tolerant(n).max(1.0) as u64)
}

/// Scenario table over explicit per-scenario values of every set, backed by
/// a closure. Used for tests and small hand-built instances.
pub struct FnTable<F> {
    ground: usize,
    n: usize,
    seed: u64,
    probabilities: Option<Vec<f64>>,
    eval: F,
}

impl<F: Fn(&ElementSet, usize) -> f64> FnTable<F> {
    pub fn new(ground: usize, n: usize, seed: u64, eval: F) -> Self {
        Self {
            ground,
            n,
            seed,
            probabilities: None,
            eval,
        }
    }

    pub fn with_probabilities(mut self, p: Vec<f64>) -> Self {
        self.probabilities = Some(p);
        self
    }
}

impl<F: Fn(&ElementSet, usize) -> f64> ScenarioTable for FnTable<F> {
    type State = ElementSet;

    fn n_scenarios(&self) -> usize {
        self.n
    }

    fn ground_size(&self) -> usize {
        self.ground
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn probabilities(&self) -> Option<&[f64]> {
        self.probabilities.as_deref()
    }

    fn empty_state(&self) -> ElementSet {
        ElementSet::new()
    }

    fn insert(&self, state: &mut ElementSet, e: ElementId) {
        state.insert(e);
    }

    fn value(&self, state: &ElementSet, k: usize) -> f64 {
        (self.eval)(state, k)
    }

    fn value_with(&self, state: &ElementSet, e: ElementId, k: usize) -> f64 {
        let mut s = state.clone();
        s.insert(e);
        (self.eval)(&s, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIVE: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];

    // Smallest sample value v with F̂(v) ≥ α.
    fn var_by_definition(values: &[f64], alpha: f64) -> f64 {
        let n = values.len() as f64;
        let mut cands = values.to_vec();
        cands.sort_by(f64::total_cmp);
        *cands
            .iter()
            .find(|&&t| values.iter().filter(|&&x| x <= t).count() as f64 / n >= alpha - 1e-12)
            .unwrap()
    }

    #[test]
    fn var_examples() {
        assert_eq!(var_by_definition(&FIVE, 0.4), 2.0);
        assert_eq!(estimate_var(&FIVE, 0.4).unwrap(), 2.0);
        assert_eq!(estimate_var(&FIVE, 1.0).unwrap(), 5.0);
        assert_eq!(estimate_var(&[7.0, 7.0, 7.0], 0.2).unwrap(), 7.0);
    }

    #[test]
    fn cvar_examples() {
        let e = estimate_cvar(&FIVE, 0.4).unwrap();
        assert_eq!((e.cvar, e.var, e.tail_count), (1.5, 2.0, 2));
        assert_eq!(estimate_cvar(&FIVE, 1.0).unwrap().cvar, 3.0);
        for a in [0.1, 0.5, 1.0] {
            assert_eq!(estimate_cvar(&[7.0, 7.0, 7.0], a).unwrap().cvar, 7.0);
        }
    }

    #[test]
    fn empty_and_bad_alpha() {
        assert!(matches!(estimate_var(&[], 0.5), Err(Error::EmptyInput)));
        assert!(matches!(estimate_cvar(&[], 0.5), Err(Error::EmptyInput)));
        assert!(estimate_var(&FIVE, 0.0).is_err());
        assert!(estimate_cvar(&FIVE, 1.5).is_err());
    }

    #[test]
    fn tail_count_absorbs_rounding() {
        // 0.7 * 10 = 7.000000000000001 in binary floating point
        assert_eq!(tail_count(10, 0.7), 7);
        assert_eq!(tail_count(5, 0.6), 3);
        assert_eq!(tail_count(3, 0.01), 1);
    }

    #[test]
    fn h_examples() {
        let c = 4.0;
        let t = FnTable::new(1, 6, 0, move |s: &ElementSet, _| if s.is_empty() { 0.0 } else { c });
        let full = ElementSet::from_indices([0]).unwrap();
        assert_eq!(auxiliary_h(&full, c, &t, 0.3), c);
        for (tau, alpha) in [(2.0, 0.5), (7.5, 0.1), (3.0, 1.0)] {
            let h = auxiliary_h(&ElementSet::new(), tau, &t, alpha);
            assert!((h - tau * (1.0 - 1.0 / alpha)).abs() < 1e-12);
        }
        assert_eq!(auxiliary_h(&full, 0.0, &t, 0.2), 0.0);
    }

    #[test]
    fn required_samples_examples() {
        // ⌈50 ln 40⌉
        assert_eq!((50.0 * 40f64.ln()).ceil(), 185.0);
        assert_eq!(required_samples(10.0, 1.0, 0.05).unwrap(), 185);
        let delta = 2.0 * (-2.0f64).exp();
        assert_eq!(required_samples(1.0, 1.0, delta).unwrap(), 1);
        assert!(required_samples(0.0, 0.5, 0.1).is_err());
        assert!(required_samples(1.0, 0.0, 0.1).is_err());
        assert!(required_samples(1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn weighted_cvar_matches_uniform_on_integral_tail() {
        let p = vec![0.2; 5];
        assert!((weighted_cvar(&FIVE, &p, 0.4).unwrap() - 1.5).abs() < 1e-12);
        assert!((weighted_cvar(&FIVE, &p, 1.0).unwrap() - 3.0).abs() < 1e-12);
        // half of the second atom: (0.2*1 + 0.1*2)/0.3
        assert!((weighted_cvar(&FIVE, &p, 0.3).unwrap() - 0.4 / 0.3).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(RiskParams::new(0.0, 10.0, 1.0).is_err());
        assert!(RiskParams::new(0.5, 10.0, 11.0).is_err());
        assert!(RiskParams::new(0.5, 10.0, 1.0).unwrap().with_sampling(1.5, 0.1).is_err());
        let p = RiskParams::new(0.5, 10.0, 3.0).unwrap();
        assert_eq!(p.tau_grid(), vec![0.0, 3.0, 6.0, 9.0, 12.0]);
        assert_eq!(RiskParams::new(0.5, 10.0, 10.0).unwrap().grid_len(), 2);
    }
}
