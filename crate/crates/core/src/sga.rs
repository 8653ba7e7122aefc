//! Sequential greedy over a τ grid and the resulting approximation certificate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::{curvature_estimate, greedy_with, Curvature, MarginalOracle};
use crate::matroid::Matroid;
use crate::risk::{h_from_values, RiskParams, ScenarioTable};
use crate::sets::{ElementId, ElementSet, GroundSet};

/// Greedy result at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub tau: f64,
    pub set: ElementSet,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgaResult {
    pub selected: ElementSet,
    pub tau_g: f64,
    pub h_value: f64,
    pub trace: Vec<TraceEntry>,
    /// Set evaluations performed, each costing one pass over the scenarios.
    pub eval_count: u64,
}

/// Ĥ(·, τ) over a fixed scenario table with incremental state.
pub struct HOracle<'a, T: ScenarioTable + ?Sized> {
    table: &'a T,
    state: T::State,
    tau: f64,
    alpha: f64,
    value: f64,
}

impl<'a, T: ScenarioTable + ?Sized> HOracle<'a, T> {
    pub fn new(table: &'a T, tau: f64, alpha: f64) -> Self {
        let state = table.empty_state();
        let mut o = Self {
            table,
            state,
            tau,
            alpha,
            value: 0.0,
        };
        o.value = o.h_of_state();
        o
    }

    fn h_of_state(&self) -> f64 {
        let n = self.table.n_scenarios();
        let t = self.table;
        let st = &self.state;
        h_from_values((0..n).map(|k| t.value(st, k)), self.tau, self.alpha, t.probabilities(), n)
    }
}

impl<T: ScenarioTable + ?Sized> MarginalOracle for HOracle<'_, T> {
    fn current(&mut self) -> f64 {
        self.value
    }

    fn with(&mut self, e: ElementId) -> f64 {
        let n = self.table.n_scenarios();
        let t = self.table;
        let st = &self.state;
        h_from_values((0..n).map(|k| t.value_with(st, e, k)), self.tau, self.alpha, t.probabilities(), n)
    }

    fn commit(&mut self, e: ElementId) {
        self.table.insert(&mut self.state, e);
        self.value = self.h_of_state();
    }
}

fn check_inputs<T: ScenarioTable + ?Sized>(table: &T, m: &Matroid, x: &GroundSet) -> Result<()> {
    if table.ground_size() != x.len() || m.ground_size() != x.len() {
        return Err(Error::param(format!(
            "ground set has {} elements, matroid {}, scenario table {}",
            x.len(),
            m.ground_size(),
            table.ground_size()
        )));
    }
    if table.n_scenarios() == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Greedy at every grid point τ_i = iΔ, returning the best pair found.
///
/// Grid points are processed on scoped worker threads and merged by index,
/// so the output does not depend on scheduling.
pub fn sga_solve<T>(table: &T, m: &Matroid, x: &GroundSet, p: &RiskParams) -> Result<SgaResult>
where
    T: ScenarioTable + Sync + ?Sized,
{
    p.validate()?;
    check_inputs(table, m, x)?;
    let taus = p.tau_grid();
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(taus.len());

    let run = |tau: f64| {
        let mut oracle = HOracle::new(table, tau, p.alpha);
        let out = greedy_with(&mut oracle, m);
        (
            TraceEntry {
                tau,
                set: out.set,
                h: out.value,
            },
            out.evaluations,
        )
    };

    let results: Vec<(TraceEntry, u64)> = if workers <= 1 {
        taus.iter().map(|&t| run(t)).collect()
    } else {
        let mut slots: Vec<Option<(TraceEntry, u64)>> = vec![None; taus.len()];
        let chunk = taus.len().div_ceil(workers);
        std::thread::scope(|s| {
            for (ts, out) in taus.chunks(chunk).zip(slots.chunks_mut(chunk)) {
                let run = &run;
                s.spawn(move || {
                    for (t, o) in ts.iter().zip(out.iter_mut()) {
                        *o = Some(run(*t));
                    }
                });
            }
        });
        slots.into_iter().map(|s| s.expect("every grid point ran")).collect()
    };

    let mut trace = Vec::with_capacity(results.len());
    let mut eval_count = 0u64;
    for (entry, evals) in results {
        eval_count += evals;
        trace.push(entry);
    }
    let best = trace
        .iter()
        .enumerate()
        .fold(0, |b, (i, t)| if t.h > trace[b].h { i } else { b });
    Ok(SgaResult {
        selected: trace[best].set.clone(),
        tau_g: trace[best].tau,
        h_value: trace[best].h,
        trace,
        eval_count,
    })
}

/// Upper bound on `eval_count * n_s` for [`sga_solve`]: `(⌈Γ/Δ⌉ + 1)·|X|²·n_s`.
///
/// The grid has `⌈Γ/Δ⌉ + 1` points and greedy issues at most
/// `|X|(|X|+1)/2 ≤ |X|²` candidate evaluations per point.
pub fn eval_count_bound(x: &GroundSet, p: &RiskParams, n_s: u64) -> u64 {
    let n = x.len() as u64;
    p.grid_len() as u64 * n * n * n_s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub k_f: f64,
    pub additive_term: f64,
    pub delta_step: f64,
    pub epsilon: f64,
    pub gamma_cap: f64,
    pub alpha: f64,
    /// No feasible (S, τ) can exceed this value of H.
    pub optimum_upper_bound: f64,
}

impl Certificate {
    /// Lower bound on the achieved value implied by an optimum of `h_star`.
    pub fn guaranteed_value(&self, h_star: f64) -> f64 {
        let k = self.k_f;
        (h_star - self.delta_step) / (1.0 + k) - k / (1.0 + k) * self.gamma_cap * (1.0 / self.alpha - 1.0)
            - self.epsilon
    }

    /// Whether `h_star` is consistent with the certificate.
    pub fn admits(&self, h_star: f64) -> bool {
        h_star <= self.optimum_upper_bound + 1e-9 * self.optimum_upper_bound.abs().max(1.0)
    }
}

/// Certificate for `result` with curvature `k_f`; ε is taken from `p` or 0.
pub fn certificate(result: &SgaResult, k_f: f64, p: &RiskParams) -> Result<Certificate> {
    p.validate()?;
    if !(0.0..=1.0).contains(&k_f) {
        return Err(Error::param(format!("k_f must lie in [0,1], got {k_f}")));
    }
    Ok(certificate_raw(result.h_value, k_f, p.alpha, p.gamma_cap, p.delta_step, p.epsilon.unwrap_or(0.0)))
}

pub(crate) fn certificate_raw(h: f64, k: f64, alpha: f64, gamma: f64, delta: f64, eps: f64) -> Certificate {
    let tail = gamma * (1.0 / alpha - 1.0);
    Certificate {
        k_f: k,
        additive_term: k / (1.0 + k) * tail,
        delta_step: delta,
        epsilon: eps,
        gamma_cap: gamma,
        alpha,
        optimum_upper_bound: (1.0 + k) * h + k * tail + delta + (1.0 + k) * eps,
    }
}

/// Curvature of the mean-scenario utility `S ↦ E_k f(S, ỹ_k)`.
pub fn mean_utility_curvature<T: ScenarioTable + ?Sized>(table: &T, x: &GroundSet) -> Result<Curvature> {
    curvature_estimate(|s| table.mean_value(s), x)
}

/// Curvature of `S ↦ Ĥ(S, τ) − Ĥ(∅, τ)` at a fixed τ.
pub fn tau_curvature<T: ScenarioTable + ?Sized>(table: &T, x: &GroundSet, tau: f64, alpha: f64) -> Result<Curvature> {
    let base = crate::risk::auxiliary_h(&ElementSet::new(), tau, table, alpha);
    curvature_estimate(|s| crate::risk::auxiliary_h(s, tau, table, alpha) - base, x)
}

/// Curvature values reported next to a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureDiagnostics {
    pub mean_utility: f64,
    /// `(τ_i, k)` per grid point; `None` where some singleton gain is zero.
    pub per_tau: Vec<(f64, Option<f64>)>,
}

impl CurvatureDiagnostics {
    /// Largest finite per-τ curvature, if any.
    pub fn max_per_tau(&self) -> Option<f64> {
        self.per_tau.iter().filter_map(|(_, k)| *k).reduce(f64::max)
    }
}

pub fn curvature_diagnostics<T: ScenarioTable + ?Sized>(
    table: &T,
    x: &GroundSet,
    p: &RiskParams,
) -> Result<CurvatureDiagnostics> {
    let mean_utility = mean_utility_curvature(table, x)?.value;
    let per_tau = p
        .tau_grid()
        .into_iter()
        .map(|tau| {
            let k = match tau_curvature(table, x, tau, p.alpha) {
                Ok(c) => Some(c.value),
                Err(Error::ZeroSingleton { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok((tau, k))
        })
        .collect::<Result<_>>()?;
    Ok(CurvatureDiagnostics { mean_utility, per_tau })
}
