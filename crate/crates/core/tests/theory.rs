//! Approximation guarantees checked against exhaustive search on
//! enumerable coverage instances.

use proptest::prelude::*;
use risk_submod::casestudies::{coverage_generate, random_obstacles, CoverageInstance, CoverageTable};
use risk_submod::greedy::{brute_force_max_h, greedy_with};
use risk_submod::risk::{auxiliary_h, RiskParams};
use risk_submod::sga::{certificate, eval_count_bound, mean_utility_curvature, sga_solve, tau_curvature, HOracle};

fn instance(seed: u64, n: usize, budget: usize) -> CoverageInstance {
    let obstacles = random_obstacles(8, 8, 2, seed);
    coverage_generate(8, 8, &obstacles, n, budget, seed).unwrap()
}

fn curvature_or_one(r: risk_submod::Result<risk_submod::greedy::Curvature>) -> f64 {
    r.map(|c| c.value).unwrap_or(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sga_meets_the_certificate(seed in 0u64..10_000, n in 3usize..7, budget in 1usize..4, alpha in prop::sample::select(vec![0.1, 0.3, 0.5, 1.0])) {
        let inst = instance(seed, n, budget);
        let table = CoverageTable::exact(&inst).unwrap();
        let (ground, matroid) = (inst.ground(), inst.matroid());
        let p = RiskParams::new(alpha, inst.gamma(), 1.0).unwrap();
        let res = sga_solve(&table, &matroid, &ground, &p).unwrap();
        let k = curvature_or_one(mean_utility_curvature(&table, &ground));
        let best = brute_force_max_h(|s, t| auxiliary_h(s, t, &table, alpha), &matroid, &ground, &p.tau_grid()).unwrap();
        let cert = certificate(&res, k, &p).unwrap();
        let lower = (best.value - p.delta_step) / (1.0 + k) - k / (1.0 + k) * p.gamma_cap * (1.0 / alpha - 1.0);
        prop_assert!(res.h_value >= lower - 1e-9, "{} < {lower}", res.h_value);
        prop_assert!(cert.admits(best.value));
        prop_assert!(res.h_value <= best.value + 1e-9);
    }

    #[test]
    fn greedy_meets_the_curvature_bound_at_every_tau(seed in 0u64..10_000, n in 3usize..7, budget in 1usize..4, alpha in prop::sample::select(vec![0.1, 0.5, 1.0])) {
        let inst = instance(seed, n, budget);
        let table = CoverageTable::exact(&inst).unwrap();
        let (ground, matroid) = (inst.ground(), inst.matroid());
        let p = RiskParams::new(alpha, inst.gamma(), 4.0).unwrap();
        for tau in p.tau_grid() {
            let k = curvature_or_one(tau_curvature(&table, &ground, tau, alpha));
            let mut oracle = HOracle::new(&table, tau, alpha);
            let got = greedy_with(&mut oracle, &matroid);
            let best = brute_force_max_h(|s, t| auxiliary_h(s, t, &table, alpha), &matroid, &ground, &[tau]).unwrap();
            let base = tau * (1.0 - 1.0 / alpha);
            prop_assert!(got.value - base >= (best.value - base) / (1.0 + k) - 1e-9,
                "τ={tau}: greedy {} optimum {} k={k}", got.value, best.value);
        }
    }

    #[test]
    fn coarser_grids_lose_at_most_one_step(seed in 0u64..10_000, n in 3usize..6, alpha in prop::sample::select(vec![0.1, 0.5, 1.0])) {
        let inst = instance(seed, n, 2);
        let table = CoverageTable::exact(&inst).unwrap();
        let (ground, matroid) = (inst.ground(), inst.matroid());
        let h = |d: f64| {
            let p = RiskParams::new(alpha, inst.gamma(), d).unwrap();
            brute_force_max_h(|s, t| auxiliary_h(s, t, &table, alpha), &matroid, &ground, &p.tau_grid()).unwrap().value
        };
        // utilities are integers, so the unit grid holds every breakpoint
        let exact = h(1.0);
        let (h2, h4) = (h(2.0), h(4.0));
        prop_assert!(exact >= h2 - 1e-9 && h2 >= h4 - 1e-9);
        prop_assert!(h4 >= exact - 4.0 - 1e-9);
        prop_assert!(h2 >= exact - 2.0 - 1e-9);
    }
}

#[test]
fn selected_point_is_first_trace_maximum() {
    let inst = instance(17, 6, 3);
    let table = CoverageTable::sampled(&inst, 50);
    let p = RiskParams::new(0.2, inst.gamma(), 1.0).unwrap();
    let res = sga_solve(&table, &inst.matroid(), &inst.ground(), &p).unwrap();
    let first = res.trace.iter().position(|t| t.h == res.h_value).unwrap();
    assert_eq!(res.trace[first].tau, res.tau_g);
    assert!(res.trace.iter().all(|t| t.h <= res.h_value));
    assert_eq!(res.trace.len(), p.grid_len());
    assert!(res.eval_count * 50 <= eval_count_bound(&inst.ground(), &p, 50));
}

#[test]
fn additive_term_matches_formula() {
    let inst = instance(3, 5, 2);
    let table = CoverageTable::exact(&inst).unwrap();
    for alpha in [0.1, 0.25, 0.5, 1.0] {
        let p = RiskParams::new(alpha, inst.gamma(), 1.0).unwrap();
        let res = sga_solve(&table, &inst.matroid(), &inst.ground(), &p).unwrap();
        for k in [0.0, 0.3, 1.0] {
            let c = certificate(&res, k, &p).unwrap();
            let want = k / (1.0 + k) * inst.gamma() * (1.0 / alpha - 1.0);
            assert!((c.additive_term - want).abs() <= 1e-12 * want.max(1.0));
            let ub = (1.0 + k) * res.h_value + k * inst.gamma() * (1.0 / alpha - 1.0) + 1.0;
            assert!((c.optimum_upper_bound - ub).abs() <= 1e-9 * ub.abs().max(1.0));
        }
    }
}
