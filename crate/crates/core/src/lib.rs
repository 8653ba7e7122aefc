//! Risk-averse selection with stochastic submodular utilities.
//!
//! The objective is the conditional value-at-risk of `f(S, y)` at level α,
//! maximized over the independent sets of a matroid. It is optimized through
//! the auxiliary function `Ĥ(S, τ) = τ − E[(τ − f(S, y))₊] / α` on a fixed
//! table of scenarios: [`sga::sga_solve`] runs greedy for every `τ` on a grid
//! and keeps the best pair, and [`sga::certificate`] bounds the optimum.
//!
//! Two utilities ship with the crate ([`casestudies`]): vehicle-to-demand
//! assignment with uncertain efficiencies, and sensor coverage with line of
//! sight and random failures. [`streetnet`] runs the assignment on a street
//! graph with random intersection delays and compares replanning rules.
//! [`experiments`] writes the study tables used by the `risk-submod` binary.
//!
//! ```
//! use risk_submod::casestudies::{mod_gamma, mod_generate, mod_scenarios};
//! use risk_submod::risk::RiskParams;
//! use risk_submod::sga::sga_solve;
//!
//! let inst = mod_generate(2, 3, 1).unwrap();
//! let table = mod_scenarios(&inst, 100);
//! let p = RiskParams::new(0.1, mod_gamma(&inst), 0.5).unwrap();
//! let res = sga_solve(&table, &inst.matroid(), &inst.ground(), &p).unwrap();
//! assert!(res.selected.len() <= 3);
//! ```

pub mod casestudies;
pub mod error;
pub mod experiments;
pub mod greedy;
pub mod io;
pub mod matroid;
pub mod risk;
pub mod rng;
pub mod sets;
pub mod sga;
pub mod streetnet;

pub use error::{Error, Result};
