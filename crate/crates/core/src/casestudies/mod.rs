//! The two bundled problem families: vehicle assignment and sensor coverage.

pub mod coverage;
pub mod mobility;

pub use coverage::{
    coverage_exact_scenarios, coverage_generate, coverage_utility, default_obstacles, random_obstacles,
    CoverageInstance, CoverageTable, Grid, Rect, COVERAGE_SCHEMA,
};
pub use mobility::{
    mod_gamma, mod_generate, mod_scenarios, mod_utility, AssignmentTable, ModInstance, MOD_SCHEMA,
};
