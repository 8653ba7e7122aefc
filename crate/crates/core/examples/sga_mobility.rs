//! Risk-averse vehicle-to-demand assignment across risk levels.
//!
//! cargo run --release --example sga_mobility

use risk_submod::casestudies::{mod_gamma, mod_generate, mod_scenarios};
use risk_submod::experiments::{alpha_sweep, certificate_curvature, set_label};

fn main() -> risk_submod::Result<()> {
    let inst = mod_generate(4, 6, 1)?;
    let table = mod_scenarios(&inst, 1000);
    let ground = inst.ground();
    let (k_f, _) = certificate_curvature(&table, &ground)?;
    let runs = alpha_sweep(&table, &inst.matroid(), &ground, &[0.05, 0.1, 0.3, 0.6, 1.0], mod_gamma(&inst), 1.0, None, k_f)?;

    println!("{:>5} {:>6} {:>8} {:>8} {:>8}  assignment", "alpha", "tau", "H", "mean", "CVaR.1");
    for r in &runs {
        println!(
            "{:>5} {:>6} {:>8.3} {:>8.3} {:>8.3}  {}",
            r.alpha,
            r.result.tau_g,
            r.result.h_value,
            r.mean_utility,
            r.cvar_10,
            set_label(&r.result.selected, &ground)
        );
    }
    println!("curvature {k_f:.3}");
    Ok(())
}
