//! Empirical VaR/CVaR, the auxiliary function, and sample sizing.
//!
//! cargo run --example cvar_estimators

use risk_submod::risk::{auxiliary_h, estimate_cvar, required_samples, FnTable};
use risk_submod::sets::ElementSet;

fn main() -> risk_submod::Result<()> {
    let values = [1.0, 2.0, 3.0, 4.0, 5.0];
    for alpha in [0.2, 0.4, 0.6, 0.8, 1.0] {
        let e = estimate_cvar(&values, alpha)?;
        println!("alpha {alpha:.1}: VaR {} CVaR {} (tail of {})", e.var, e.cvar, e.tail_count);
    }

    // Ĥ(S, τ) for a one-element set whose utility is the k-th sample
    let table = FnTable::new(1, values.len(), 0, |s: &ElementSet, k| if s.is_empty() { 0.0 } else { values[k] });
    let s = ElementSet::from_indices([0])?;
    println!("\ntau  H(S,tau) at alpha 0.4");
    for tau in 0..=6 {
        println!("{tau:>3}  {:.3}", auxiliary_h(&s, tau as f64, &table, 0.4));
    }

    println!("\nsamples for |CVaR error| <= eps with probability 1-delta (Gamma = 10)");
    for (eps, delta) in [(1.0, 0.05), (0.5, 0.1), (0.1, 0.01)] {
        println!("eps {eps:<4} delta {delta:<5} -> {}", required_samples(10.0, eps, delta)?);
    }
    Ok(())
}
