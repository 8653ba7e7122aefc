//! Writing instance and network files, then solving from disk.
//!
//! cargo run --release --example instance_files -- /tmp/risk-submod-demo

use std::path::PathBuf;

use risk_submod::experiments::{gen_city, gen_instance, solve, GenCityConfig, GenInstanceConfig, InstanceKind, SolveConfig};

fn main() -> risk_submod::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("risk-submod-demo"), PathBuf::from);

    let city = gen_city(&GenCityConfig::default(), &out.join("city"))?;
    println!("wrote {}", city.display());

    for kind in [InstanceKind::Mod, InstanceKind::Coverage] {
        let dir = out.join(format!("{kind:?}").to_lowercase());
        let path = gen_instance(&GenInstanceConfig { kind, ..GenInstanceConfig::default() }, &dir)?;
        let cfg = SolveConfig {
            alpha: 0.2,
            n_s: Some(500),
            ..SolveConfig::new(&path)
        };
        let sol = solve(&cfg, &dir)?;
        println!(
            "{}: picked {} with H {:.3}; CVaR {:.3}, mean {:.3}",
            path.display(),
            sol.selected_labels,
            sol.result.h_value,
            sol.cvar,
            sol.mean_utility
        );
    }
    Ok(())
}
