//! Sensor placement with line-of-sight occlusion and random failures.
//!
//! cargo run --release --example sga_coverage

use risk_submod::casestudies::{coverage_generate, default_obstacles, CoverageTable};
use risk_submod::risk::RiskParams;
use risk_submod::sga::{certificate, curvature_diagnostics, sga_solve};

fn main() -> risk_submod::Result<()> {
    let inst = coverage_generate(20, 20, &default_obstacles(), 8, 4, 1)?;
    let grid = inst.grid()?;
    for (y, row) in grid.rows().iter().enumerate().rev() {
        let line: String = row
            .chars()
            .enumerate()
            .map(|(x, c)| match inst.candidates.iter().position(|&p| p == [x, y]) {
                Some(i) => char::from_digit(i as u32, 10).unwrap(),
                None => c,
            })
            .collect();
        println!("{line}");
    }
    for (i, fp) in inst.footprints.iter().enumerate() {
        println!("sensor {i}: sees {} cells, works with p = {:.3}", fp.len(), inst.success_prob[i]);
    }

    let table = CoverageTable::sampled(&inst, 1000);
    for alpha in [0.1, 1.0] {
        let p = RiskParams::new(alpha, inst.gamma(), 1.0)?;
        let res = sga_solve(&table, &inst.matroid(), &inst.ground(), &p)?;
        let diag = curvature_diagnostics(&table, &inst.ground(), &p)?;
        let cert = certificate(&res, diag.mean_utility, &p)?;
        println!(
            "alpha {alpha}: sensors {:?}, tau {}, H {:.2}, optimum at most {:.2}",
            res.selected.sorted().iter().map(|e| e.0).collect::<Vec<_>>(),
            res.tau_g,
            res.h_value,
            cert.optimum_upper_bound
        );
    }
    Ok(())
}
