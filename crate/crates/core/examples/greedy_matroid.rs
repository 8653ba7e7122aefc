//! Greedy maximization under uniform and partition matroids, checked
//! against exhaustive search.
//!
//! cargo run --example greedy_matroid

use risk_submod::greedy::{brute_force_max_h, curvature_estimate, greedy_maximize};
use risk_submod::matroid::Matroid;
use risk_submod::sets::{ElementSet, GroundSet};

fn main() -> risk_submod::Result<()> {
    // element i covers the cells listed in cover[i]
    let cover: [&[u32]; 6] = [&[0, 1, 2], &[2, 3], &[3, 4, 5, 6], &[0, 6], &[7], &[1, 5, 7]];
    let ids = |s: &ElementSet| s.sorted().iter().map(|e| e.0).collect::<Vec<_>>();
    let f = |s: &ElementSet| s.iter().fold(0u32, |acc, e| cover[e.0].iter().fold(acc, |a, c| a | 1 << c)).count_ones() as f64;

    let ground = GroundSet::with_labels((0..6).map(|i| format!("s{i}")).collect())?;
    let uniform = Matroid::uniform(&ground, 2)?;
    let partition = Matroid::partition(&ground, vec![0, 0, 1, 1, 2, 2], vec![1, 1, 1])?;

    for (name, m) in [("uniform rank 2", &uniform), ("one per pair", &partition)] {
        let g = greedy_maximize(f, m, &ground)?;
        let best = brute_force_max_h(|s, _| f(s), m, &ground, &[0.0])?;
        println!(
            "{name}: greedy {:?} = {} in {} queries, optimum {:?} = {}",
            ids(&g.set),
            g.value,
            g.evaluations,
            ids(&best.set),
            best.value
        );
    }
    let k = curvature_estimate(f, &ground)?;
    println!("total curvature {:.3}", k.value);
    Ok(())
}
