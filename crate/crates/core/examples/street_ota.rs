//! Event-triggered reassignment against offline and every-step planning on
//! a synthetic street grid.
//!
//! cargo run --release --example street_ota

use risk_submod::streetnet::ota::random_placement;
use risk_submod::streetnet::{ota_run, shortest_path, synth_city, OtaConfig, OtaMode};

fn main() -> risk_submod::Result<()> {
    let net = synth_city(5, 5, 7)?;
    if let Some(p) = shortest_path(&net, 0, 24)? {
        println!("corner to corner: {:?}, {:.0} m", p.nodes, p.length);
    }

    let (vehicles, demands) = random_placement(&net, 6, 4, 3)?;
    println!("vehicles at {vehicles:?}, demands at {demands:?}");
    for mode in OtaMode::ALL {
        let run = ota_run(&net, &vehicles, &demands, &OtaConfig::default(), 3, mode)?;
        println!(
            "{mode:<12} arrival {:>6.1} s, {} assignments, triggers at steps {:?}",
            run.arrival_time, run.assignment_count, run.trigger_steps
        );
    }
    Ok(())
}
