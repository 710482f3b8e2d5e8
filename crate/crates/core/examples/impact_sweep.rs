//! Sweeps the allowed background impact for a single slice on a topology
//! whose radio units have slightly more wireless capacity.

use netslice::eval::{builtin_scenario, sweep_max_impact, RunOptions, IMPACT_GRID};
use netslice::planner::Variant;
use netslice::topology::Layer;

fn main() -> netslice::error::Result<()> {
    let mut scenario = builtin_scenario("single").expect("built-in scenario");
    scenario.topology.capacity.get_mut(&Layer::Rrh).expect("radio layer").wireless = 1.1;
    scenario.variants = vec![Variant::Sp, Variant::SpB];
    let sweep = sweep_max_impact(&scenario, &IMPACT_GRID, RunOptions::default())?;
    println!("{:>8} {:>10} {:>10} {:>12}", "impact", "SP", "SP-B", "SP-B impact");
    for (p, outcome) in IMPACT_GRID.iter().zip(&sweep) {
        let sp = &outcome.run(Variant::Sp, 0).expect("SP run").report;
        let spb = &outcome.run(Variant::SpB, 0).expect("SP-B run").report;
        println!("{p:>8} {:>10.2} {:>10.2} {:>12.3e}", sp.total_earnings, spb.total_earnings, spb.max_impact_prob);
    }
    Ok(())
}
