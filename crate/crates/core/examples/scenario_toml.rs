//! Writes a custom scenario as TOML, loads it back and runs it.

use netslice::demand::SliceType;
use netslice::eval::{run_scenario, RunOptions, Scenario, SliceMix};
use netslice::planner::{OrderingPolicy, Variant};

fn main() -> netslice::error::Result<()> {
    let mut scenario = Scenario::new(
        "custom",
        vec![SliceMix::builtin(SliceType::Type1, 1), SliceMix::builtin(SliceType::Type3, 1).with_required_psp(0.95)],
    );
    scenario.variants = vec![Variant::Sp, Variant::SpB];
    scenario.ordering = OrderingPolicy::Greedy;
    scenario.max_impact = 0.05;
    scenario.trials = 10_000;

    let text = scenario.to_toml()?;
    println!("{}\n...", text.lines().take(12).collect::<Vec<_>>().join("\n"));
    let loaded = Scenario::from_toml(&text)?;
    assert_eq!(loaded, scenario);
    for r in run_scenario(&loaded, RunOptions::default())?.reports() {
        println!("{} earnings {:.2} acceptance {:.0}%", r.variant.name(), r.total_earnings, 100.0 * r.acceptance_rate);
    }
    Ok(())
}
