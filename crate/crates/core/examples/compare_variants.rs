//! Runs the four variants on a four-slice mix, then compares the two
//! sequential ordering policies.

use netslice::eval::{builtin_scenario, run_scenario, RunOptions};
use netslice::planner::{OrderingPolicy, Variant};

fn main() -> netslice::error::Result<()> {
    let scenario = builtin_scenario("mix4").expect("built-in scenario");
    let outcome = run_scenario(&scenario, RunOptions::default())?;
    println!("{:<5} {:>9} {:>9} {:>8} {:>10} {:>7}", "", "earnings", "cost", "accept", "impact", "status");
    for r in outcome.reports() {
        println!(
            "{:<5} {:>9.2} {:>9.2} {:>7.0}% {:>10.3e} {:>7}",
            r.variant.name(),
            r.total_earnings,
            r.provisioning_cost,
            100.0 * r.acceptance_rate,
            r.max_impact_prob,
            r.status
        );
    }

    for ordering in [OrderingPolicy::ByIncome, OrderingPolicy::Greedy] {
        let mut s = scenario.clone();
        s.ordering = ordering;
        s.variants = vec![Variant::Sp, Variant::SpB];
        let earnings: Vec<String> = run_scenario(&s, RunOptions::default())?
            .reports()
            .iter()
            .map(|r| format!("{} {:.2}", r.variant.name(), r.total_earnings))
            .collect();
        println!("ordering {:<9}: {}", ordering.as_str(), earnings.join(", "));
    }
    Ok(())
}
