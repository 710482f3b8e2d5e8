//! Checks a plan by simulation: sampled PSP per accepted slice, observed
//! overrun frequency per element, and exact flow conservation.

use netslice::eval::{builtin_scenario, flow_violations, run_scenario, verify_by_simulation, RunOptions};

fn main() -> netslice::error::Result<()> {
    let scenario = builtin_scenario("mix2").expect("built-in scenario");
    let graph = scenario.graph()?;
    let background = scenario.background_model(&graph)?;
    let specs = scenario.slice_specs()?;
    let outcome = run_scenario(&scenario, RunOptions::default())?;
    for run in &outcome.runs {
        let v = verify_by_simulation(&run.plan, &specs, &graph, &background, 50_000, scenario.seed)?;
        for (spec, p) in specs.iter().zip(&v.psp) {
            if let Some(p) = p {
                let ok = if p.high >= spec.required_psp { "ok" } else { "below target" };
                println!("{:<5} {:<8} psp {:.4} [{:.4}, {:.4}] {ok}", run.variant.name(), spec.id, p.estimate, p.low, p.high);
            }
        }
        let worst = v.node_impact.iter().flatten().chain(&v.link_impact).map(|p| p.estimate).fold(0.0, f64::max);
        let flows = flow_violations(&run.plan, &specs, &graph);
        println!("{:<5} worst overrun frequency {worst:.4}, flow violations {}", run.variant.name(), flows.len());
    }
    Ok(())
}
