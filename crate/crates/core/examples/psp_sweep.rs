//! Sweeps the required PSP over a ten-slice mix and reports acceptance.

use netslice::eval::{builtin_scenario, sweep_required_psp, RunOptions, PSP_GRID};

fn main() -> netslice::error::Result<()> {
    let scenario = builtin_scenario("sweep10").expect("built-in scenario");
    let sweep = sweep_required_psp(&scenario, &PSP_GRID, RunOptions::default())?;
    for (p, outcome) in PSP_GRID.iter().zip(&sweep) {
        let cells: Vec<String> = outcome
            .reports()
            .iter()
            .map(|r| format!("{} accept {:>3.0}% earnings {:>8.2}", r.variant.name(), 100.0 * r.acceptance_rate, r.total_earnings))
            .collect();
        println!("psp {p:<6} {}", cells.join(" | "));
    }
    Ok(())
}
