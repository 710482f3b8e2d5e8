//! Calibrates the safety margin of each catalog slice for several PSP targets
//! and prints how much capacity the resulting box asks for.

use netslice::demand::SliceType;
use netslice::probability::{find_gamma_s, targets_for_gamma, QmcConfig, StatMode};

fn main() -> netslice::error::Result<()> {
    let qmc = QmcConfig::default();
    println!("{:<6} {:>6} {:>10} {:>9} {:>10}", "slice", "psp", "gamma", "achieved", "compute");
    for t in SliceType::ALL {
        for p in [0.9, 0.95, 0.99, 0.999] {
            let spec = t.spec().with_required_psp(p)?;
            let cal = find_gamma_s(&spec, &qmc, StatMode::PerUser, 1e-3)?;
            let target = targets_for_gamma(&spec, cal.gamma, StatMode::PerUser)?;
            let compute: f64 = (0..spec.sfc.vnfs.len()).map(|v| target.upper[3 * v]).sum();
            println!("{:<6} {:>6} {:>10.3} {:>9.5} {:>10.2}", t.name(), p, cal.gamma, cal.psp, compute);
        }
    }
    Ok(())
}
