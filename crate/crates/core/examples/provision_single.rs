//! Provisions one Type-1 slice with and without background protection and
//! prints where the VNF instances land.

use netslice::demand::{BackgroundModel, SliceType};
use netslice::eval::metrics;
use netslice::planner::{provision, Variant, VariantConfig};
use netslice::topology::{build_fat_tree, FatTreeConfig};

fn main() -> netslice::error::Result<()> {
    let graph = build_fat_tree(&FatTreeConfig::default())?;
    let background = BackgroundModel::from_graph(&graph, Default::default())?;
    let specs = vec![SliceType::Type1.spec()];
    for variant in [Variant::Sp, Variant::SpB] {
        let cfg = VariantConfig::new(variant);
        let plan = provision(&specs, &graph, &background, &cfg)?;
        let m = metrics(&plan, &graph, &background, cfg.max_impact)?;
        println!(
            "{}: earnings {:.2}, cost {:.2}, nodes used {:.1}%, max impact {:.3e}",
            variant.name(),
            m.total_earnings,
            m.provisioning_cost,
            m.node_usage_pct,
            m.max_impact_prob
        );
        let slice = &plan.slices[0];
        for (i, row) in slice.node_instances.iter().enumerate().filter(|(_, r)| r.iter().any(|&k| k > 0)) {
            let placed: Vec<String> =
                row.iter().zip(&specs[0].sfc.vnfs).filter(|(k, _)| **k > 0).map(|(k, v)| format!("{}x{k}", v.name)).collect();
            println!("  {}: {}", graph.nodes[i].id, placed.join(" "));
        }
    }
    Ok(())
}
