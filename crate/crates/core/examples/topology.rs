//! Builds the default four-layer fat-tree and prints its layers and links.

use netslice::topology::{build_fat_tree, validate, FatTreeConfig, Layer};

fn main() -> netslice::error::Result<()> {
    let graph = build_fat_tree(&FatTreeConfig::default())?;
    println!("{} nodes, {} links", graph.node_count(), graph.link_count());
    for layer in [Layer::Central, Layer::Regional, Layer::Edge, Layer::Rrh] {
        let nodes: Vec<_> = graph.nodes.iter().filter(|n| n.layer == layer).collect();
        let c = nodes[0].capacity;
        println!(
            "{layer:?}: {} nodes, capacity (compute {}, memory {}, wireless {}), fixed cost {}",
            nodes.len(),
            c.compute,
            c.memory,
            c.wireless,
            nodes[0].fixed_cost
        );
    }
    for l in graph.links.iter().enumerate().take(6) {
        println!("  {} bandwidth {}", graph.link_label(l.0), l.1.bandwidth);
    }
    println!("validation issues: {}", validate(&graph).len());
    Ok(())
}
