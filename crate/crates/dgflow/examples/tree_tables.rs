//! Rooted trees of the three families with their symmetry and density.
//!
//! `cargo run --example tree_tables -- 4` lists order 4 (default 3).

use dgflow::trees::{enumerate_trees, tree_gamma, tree_sigma, TreeKind};

fn main() -> dgflow::Result<()> {
    let order: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);
    for kind in [TreeKind::Mono, TreeKind::BiColored, TreeKind::Shaped] {
        let trees = enumerate_trees(order, kind)?;
        println!("{kind}, order {order}: {} trees", trees.len());
        for t in trees {
            println!(
                "  {:<24} gamma {:>4}  sigma {:>3}",
                t.to_string(),
                tree_gamma(&t),
                tree_sigma(&t)
            );
        }
    }
    Ok(())
}
