//! How often a random linear objective over the convex isomorphisms is
//! optimized at a permutation.
//!
//! cargo run --release --example random_objectives

use dsmatch::experiments::groups::shipped_groups;
use dsmatch::experiments::{cmd_table1, write_csv};

fn main() -> dsmatch::Result<()> {
    let groups: Vec<_> = shipped_groups().into_iter().map(|g| (g.name.to_string(), g.group())).collect();
    let rows = cmd_table1(&groups, 100, 0, true)?;
    write_csv(&rows, std::io::stdout().lock())
}
