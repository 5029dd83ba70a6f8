//! All symmetries of a lattice distance matrix, found by walking faces of
//! the convex isomorphism set.
//!
//! cargo run --release --example grid_symmetries -- 20 25

use dsmatch::experiments::cmd_grid_symmetries;

fn main() -> dsmatch::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (rows, cols) = match args[..] {
        [r, c] => (r, c),
        _ => (20, 25),
    };
    let r = cmd_grid_symmetries(rows, cols, true)?;
    println!("{rows}x{cols} grid, n = {}", r.n);
    for p in &r.permutations {
        let moved = p.images().iter().enumerate().filter(|(i, &j)| *i != j).count();
        println!("  permutation moving {moved} points");
    }
    println!("group: {}, complete: {}, remixes: {}", r.is_group, r.complete, r.remixes);
    if let Some(ms) = r.wall_ms {
        println!("{ms:.0} ms");
    }
    Ok(())
}
