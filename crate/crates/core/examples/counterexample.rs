//! A graph with no symmetry on which the plain relaxation still has a flat
//! zero-energy solution, and the sorted-row costs that remove it.
//!
//! cargo run --release --example counterexample

use dsmatch::experiments::cmd_counterexample;

fn main() -> dsmatch::Result<()> {
    let r = cmd_counterexample()?;
    println!("row sums          {:?}", r.row_sums);
    println!("||A J/3 - J/3 A|| {:.1e}", r.flat_energy);
    println!("|Aut(A)|          {}", r.automorphism_order);
    println!("plain solution gap n - ||S||^2 = {:.3}", r.plain_permutation_gap);
    println!("invariant costs:");
    for row in &r.invariant_costs {
        println!("  {}", row.iter().map(|v| format!("{v:7.4}")).collect::<Vec<_>>().join(" "));
    }
    println!("with costs, distance to I = {:.1e}", r.augmented_distance_to_identity);
    Ok(())
}
