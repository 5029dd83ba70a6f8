//! Lists the isomorphisms between a graph and a relabelled copy, then checks
//! the list against the combinatorial oracle.
//!
//! cargo run --release --example enumerate_isomorphisms

use dsmatch::dsopt::{enumerate_isomorphisms, EnumerateOpts};
use dsmatch::experiments::groups::grid_reflections;
use dsmatch::groupspace::{build_basis, sample_vg};
use dsmatch::permgroup::automorphism_oracle;
use dsmatch::{trial_rng, Permutation};

fn main() -> dsmatch::Result<()> {
    let g = grid_reflections(3, 4).to_group(10)?;
    let a = sample_vg(&build_basis(&g), &mut trial_rng(3, 0), 1.0);
    let relabel = Permutation::from_cycles(12, &[&[0, 5, 7], &[2, 11]])?;
    let b = relabel.to_matrix().transpose() * &*a * relabel.to_matrix();
    let found = enumerate_isomorphisms(&a, &b, &EnumerateOpts::default())?;
    for p in &found.permutations {
        println!("{:?}  residual {:.1e}", p.images(), p.residual_inf(&a, &b));
    }
    let aut = automorphism_oracle(&a, 1e-9)?;
    println!("found {}, |Aut(A)| = {}, complete: {}", found.permutations.len(), aut.order(), found.complete);
    Ok(())
}
