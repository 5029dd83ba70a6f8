//! Barrier-penalized solves converge to the group centroid as the penalty
//! weight shrinks.
//!
//! cargo run --release --example penalty_centroid

use dsmatch::dsopt::{centroid_from_orbits, default_schedule, penalty_solve, Barrier, PenaltyOpts};
use dsmatch::experiments::groups::bilateral;
use dsmatch::groupspace::{build_basis, sample_vg};
use dsmatch::trial_rng;

fn main() -> dsmatch::Result<()> {
    let g = bilateral(5).to_group(10)?;
    let a = sample_vg(&build_basis(&g), &mut trial_rng(2, 0), 1.0);
    let sc = centroid_from_orbits(&g.vertex_orbits());
    for barrier in [Barrier::Entropy, Barrier::Log] {
        for steps in [10, 20, 30, 40] {
            let s = penalty_solve(&a, &a, barrier, &default_schedule(1.0, 0.5, steps), &PenaltyOpts::default())?;
            let alpha = 0.5f64.powi(steps as i32 - 1);
            println!("{barrier:?} alpha {alpha:.1e}: ||S - S_c|| = {:.2e}", (&*s - &*sc).norm());
        }
    }
    Ok(())
}
