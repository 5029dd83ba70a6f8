//! One run of the convex-to-concave path on a mirror-symmetric graph.
//!
//! cargo run --release --example dspp_path

use dsmatch::experiments::groups::bilateral;
use dsmatch::groupspace::{build_basis, sample_vg};
use dsmatch::projection::{dspp_path, DsppOpts};
use dsmatch::trial_rng;

fn main() -> dsmatch::Result<()> {
    let g = bilateral(5).to_group(10)?;
    let a = sample_vg(&build_basis(&g), &mut trial_rng(1, 0), 1.0);
    let report = dspp_path(&a, &a, &DsppOpts::default())?;
    println!("lambda_min {:.2e}  lambda_max {:.4}", report.endpoints.lambda_min, report.endpoints.lambda_max);
    println!("{:>8} {:>11} {:>11} {:>6} {:>7}", "a", "E(S, a)", "n-||S||^2", "iters", "escapes");
    for s in &report.steps {
        println!(
            "{:>8.4} {:>11.3e} {:>11.3e} {:>6} {:>7}",
            s.weight, s.energy, s.permutation_gap, s.inner_iterations, s.escapes
        );
    }
    let p = &report.final_permutation;
    println!("result {:?}, in group: {}", p.images(), g.contains(p));
    Ok(())
}
