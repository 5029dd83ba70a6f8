//! Retrieval ratios of L2 rounding and the convex-to-concave path as noise
//! grows. A shortened sweep; the `dsmatch noise` command runs the full one.
//!
//! cargo run --release --example noise_sweep

use dsmatch::experiments::{cmd_noise_experiment, default_exponents, ExperimentConfig};

fn main() -> dsmatch::Result<()> {
    let config = ExperimentConfig { trials: 20, noise_exponents: default_exponents(5), ..Default::default() };
    let res = cmd_noise_experiment(&config)?;
    println!("{:>8} {:>12} {:>6}", "epsilon", "method", "ratio");
    for row in &res.rows {
        println!("{:>8.4} {:>12} {:>6.2}", row.epsilon, row.method, row.ratio);
    }
    Ok(())
}
