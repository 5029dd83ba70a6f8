//! Rounding relaxed solutions to permutations.

mod dspp;
mod hungarian;
mod spectral;

use nalgebra::DMatrix;

use crate::dsopt::check_square_pair;
use crate::error::Result;

pub use dspp::{dspp_path, DsppOpts, PathReport, PathStep};
pub use hungarian::{l2_project, min_cost_assignment, TIE_TOL};
pub use spectral::{
    projected_hessian_eigenvalues, spectral_endpoints, spectral_endpoints_capped, SpectralEndpoints,
    SPECTRAL_MAX_DEGREE,
};

/// `C_ij = ||sort(row i of A) - sort(row j of B)||_2`. Vanishes wherever an
/// isomorphism maps `j` to `i`.
pub fn invariant_costs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = check_square_pair(a, b)?;
    let sorted_rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
        m.row_iter()
            .map(|r| {
                let mut v: Vec<f64> = r.iter().copied().collect();
                v.sort_by(f64::total_cmp);
                v
            })
            .collect()
    };
    let la = sorted_rows(a);
    let lb = sorted_rows(b);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        la[i].iter().zip(&lb[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }))
}
