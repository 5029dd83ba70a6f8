//! Extreme eigenvalues of `S -> ||AS - SB||_F^2` on mean-zero matrices.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dsopt::check_square_pair;
use crate::error::{Error, Result};
use crate::linalg::{mean_zero_basis, sym_eigenvalues};

/// Largest `n` for which the dense `(n-1)^2` operator is built.
pub const SPECTRAL_MAX_DEGREE: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralEndpoints {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Matrix of `S -> AS - SB` from coordinates in the orthonormal basis
/// `{u_k u_l^T}` of `{S 1 = 0, S^T 1 = 0}` to column-major `vec(S)`.
pub(crate) fn restricted_operator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let u = mean_zero_basis(n);
    let au = a * &u;
    let btu = b.transpose() * &u;
    // vec(AS) = (I ⊗ A) vec S and vec(SB) = (B^T ⊗ I) vec S, with vec(U X U^T) = (U ⊗ U) vec X
    u.kronecker(&au) - btu.kronecker(&u)
}

/// Gram matrix `M^T M` of [`restricted_operator`], symmetrized.
pub(crate) fn restricted_gram(a: &DMatrix<f64>, b: &DMatrix<f64>, cap: usize) -> Result<DMatrix<f64>> {
    let n = check_square_pair(a, b)?;
    if n > cap {
        return Err(Error::DimensionCap { n, cap });
    }
    let m = restricted_operator(a, b);
    let g = m.tr_mul(&m);
    Ok((&g + g.transpose()) * 0.5)
}

/// `lambda_min` and `lambda_max` of the quadratic form on mean-zero matrices.
pub fn spectral_endpoints(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<SpectralEndpoints> {
    spectral_endpoints_capped(a, b, SPECTRAL_MAX_DEGREE)
}

pub fn spectral_endpoints_capped(a: &DMatrix<f64>, b: &DMatrix<f64>, cap: usize) -> Result<SpectralEndpoints> {
    let g = restricted_gram(a, b, cap)?;
    if g.nrows() == 0 {
        return Ok(SpectralEndpoints { lambda_min: 0.0, lambda_max: 0.0 });
    }
    let ev = sym_eigenvalues(&g);
    let lambda_max = ev.iter().cloned().fold(0.0f64, f64::max);
    let lambda_min = ev.iter().cloned().fold(f64::INFINITY, f64::min).clamp(0.0, lambda_max);
    Ok(SpectralEndpoints { lambda_min, lambda_max })
}

/// Eigenvalues of the Hessian of `||AS - SB||^2 + a (n - ||S||^2)` on
/// mean-zero matrices, ascending.
pub fn projected_hessian_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>, weight: f64) -> Result<Vec<f64>> {
    let g = restricted_gram(a, b, SPECTRAL_MAX_DEGREE)?;
    let mut ev: Vec<f64> = sym_eigenvalues(&g).into_iter().map(|l| 2.0 * (l - weight)).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, unvec};
    use nalgebra::DVector;

    #[test]
    fn operator_matches_commutator() {
        let a = DMatrix::from_row_slice(3, 3, &[6., 1., 2., 1., 5., 3., 2., 3., 4.]);
        let b = DMatrix::from_row_slice(3, 3, &[1., 0., 2., 0., 3., 1., 2., 1., 0.]);
        let m = restricted_operator(&a, &b);
        let u = mean_zero_basis(3);
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.5]);
        let s = &u * unvec(&x, 2) * u.transpose();
        let direct = commutator(&a, &s, &b);
        let via = unvec(&(&m * &x), 3);
        assert!((direct - via).amax() < 1e-12);
    }

    #[test]
    fn zero_graphs_have_zero_spectrum() {
        let z = DMatrix::zeros(4, 4);
        let e = spectral_endpoints(&z, &z).unwrap();
        assert_eq!((e.lambda_min, e.lambda_max), (0.0, 0.0));
    }

    #[test]
    fn cap_is_enforced() {
        let z = DMatrix::zeros(5, 5);
        assert!(matches!(spectral_endpoints_capped(&z, &z, 4), Err(Error::DimensionCap { n: 5, cap: 4 })));
    }
}
