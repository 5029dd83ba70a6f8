//! The centroid of the isomorphism set, built without solving anything.

use nalgebra::DMatrix;

use super::{DSMatrix, FEAS_TOL};
use crate::error::{Error, Result};
use crate::exactness::{signature, signature_classes};
use crate::permgroup::OrbitPartition;

/// Block matrix with value `1/n_j` on each orbit block `I_j x I_j`.
pub fn centroid_from_orbits(orbits: &OrbitPartition) -> DSMatrix {
    let n = orbits.degree();
    let mut s = DMatrix::zeros(n, n);
    for class in orbits.classes() {
        let v = 1.0 / class.len() as f64;
        for &i in class {
            for &j in class {
                s[(i, j)] = v;
            }
        }
    }
    DSMatrix::new_unchecked(s, FEAS_TOL)
}

/// Row-normalized indicator of equal signature values (within `tol`).
/// Equals the centroid of `Aut(A)` when the signature is discriminative.
pub fn centroid_from_signature(a: &DMatrix<f64>, tol: f64) -> DSMatrix {
    centroid_from_orbits(&signature_classes(&signature(a), tol))
}

/// Two-graph centroid: `S_ij > 0` iff `|s_i(A) - s_j(B)| <= tol`, rows
/// normalized. Fails when the signature classes of `A` and `B` do not pair up
/// with equal sizes, which rules out an isomorphism.
pub fn centroid_from_signature_pair(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<DSMatrix> {
    let n = a.nrows();
    let (sa, sb) = (signature(a), signature(b));
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        let matches: Vec<usize> = (0..n).filter(|&j| (sa.0[i] - sb.0[j]).abs() <= tol).collect();
        if matches.is_empty() {
            return Err(Error::PreconditionFailed(format!(
                "signature value of vertex {i} of A has no match in B"
            )));
        }
        let v = 1.0 / matches.len() as f64;
        for j in matches {
            s[(i, j)] = v;
        }
    }
    DSMatrix::new(s, FEAS_TOL).map_err(|_| {
        Error::PreconditionFailed("signature classes of A and B have different sizes".into())
    })
}
