//! Dense linear-algebra helpers shared by the solvers and certificates.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

/// Frobenius inner product.
pub fn frob_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `A S - S B`.
pub fn commutator(a: &DMatrix<f64>, s: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * s - s * b
}

/// Applies the operator `Q` of the quadratic form `S -> ||AS - SB||^2`,
/// i.e. `Q(D) = A(AD - DB) - (AD - DB)B` for symmetric `A`, `B`.
pub fn quad_apply(a: &DMatrix<f64>, b: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let r = commutator(a, d, b);
    a * &r - &r * b
}

/// Singular values of `m`, sorted in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank with a threshold relative to the largest singular value.
/// `abs_floor` guards the all-zero matrix.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64, abs_floor: f64) -> usize {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return 0 };
    let cut = (rel_tol * top).max(abs_floor);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Reduces a tall matrix to a square upper-triangular factor with the same
/// row space, so that the SVD runs on `ncols x ncols`.
fn compress_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() > m.ncols() {
        m.clone().qr().r()
    } else {
        m.clone()
    }
}

/// Orthonormal basis (as columns) of the right null space of `m`.
///
/// A singular value counts as zero when it is at most
/// `max(rel_tol * sigma_max, abs_floor)`.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64, abs_floor: f64) -> DMatrix<f64> {
    let ncols = m.ncols();
    if ncols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(ncols, ncols);
    }
    let reduced = compress_rows(m);
    // pad so the thin SVD returns a full right basis
    let work = if reduced.nrows() < ncols {
        let mut padded = DMatrix::zeros(ncols, ncols);
        padded
            .view_mut((0, 0), (reduced.nrows(), ncols))
            .copy_from(&reduced);
        padded
    } else {
        reduced
    };
    let svd = SVD::new(work, false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = (rel_tol * top).max(abs_floor);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cut)
        .collect();
    let mut out = DMatrix::zeros(ncols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &v_t.row(i).transpose());
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the column span of `u0`.
pub fn orthonormal_complement(u0: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if u0.ncols() == 0 {
        return DMatrix::identity(u0.nrows(), u0.nrows());
    }
    nullspace(&u0.transpose(), rel_tol, 1e-14)
}

/// Orthonormal basis of the column span of `m`.
pub fn column_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("u requested");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = (rel_tol * top).max(1e-14);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cut)
        .collect();
    let mut out = DMatrix::zeros(m.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Eigenvalues of a symmetric matrix in increasing order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Minimum-norm least-squares solution of `m x = rhs`.
pub fn lstsq(m: &DMatrix<f64>, rhs: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    if m.ncols() == 0 {
        return DVector::zeros(0);
    }
    if m.nrows() == 0 {
        return DVector::zeros(m.ncols());
    }
    let svd = SVD::new(m.clone(), true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (rel_tol * top).max(1e-300);
    svd.solve(rhs, eps).unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

/// Moore-Penrose pseudo-inverse.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = SVD::new(m.clone(), true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (rel_tol * top).max(1e-300);
    svd.pseudo_inverse(eps).unwrap_or_else(|_| DMatrix::zeros(m.ncols(), m.nrows()))
}

/// Column-major flattening `vec(S)`.
pub fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`] for square matrices.
pub fn unvec(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// Orthonormal basis of `{x in R^n : sum(x) = 0}` as an `n x (n-1)` matrix
/// (Helmert construction).
pub fn mean_zero_basis(n: usize) -> DMatrix<f64> {
    let mut u = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let kf = k as f64;
        let norm = (kf * (kf + 1.0)).sqrt();
        for i in 0..k {
            u[(i, k - 1)] = 1.0 / norm;
        }
        u[(k, k - 1)] = -kf / norm;
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_rank_one() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let ns = nullspace(&m, 1e-10, 1e-14);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-12);
        assert!((ns.transpose() * &ns - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn nullspace_of_tall_matrix() {
        let m = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, -1.0, -2.0]);
        let ns = nullspace(&m, 1e-10, 1e-14);
        assert_eq!(ns.ncols(), 1);
        assert!((&m * &ns).norm() < 1e-12);
    }

    #[test]
    fn helmert_basis_is_orthonormal_and_mean_zero() {
        let u = mean_zero_basis(5);
        assert!((u.transpose() * &u - DMatrix::identity(4, 4)).norm() < 1e-12);
        for c in 0..4 {
            assert!(u.column(c).sum().abs() < 1e-12);
        }
    }

    #[test]
    fn rank_of_zero_matrix_is_zero() {
        assert_eq!(rank(&DMatrix::zeros(3, 3), 1e-8, 1e-12), 0);
    }
}
