//! Euclidean projection onto the Birkhoff polytope and feasibility repair.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct DykstraOpts {
    /// Iteration cap is `iter_factor * n`.
    pub iter_factor: usize,
    /// Stop when successive iterates and the affine/orthant gap are below this.
    pub tol: f64,
}

impl Default for DykstraOpts {
    fn default() -> Self {
        Self { iter_factor: 10, tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub s: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest violation of `S >= 0`, `S 1 = 1`, `1^T S = 1^T`.
pub fn ds_residual(s: &DMatrix<f64>) -> f64 {
    let neg = s.iter().fold(0.0f64, |m, &v| m.max(-v));
    let rows = s.row_iter().fold(0.0f64, |m, r| m.max((r.sum() - 1.0).abs()));
    let cols = s.column_iter().fold(0.0f64, |m, c| m.max((c.sum() - 1.0).abs()));
    neg.max(rows).max(cols)
}

/// Projection onto `{X : X 1 = 1, 1^T X = 1^T}`.
fn project_affine(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let nf = n as f64;
    let r: DVector<f64> = x.column_sum().add_scalar(-1.0);
    let c: DVector<f64> = x.row_sum().transpose().add_scalar(-1.0);
    let total = x.sum() - nf;
    DMatrix::from_fn(n, n, |i, j| x[(i, j)] - r[i] / nf - c[j] / nf + total / (nf * nf))
}

/// Dykstra's alternating projections between the affine sum constraints and
/// the nonnegative orthant. The returned matrix is nonnegative; its sums are
/// exact only up to the reported convergence.
pub fn project_ds(x: &DMatrix<f64>, opts: &DykstraOpts) -> Projection {
    let n = x.nrows();
    let cap = (opts.iter_factor * n).max(1);
    let mut y = x.clone();
    let mut q = DMatrix::zeros(n, n);
    for it in 1..=cap {
        let z = project_affine(&y);
        let w = &z + &q;
        let y_next = w.map(|v| v.max(0.0));
        q = &w - &y_next;
        let step = (&y_next - &y).amax();
        let gap = (&z - &y_next).amax();
        y = y_next;
        if step <= opts.tol && gap <= opts.tol {
            return Projection { s: y, iterations: it, converged: true };
        }
    }
    Projection { s: y, iterations: cap, converged: false }
}

/// Alternating row/column normalization of a nonnegative matrix. Zeros stay
/// zero, so it repairs small sum errors without touching the support.
pub fn sinkhorn_polish(s: &DMatrix<f64>, tol: f64, max_iter: usize) -> DMatrix<f64> {
    let mut m = s.map(|v| v.max(0.0));
    for _ in 0..max_iter {
        for mut row in m.row_iter_mut() {
            let t = row.sum();
            if t > 0.0 {
                row /= t;
            }
        }
        for mut col in m.column_iter_mut() {
            let t = col.sum();
            if t > 0.0 {
                col /= t;
            }
        }
        if ds_residual(&m) <= tol {
            break;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_projection_fixes_sums() {
        let x = DMatrix::from_row_slice(3, 3, &[1., 2., 3., 0., 0., 1., 5., -1., 2.]);
        let p = project_affine(&x);
        for i in 0..3 {
            assert!((p.row(i).sum() - 1.0).abs() < 1e-12);
            assert!((p.column(i).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ds_points_are_fixed() {
        let s = DMatrix::from_row_slice(3, 3, &[0.5, 0.5, 0., 0.25, 0.25, 0.5, 0.25, 0.25, 0.5]);
        let p = project_ds(&s, &DykstraOpts::default());
        assert!(p.converged);
        assert!((&p.s - &s).amax() < 1e-12);
    }

    #[test]
    fn projection_is_feasible() {
        let x = DMatrix::from_row_slice(3, 3, &[3., -1., 0.2, 0.4, 0.1, -2., 1., 1., 1.]);
        let p = project_ds(&x, &DykstraOpts { iter_factor: 1000, tol: 1e-12 });
        assert!(ds_residual(&p.s) < 1e-10);
    }
}
