//! Barrier-penalized relaxation `||AS - SB||^2 + alpha F(S)` followed along a
//! decreasing schedule of `alpha`. For isomorphic inputs the minimizers
//! approach the centroid of the isomorphism set.

use nalgebra::{DMatrix, DVector};

use super::{check_square_pair, DSMatrix, FEAS_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Barrier {
    /// `F(S) = sum S_ij log S_ij`.
    Entropy,
    /// `F(S) = -sum log S_ij`.
    Log,
}

#[derive(Clone, Copy, Debug)]
pub struct PenaltyOpts {
    /// Newton iterations stop once half the squared Newton decrement is below this.
    pub inner_tol: f64,
    pub max_newton: usize,
}

impl Default for PenaltyOpts {
    fn default() -> Self {
        Self { inner_tol: 1e-14, max_newton: 200 }
    }
}

/// `alpha_i = alpha0 * rho^i` for `i = 0 .. steps`.
pub fn default_schedule(alpha0: f64, rho: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| alpha0 * rho.powi(i as i32)).collect()
}

/// Number of halvings in [`penalty_schedule`]; ends near `alpha = 2e-12`.
pub const PENALTY_STEPS: usize = 40;

/// `1, 1/2, 1/4, ...` with [`PENALTY_STEPS`] entries.
pub fn penalty_schedule() -> Vec<f64> {
    default_schedule(1.0, 0.5, PENALTY_STEPS)
}

struct Problem {
    n: usize,
    /// Matrix of the quadratic form on `vec(S)` (column-major).
    q: DMatrix<f64>,
    /// Row sums and all but the last column sum.
    eq: DMatrix<f64>,
    barrier: Barrier,
}

impl Problem {
    fn new(a: &DMatrix<f64>, b: &DMatrix<f64>, barrier: Barrier) -> Self {
        let n = a.nrows();
        let nn = n * n;
        let idx = |i: usize, j: usize| i + j * n;
        let mut m = DMatrix::zeros(nn, nn);
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    m[(idx(i, j), idx(k, j))] += a[(i, k)];
                    m[(idx(i, j), idx(i, k))] -= b[(k, j)];
                }
            }
        }
        let q = m.transpose() * &m;
        let mut eq = DMatrix::zeros(2 * n - 1, nn);
        for i in 0..n {
            for j in 0..n {
                eq[(i, idx(i, j))] = 1.0;
                if j + 1 < n {
                    eq[(n + j, idx(i, j))] = 1.0;
                }
            }
        }
        Self { n, q, eq, barrier }
    }

    fn barrier_value(&self, x: &DVector<f64>) -> f64 {
        match self.barrier {
            Barrier::Entropy => x.iter().map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 }).sum(),
            Barrier::Log => x.iter().map(|&v| -v.ln()).sum(),
        }
    }

    fn value(&self, x: &DVector<f64>, alpha: f64) -> f64 {
        x.dot(&(&self.q * x)) + alpha * self.barrier_value(x)
    }

    fn gradient(&self, x: &DVector<f64>, alpha: f64) -> DVector<f64> {
        let d = match self.barrier {
            Barrier::Entropy => x.map(|v| v.ln() + 1.0),
            Barrier::Log => x.map(|v| -1.0 / v),
        };
        &self.q * x * 2.0 + d * alpha
    }

    fn curvature(&self, x: &DVector<f64>) -> DVector<f64> {
        match self.barrier {
            Barrier::Entropy => x.map(|v| 1.0 / v),
            Barrier::Log => x.map(|v| 1.0 / (v * v)),
        }
    }

    /// Damped Newton on the equality-constrained barrier problem.
    fn minimize(&self, x: &mut DVector<f64>, alpha: f64, opts: &PenaltyOpts) -> Result<()> {
        let nn = self.n * self.n;
        let mc = self.eq.nrows();
        for _ in 0..opts.max_newton {
            let g = self.gradient(x, alpha);
            let h_diag = self.curvature(x);
            let mut kkt = DMatrix::zeros(nn + mc, nn + mc);
            kkt.view_mut((0, 0), (nn, nn)).copy_from(&(&self.q * 2.0));
            for k in 0..nn {
                kkt[(k, k)] += alpha * h_diag[k];
            }
            kkt.view_mut((nn, 0), (mc, nn)).copy_from(&self.eq);
            kkt.view_mut((0, nn), (nn, mc)).copy_from(&self.eq.transpose());
            let mut rhs = DVector::zeros(nn + mc);
            rhs.rows_mut(0, nn).copy_from(&(-&g));
            // pull sums back to one if they drifted
            let drift = &self.eq * &*x - DVector::from_element(mc, 1.0);
            rhs.rows_mut(nn, mc).copy_from(&(-drift));
            let Some(sol) = kkt.lu().solve(&rhs) else {
                return Err(Error::BarrierDiverged { alpha });
            };
            let d = sol.rows(0, nn).into_owned();
            let hd = &self.q * &d * 2.0 + d.component_mul(&h_diag) * alpha;
            let decrement = d.dot(&hd);
            if !decrement.is_finite() {
                return Err(Error::BarrierDiverged { alpha });
            }
            if decrement / 2.0 <= opts.inner_tol {
                return Ok(());
            }
            let mut t: f64 = 1.0;
            for k in 0..nn {
                if d[k] < 0.0 {
                    t = t.min(0.99 * x[k] / -d[k]);
                }
            }
            let f0 = self.value(x, alpha);
            let slope = g.dot(&d);
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &*x + &d * t;
                let fc = self.value(&cand, alpha);
                if fc.is_finite() && fc <= f0 + 0.25 * t * slope.min(0.0) + 1e-15 * f0.abs() {
                    *x = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // no further progress representable in floating point
                return Ok(());
            }
            if x.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::BarrierDiverged { alpha });
            }
        }
        Ok(())
    }
}

/// Follows the barrier-penalized minimizers along `alphas` (strictly
/// decreasing, positive), warm-starting each solve at the previous one.
pub fn penalty_solve(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    barrier: Barrier,
    alphas: &[f64],
    opts: &PenaltyOpts,
) -> Result<DSMatrix> {
    let n = check_square_pair(a, b)?;
    if alphas.iter().any(|&al| !(al > 0.0)) || alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::PreconditionFailed(
            "penalty schedule must be positive and strictly decreasing".into(),
        ));
    }
    if n == 1 {
        return Ok(DSMatrix::identity(1));
    }
    let problem = Problem::new(a, b, barrier);
    let mut x = DVector::from_element(n * n, 1.0 / n as f64);
    for &alpha in alphas {
        problem.minimize(&mut x, alpha, opts)?;
    }
    let s = DMatrix::from_column_slice(n, n, x.as_slice());
    Ok(DSMatrix::new_unchecked(s, FEAS_TOL))
}
