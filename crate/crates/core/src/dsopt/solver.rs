//! Projected gradient for `||AS - SB||_F^2 + <C, S>` over doubly-stochastic `S`.

use nalgebra::DMatrix;

use super::ds::{project_ds, sinkhorn_polish, DykstraOpts};
use super::{check_square_pair, matching_energy, DSMatrix, FEAS_TOL};
use crate::error::Result;
use crate::linalg::{commutator, frob_dot};

#[derive(Clone, Copy, Debug)]
pub struct SolverOpts {
    pub max_iter: usize,
    /// Stop when the objective decrease falls below `rel_tol * objective`.
    pub rel_tol: f64,
    /// Stop when the gradient-mapping norm falls below this.
    pub grad_tol: f64,
    /// Energy regarded as zero, relative to `||A||_F`, when reporting convergence.
    pub energy_tol: f64,
    pub feas_tol: f64,
    pub projection: DykstraOpts,
}

impl Default for SolverOpts {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            rel_tol: 1e-15,
            grad_tol: 1e-10,
            energy_tol: 1e-8,
            feas_tol: FEAS_TOL,
            projection: DykstraOpts { iter_factor: 200, tol: 1e-13 },
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub s: DSMatrix,
    /// `||AS - SB||_F` at the returned `S`.
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `||AS - SB||_F^2` over doubly-stochastic matrices, starting from `J/n`.
pub fn solve_relaxation(a: &DMatrix<f64>, b: &DMatrix<f64>, opts: &SolverOpts) -> Result<SolveResult> {
    let n = check_square_pair(a, b)?;
    solve_with_linear_term(a, b, &DMatrix::zeros(n, n), opts)
}

/// Minimizes `||AS - SB||_F^2 + <C, S>` over doubly-stochastic matrices by
/// monotone accelerated projected gradient with backtracking, starting from `J/n`.
pub fn solve_with_linear_term(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    opts: &SolverOpts,
) -> Result<SolveResult> {
    let n = check_square_pair(a, b)?;
    check_square_pair(a, c)?;
    let objective = |s: &DMatrix<f64>| commutator(a, s, b).norm_squared() + frob_dot(c, s);
    let gradient = |s: &DMatrix<f64>| {
        let r = commutator(a, s, b);
        (a.tr_mul(&r) - r * b.transpose()) * 2.0 + c
    };
    let lip = 2.0 * (a.norm() + b.norm()).powi(2);
    let base_step = if lip > 0.0 { 1.0 / lip } else { 1.0 };

    // monotone accelerated projected gradient: `s` is the best point so far,
    // `y` the extrapolated point the gradient step is taken from
    let mut s = DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut f = objective(&s);
    let mut y = s.clone();
    let mut fy = f;
    let mut theta = 1.0f64;
    let mut step = base_step;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let g = gradient(&y);
        let mut t = (step * 2.0).min(base_step * 1e6);
        let accepted = loop {
            let cand = project_ds(&(&y - &g * t), &opts.projection).s;
            let d = &cand - &y;
            let fc = objective(&cand);
            let model = fy + frob_dot(&g, &d) + d.norm_squared() / (2.0 * t);
            if fc <= model + 1e-15 * fy.abs().max(1e-300) {
                break Some((cand, fc, d.norm() / t));
            }
            t *= 0.5;
            if t < base_step * 1e-12 {
                break None;
            }
        };
        let Some((z, fz, grad_map)) = accepted else {
            converged = true;
            break;
        };
        step = t;
        let theta_next = (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0;
        if fz <= f {
            let decrease = f - fz;
            let prev = std::mem::replace(&mut s, z);
            f = fz;
            if grad_map <= opts.grad_tol || (decrease <= opts.rel_tol * f.abs() && theta == 1.0) {
                converged = true;
                break;
            }
            y = &s + (&s - &prev) * ((theta - 1.0) / theta_next);
            theta = theta_next;
        } else {
            // restart the momentum from the best point
            if theta == 1.0 {
                converged = true;
                break;
            }
            y = s.clone();
            theta = 1.0;
        }
        fy = objective(&y);
    }
    let s = sinkhorn_polish(&s, 1e-14, 100);
    let energy = matching_energy(a, b, &s);
    Ok(SolveResult { s: DSMatrix::new_unchecked(s, opts.feas_tol), energy, iterations, converged })
}
