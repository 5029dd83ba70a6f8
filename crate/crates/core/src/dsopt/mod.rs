//! Optimization over the Birkhoff polytope of doubly-stochastic matrices.

mod centroid;
mod ds;
mod extreme;
mod face;
mod penalty;
mod solver;

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use centroid::{centroid_from_orbits, centroid_from_signature, centroid_from_signature_pair};
pub use ds::{ds_residual, project_ds, sinkhorn_polish, DykstraOpts, Projection};
pub use extreme::{
    enumerate_isomorphisms, random_objective_extreme_point, EnumerateOpts, Enumeration,
};
pub use face::{
    face_affine_space, face_basis, pataki_extract, pataki_extract_in, Extraction, FaceBasis,
    FaceOpts, FaceState,
};
pub use penalty::{default_schedule, penalty_schedule, penalty_solve, Barrier, PenaltyOpts, PENALTY_STEPS};
pub use solver::{solve_relaxation, solve_with_linear_term, SolveResult, SolverOpts};

/// Default feasibility tolerance for [`DSMatrix`].
pub const FEAS_TOL: f64 = 1e-8;

/// A nonnegative matrix with unit row and column sums, up to `feas_tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct DSMatrix {
    s: DMatrix<f64>,
    feas_tol: f64,
}

impl DSMatrix {
    /// Validates feasibility within `feas_tol`.
    pub fn new(s: DMatrix<f64>, feas_tol: f64) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::DimensionMismatch(format!("{}x{} is not square", s.nrows(), s.ncols())));
        }
        let residual = ds_residual(&s);
        if residual > feas_tol {
            return Err(Error::InfeasibleState { residual });
        }
        Ok(Self { s, feas_tol })
    }

    pub(crate) fn new_unchecked(s: DMatrix<f64>, feas_tol: f64) -> Self {
        Self { s, feas_tol }
    }

    /// The flat matrix `J / n`.
    pub fn flat(n: usize) -> Self {
        Self { s: DMatrix::from_element(n, n, 1.0 / n as f64), feas_tol: FEAS_TOL }
    }

    pub fn identity(n: usize) -> Self {
        Self { s: DMatrix::identity(n, n), feas_tol: FEAS_TOL }
    }

    pub fn n(&self) -> usize {
        self.s.nrows()
    }

    pub fn feas_tol(&self) -> f64 {
        self.feas_tol
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.s
    }

    /// Distance to being a permutation, `n - ||S||_F^2`.
    pub fn permutation_gap(&self) -> f64 {
        self.n() as f64 - self.s.norm_squared()
    }
}

impl Deref for DSMatrix {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.s
    }
}

/// `||AS - SB||_F`.
pub fn matching_energy(a: &DMatrix<f64>, b: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
    crate::linalg::commutator(a, s, b).norm()
}

pub(crate) fn check_square_pair(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<usize> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "A is {:?}, B is {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.nrows())
}
