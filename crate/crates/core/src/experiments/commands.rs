//! Classification, grid symmetries and the constant-row-sum counterexample.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dsopt::{enumerate_isomorphisms, solve_relaxation, solve_with_linear_term, EnumerateOpts, SolverOpts};
use crate::error::{Error, Result};
use crate::exactness::{classify_generic, GenericVerdict};
use crate::groupspace::SymGraph;
use crate::permgroup::{
    automorphism_oracle, stabilizer_closure, GroupSpec, PermGroup, Permutation, DEFAULT_MAX_ORDER,
};
use crate::projection::invariant_costs;

use super::generators::gen_grid;

/// Classifies a group, refusing groups that are not automorphism groups of
/// any weighted graph.
pub fn cmd_classify(spec: &GroupSpec, trials: usize, seed: u64, tol: f64) -> Result<GenericVerdict> {
    let g = spec.to_group(DEFAULT_MAX_ORDER)?;
    let closed = stabilizer_closure(&g, DEFAULT_MAX_ORDER)?;
    if closed.order() != g.order() {
        return Err(Error::NotSymmetryGroup { order: g.order(), closure_order: closed.order() });
    }
    Ok(classify_generic(&g, trials, seed, tol))
}

#[derive(Clone, Debug, Serialize)]
pub struct GridReport {
    pub rows: usize,
    pub cols: usize,
    pub n: usize,
    pub permutations: Vec<Permutation>,
    pub is_group: bool,
    /// The centroid was certified to lie in the hull of the permutations.
    pub complete: bool,
    pub remixes: usize,
    pub wall_ms: Option<f64>,
}

/// All symmetries of the `rows x cols` lattice distance matrix, found by
/// enumerating extreme points from the centroid.
pub fn cmd_grid_symmetries(rows: usize, cols: usize, timing: bool) -> Result<GridReport> {
    let a = gen_grid(rows, cols);
    let start = Instant::now();
    let found = enumerate_isomorphisms(&a, &a, &EnumerateOpts::default())?;
    let wall = start.elapsed().as_secs_f64() * 1e3;
    let n = a.n();
    let is_group = PermGroup::from_elements(n, found.permutations.clone()).is_ok();
    Ok(GridReport {
        rows,
        cols,
        n,
        permutations: found.permutations,
        is_group,
        complete: found.complete,
        remixes: found.remixes,
        wall_ms: timing.then_some(wall),
    })
}

/// The 3x3 graph with constant row sums 9 and no nontrivial automorphism.
pub fn counterexample_graph() -> SymGraph {
    SymGraph::from_row_slice(3, &[6., 1., 2., 1., 5., 3., 2., 3., 4.]).expect("symmetric")
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub row_sums: Vec<f64>,
    /// `||A (J/3) - (J/3) A||_F`.
    pub flat_energy: f64,
    pub automorphism_order: usize,
    /// `n - ||S||_F^2` of the plain relaxation's solution.
    pub plain_permutation_gap: f64,
    pub invariant_costs: Vec<Vec<f64>>,
    pub augmented_solution: Vec<Vec<f64>>,
    /// Max-entry distance of the cost-augmented solution to the identity.
    pub augmented_distance_to_identity: f64,
    pub passed: bool,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// The plain relaxation has the flat matrix as a zero-energy solution even
/// though the graph is asymmetric; adding sorted-row costs restores the identity.
pub fn cmd_counterexample() -> Result<CounterexampleReport> {
    let a = counterexample_graph();
    let n = a.n();
    let row_sums: Vec<f64> = a.row_iter().map(|r| r.sum()).collect();
    let flat = DMatrix::from_element(n, n, 1.0 / n as f64);
    let flat_energy = crate::linalg::commutator(&a, &flat, &a).norm();
    let automorphism_order = automorphism_oracle(&a, 1e-12)?.order();
    let plain = solve_relaxation(&a, &a, &SolverOpts::default())?;
    let costs = invariant_costs(&a, &a)?;
    let augmented = solve_with_linear_term(&a, &a, &costs, &SolverOpts::default())?;
    let distance = (&*augmented.s - DMatrix::identity(n, n)).amax();
    let passed = row_sums.iter().all(|&s| s == 9.0)
        && flat_energy <= 1e-12
        && automorphism_order == 1
        && distance <= 1e-6;
    Ok(CounterexampleReport {
        row_sums,
        flat_energy,
        automorphism_order,
        plain_permutation_gap: plain.s.permutation_gap(),
        invariant_costs: rows_of(&costs),
        augmented_solution: rows_of(&augmented.s),
        augmented_distance_to_identity: distance,
        passed,
    })
}
