//! Faces of the convex isomorphism set and walking them down to an extreme
//! point.
//!
//! The face through a convex isomorphism `S` is
//! `V(S) = {R : R 1 = 1, R^T 1 = 1, AR = RB, supp R ⊆ supp S}`. Every face met
//! while shrinking the support lies inside the starting one, so the walk
//! computes one basis at the start and afterwards works in its coordinates.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::{check_square_pair, ds_residual, DSMatrix, FEAS_TOL};
use crate::error::{Error, Result};
use crate::linalg::{column_basis, lstsq, nullspace, pinv, rank};
use crate::permgroup::{Permutation, SupportMask, UnionFind};

#[derive(Clone, Copy, Debug)]
pub struct FaceOpts {
    /// Entries at or below this are snapped to zero.
    pub zero_tol: f64,
    /// Allowed `||AS - SB||_F / max(1, ||A||_F)` and DS violation of a start state.
    pub residual_tol: f64,
    /// Relative singular-value threshold for null spaces.
    pub rank_tol: f64,
}

impl Default for FaceOpts {
    fn default() -> Self {
        Self { zero_tol: 1e-9, residual_tol: 1e-8, rank_tol: 1e-9 }
    }
}

/// A convex isomorphism together with its support and face dimension.
#[derive(Clone, Debug)]
pub struct FaceState {
    pub s: DSMatrix,
    pub support: SupportMask,
    /// `dim V(S)`; zero exactly at extreme points.
    pub affine_dim: usize,
}

impl FaceState {
    /// State whose support is `{S_ij > zero_tol}`; `affine_dim` is filled in
    /// by [`face_affine_space`] callers as needed.
    pub fn from_matrix(s: DSMatrix, zero_tol: f64) -> Self {
        let support = SupportMask::from_fn(s.n(), |i, j| s[(i, j)] > zero_tol);
        Self { s, support, affine_dim: 0 }
    }
}

/// Affine parametrization `x = reference + directions * y` of a face, in the
/// coordinates of its support entries (column-major order).
#[derive(Clone, Debug)]
pub struct FaceBasis {
    n: usize,
    entries: Vec<(usize, usize)>,
    reference: DVector<f64>,
    directions: DMatrix<f64>,
}

impl FaceBasis {
    pub fn dim(&self) -> usize {
        self.directions.ncols()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Support entries `(i, j)`, column-major.
    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn reference(&self) -> DMatrix<f64> {
        self.to_matrix(&self.reference)
    }

    /// Orthonormal direction matrices spanning the face.
    pub fn direction_matrices(&self) -> Vec<DMatrix<f64>> {
        (0..self.dim()).map(|l| self.to_matrix(&self.directions.column(l).into_owned())).collect()
    }

    pub(crate) fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    pub(crate) fn reference_values(&self) -> &DVector<f64> {
        &self.reference
    }

    pub(crate) fn to_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (e, &(i, j)) in self.entries.iter().enumerate() {
            m[(i, j)] = x[e];
        }
        m
    }

    pub(crate) fn values_of(&self, s: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.entries.len(), self.entries.iter().map(|&(i, j)| s[(i, j)]))
    }

    fn point(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.reference + &self.directions * y
    }
}

fn check_state(a: &DMatrix<f64>, b: &DMatrix<f64>, s: &DMatrix<f64>, opts: &FaceOpts) -> Result<()> {
    let energy = crate::linalg::commutator(a, s, b).norm() / a.norm().max(1.0);
    let residual = energy.max(ds_residual(s));
    if residual > opts.residual_tol {
        return Err(Error::InfeasibleState { residual });
    }
    Ok(())
}

/// Basis of the face through the convex isomorphism `s`, with support
/// `{s_ij > zero_tol}`.
pub fn face_basis(a: &DMatrix<f64>, b: &DMatrix<f64>, s: &DMatrix<f64>, opts: &FaceOpts) -> Result<FaceBasis> {
    let n = check_square_pair(a, b)?;
    check_state(a, b, s, opts)?;
    let entries: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .filter(|&(i, j)| s[(i, j)] > opts.zero_tol)
        .collect();
    let directions = face_directions(a, b, n, &entries, opts);
    let reference =
        DVector::from_iterator(entries.len(), entries.iter().map(|&(i, j)| s[(i, j)]));
    Ok(FaceBasis { n, entries, reference, directions })
}

/// Spanning set of directions `D` of `V(S) - S` for the support of `state`:
/// null space of the homogeneous sum and commutation equations restricted to
/// the support. Empty exactly at extreme points.
pub fn face_affine_space(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    state: &FaceState,
    opts: &FaceOpts,
) -> Result<Vec<DMatrix<f64>>> {
    let n = check_square_pair(a, b)?;
    check_state(a, b, &state.s, opts)?;
    let entries: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .filter(|&(i, j)| state.support.allowed(i, j))
        .collect();
    let d = face_directions(a, b, n, &entries, opts);
    Ok((0..d.ncols())
        .map(|l| {
            let mut m = DMatrix::zeros(n, n);
            for (e, &(i, j)) in entries.iter().enumerate() {
                m[(i, j)] = d[(e, l)];
            }
            m
        })
        .collect())
}

/// Above this many dense matrix entries the sparse paths are used.
const DENSE_LIMIT: usize = 20_000_000;

fn face_directions(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    n: usize,
    entries: &[(usize, usize)],
    opts: &FaceOpts,
) -> DMatrix<f64> {
    let m = entries.len();
    if m == 0 {
        return DMatrix::zeros(0, 0);
    }
    let scale = 1.0 / a.norm().max(b.norm()).max(1e-300);
    let rows = sparse_rows(a, b, n, entries, scale);
    if rows.len() * m <= DENSE_LIMIT {
        let mut f = DMatrix::zeros(rows.len(), m);
        for (r, row) in rows.iter().enumerate() {
            for &(e, v) in row {
                f[(r, e)] += v;
            }
        }
        return nullspace(&f, opts.rank_tol, 1e-14);
    }
    if let Some(d) = block_directions(a, b, n, entries, scale, opts) {
        return d;
    }
    // normal equations: squared singular values limit resolution to ~sqrt(eps)
    let mut gram = DMatrix::zeros(m, m);
    for row in &rows {
        for &(e1, v1) in row {
            for &(e2, v2) in row {
                gram[(e1, e2)] += v1 * v2;
            }
        }
    }
    let eig = nalgebra::SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cut = (opts.rank_tol.max(1e-7)).powi(2) * top;
    let keep: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] <= cut).collect();
    let mut d = DMatrix::zeros(m, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        d.set_column(c, &eig.eigenvectors.column(k));
    }
    d
}

/// Homogeneous equations on the support entries as sparse rows: row sums,
/// column sums, then `(AR - RB)_ij` scaled by `scale`.
fn sparse_rows(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    n: usize,
    entries: &[(usize, usize)],
    scale: f64,
) -> Vec<Vec<(usize, f64)>> {
    let mut by_row: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut by_col: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(i, j)) in entries.iter().enumerate() {
        by_row[i].push((e, j));
        by_col[j].push((e, i));
    }
    let mut rows = Vec::new();
    for list in by_row.iter().chain(by_col.iter()) {
        if !list.is_empty() {
            rows.push(list.iter().map(|&(e, _)| (e, 1.0)).collect());
        }
    }
    for j in 0..n {
        for i in 0..n {
            let mut row: Vec<(usize, f64)> = Vec::new();
            // (AR)_ij = sum_k A_ik R_kj
            for &(e, k) in &by_col[j] {
                let v = a[(i, k)];
                if v != 0.0 {
                    row.push((e, v * scale));
                }
            }
            // (RB)_ij = sum_k R_ik B_kj
            for &(e, k) in &by_row[i] {
                let v = b[(k, j)];
                if v != 0.0 {
                    row.push((e, -v * scale));
                }
            }
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    rows
}

/// Face directions when the support is a union of full square blocks
/// `I_c x J_c` and one block `r` determines the others through
/// `R_c = A[I_r, I_c]^+ R_r B[J_r, J_c]` (full column rank of `A[I_r, I_c]`).
/// The unknowns are then only the entries of `R_r`.
fn block_directions(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    n: usize,
    entries: &[(usize, usize)],
    scale: f64,
    opts: &FaceOpts,
) -> Option<DMatrix<f64>> {
    let mut uf = UnionFind::new(2 * n);
    for &(i, j) in entries {
        uf.union(i, n + j);
    }
    let mut comps: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut comp_of = vec![usize::MAX; 2 * n];
    for v in 0..2 * n {
        let root = uf.find(v);
        if comp_of[root] == usize::MAX {
            comp_of[root] = comps.len();
            comps.push((Vec::new(), Vec::new()));
        }
        let c = comp_of[root];
        comp_of[v] = c;
        if v < n {
            comps[c].0.push(v);
        } else {
            comps[c].1.push(v - n);
        }
    }
    let mut count = vec![0usize; comps.len()];
    for &(i, _) in entries {
        count[comp_of[i]] += 1;
    }
    for (c, (rows, cols)) in comps.iter().enumerate() {
        if rows.len() != cols.len() || count[c] != rows.len() * cols.len() {
            return None;
        }
    }
    let sub = |m: &DMatrix<f64>, r: &[usize], c: &[usize]| {
        DMatrix::from_fn(r.len(), c.len(), |x, y| m[(r[x], c[y])])
    };

    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(comps[c].0.len()));
    let (anchor, pinvs) = order.into_iter().find_map(|r| {
        let mut pinvs = Vec::with_capacity(comps.len());
        for (c, (rows, _)) in comps.iter().enumerate() {
            if c == r {
                pinvs.push(None);
                continue;
            }
            let arc = sub(a, &comps[r].0, rows);
            if rank(&arc, 1e-8, 1e-14) != rows.len() {
                return None;
            }
            pinvs.push(Some(pinv(&arc, 1e-12)));
        }
        Some((r, pinvs))
    })?;

    let nr = comps[anchor].0.len();
    let unknowns = nr * nr;
    let blocks_of = |y: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let rr = DMatrix::from_column_slice(nr, nr, y.as_slice());
        comps
            .iter()
            .enumerate()
            .map(|(c, (_, cols))| match &pinvs[c] {
                None => rr.clone(),
                Some(p) => p * &rr * sub(b, &comps[anchor].1, cols),
            })
            .collect()
    };
    let a_blocks: Vec<Vec<DMatrix<f64>>> = comps
        .iter()
        .map(|(ra, _)| comps.iter().map(|(rb, _)| sub(a, ra, rb)).collect())
        .collect();
    let b_blocks: Vec<Vec<DMatrix<f64>>> = comps
        .iter()
        .map(|(_, ca)| comps.iter().map(|(_, cb)| sub(b, ca, cb)).collect())
        .collect();
    let total_rows = n * n + 2 * n;
    let mut t = DMatrix::zeros(total_rows, unknowns);
    for u in 0..unknowns {
        let mut y = DVector::zeros(unknowns);
        y[u] = 1.0;
        let blocks = blocks_of(&y);
        let mut row = 0;
        for (ca, ra) in blocks.iter().enumerate() {
            for (cb, rb) in blocks.iter().enumerate() {
                let res = (&a_blocks[ca][cb] * rb - ra * &b_blocks[ca][cb]) * scale;
                for v in res.iter() {
                    t[(row, u)] = *v;
                    row += 1;
                }
            }
            for s in ra.column_sum().iter().chain(ra.row_sum().iter()) {
                t[(row, u)] = *s;
                row += 1;
            }
        }
        debug_assert_eq!(row, total_rows);
    }
    let null = nullspace(&t, opts.rank_tol, 1e-14);

    let mut index = vec![usize::MAX; n * n];
    for (e, &(i, j)) in entries.iter().enumerate() {
        index[i * n + j] = e;
    }
    let mut d = DMatrix::zeros(entries.len(), null.ncols());
    for k in 0..null.ncols() {
        let blocks = blocks_of(&null.column(k).into_owned());
        for (c, (rows, cols)) in comps.iter().enumerate() {
            for (x, &i) in rows.iter().enumerate() {
                for (y, &j) in cols.iter().enumerate() {
                    d[(index[i * n + j], k)] = blocks[c][(x, y)];
                }
            }
        }
    }
    Some(column_basis(&d, 1e-10))
}

/// Result of walking a face down to an extreme point.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub state: FaceState,
    /// Number of support-shrinking steps taken.
    pub steps: usize,
    /// The extreme point as a permutation, when all entries are within 1e-6 of 0 or 1.
    pub permutation: Option<Permutation>,
}

impl Extraction {
    /// Largest `min(x, 1 - x)` over entries; zero for permutations.
    pub fn fractional(&self) -> f64 {
        self.state.s.iter().map(|&v| v.min(1.0 - v).max(0.0)).fold(0.0, f64::max)
    }
}

/// Walks from the convex isomorphism `s0` to an extreme point of the set of
/// convex isomorphisms: move along a face direction until an entry hits
/// zero, snap, re-solve on the smaller support, repeat until the face is a point.
pub fn pataki_extract(a: &DMatrix<f64>, b: &DMatrix<f64>, s0: &DSMatrix, opts: &FaceOpts) -> Result<Extraction> {
    let basis = face_basis(a, b, s0, opts)?;
    pataki_extract_in(&basis, s0, opts)
}

/// Face walk from `start`, which must lie in the face described by `basis`.
pub fn pataki_extract_in(basis: &FaceBasis, start: &DMatrix<f64>, opts: &FaceOpts) -> Result<Extraction> {
    let d = basis.directions();
    let k = basis.dim();
    let m = basis.entries.len();
    let mut y = d.transpose() * (basis.values_of(start) - &basis.reference);
    let mut zeros: BTreeSet<usize> = BTreeSet::new();
    let mut x = basis.point(&y);
    resnap(basis, &mut y, &mut x, &mut zeros, opts);

    let mut steps = 0;
    loop {
        let free = face_null(d, &zeros, k, opts);
        if free.ncols() == 0 {
            break;
        }
        if steps >= m {
            return Err(Error::StalledFace { step: steps });
        }
        let mut z = free.column(0).into_owned();
        let mut dir = d * &z;
        let floor = 1e-12 * dir.amax();
        if !dir.iter().any(|&v| v < -floor) {
            z = -z;
            dir = -dir;
        }
        let t = (0..m)
            .filter(|&e| !zeros.contains(&e) && dir[e] < -floor)
            .map(|e| x[e].max(0.0) / -dir[e])
            .fold(f64::INFINITY, f64::min);
        if !t.is_finite() {
            return Err(Error::StalledFace { step: steps });
        }
        y += z * t;
        x = basis.point(&y);
        let before = zeros.len();
        resnap(basis, &mut y, &mut x, &mut zeros, opts);
        if zeros.len() == before {
            return Err(Error::StalledFace { step: steps });
        }
        steps += 1;
    }

    let mut s = DMatrix::zeros(basis.n, basis.n);
    for (e, &(i, j)) in basis.entries.iter().enumerate() {
        if !zeros.contains(&e) {
            s[(i, j)] = x[e].max(0.0);
        }
    }
    let permutation = Permutation::from_matrix(&s, 1e-6);
    let support = SupportMask::from_fn(basis.n, |i, j| s[(i, j)] > 0.0);
    Ok(Extraction {
        state: FaceState { s: DSMatrix::new_unchecked(s, FEAS_TOL), support, affine_dim: 0 },
        steps,
        permutation,
    })
}

/// Adds entries at or below `zero_tol` to the zero set and moves `y` (least
/// squares, minimum norm) so that the zero set vanishes exactly in the affine model.
fn resnap(
    basis: &FaceBasis,
    y: &mut DVector<f64>,
    x: &mut DVector<f64>,
    zeros: &mut BTreeSet<usize>,
    opts: &FaceOpts,
) {
    let d = basis.directions();
    for _ in 0..8 {
        let added: Vec<usize> = (0..x.len())
            .filter(|&e| !zeros.contains(&e) && x[e] <= opts.zero_tol)
            .collect();
        let stale = zeros.iter().any(|&e| x[e].abs() > 1e-14);
        if added.is_empty() && !stale {
            return;
        }
        zeros.extend(added);
        if d.ncols() == 0 {
            return;
        }
        let idx: Vec<usize> = zeros.iter().copied().collect();
        let sub = DMatrix::from_fn(idx.len(), d.ncols(), |r, c| d[(idx[r], c)]);
        let rhs = DVector::from_iterator(idx.len(), idx.iter().map(|&e| -x[e]));
        *y += lstsq(&sub, &rhs, 1e-10);
        *x = basis.point(y);
    }
}

/// Coordinates `z` with `D z` vanishing on the zero set.
fn face_null(d: &DMatrix<f64>, zeros: &BTreeSet<usize>, k: usize, opts: &FaceOpts) -> DMatrix<f64> {
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    if zeros.is_empty() {
        return DMatrix::identity(k, k);
    }
    let idx: Vec<usize> = zeros.iter().copied().collect();
    let sub = DMatrix::from_fn(idx.len(), k, |r, c| d[(idx[r], c)]);
    nullspace(&sub, opts.rank_tol.max(1e-9), 1e-10)
}
