//! The space `V(G)` of symmetric matrices invariant under conjugation by a
//! permutation group: pair-orbit basis, sampling, witnesses and matrix I/O.

use std::fmt::Write as _;
use std::ops::Deref;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::permgroup::{PermGroup, UnionFind};

/// Tolerance for accepting a loaded matrix as symmetric before exact symmetrization.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Dense real symmetric matrix; symmetry is exact after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymGraph(DMatrix<f64>);

impl SymGraph {
    /// Accepts `m` if it is symmetric within [`SYMMETRY_TOL`] (relative to its
    /// largest entry), then replaces it by `(m + m^T)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Parse(format!("matrix is not symmetric (max asymmetry {asym:.3e})")));
        }
        Ok(Self::symmetrize(m))
    }

    /// `(m + m^T)/2` without a tolerance check.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!("{} entries for n = {n}", data.len())));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn scaled(&self, c: f64) -> SymGraph {
        Self(&self.0 * c)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(parse_matrix_text(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

impl Deref for SymGraph {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Parses the matrix text format: a line holding `n`, then `n` lines of `n`
/// whitespace-separated numbers.
pub fn parse_matrix_text(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| Error::Parse(format!("bad dimension line {header:?}")))?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {n} rows, found {i}")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?} in row {i}"))))
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::Parse(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing data after matrix".into()));
    }
    Ok(m)
}

/// Writes a square matrix in the text format read by [`parse_matrix_text`].
/// Uses shortest round-trip formatting, so parsing the output is lossless.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Orbits of a group acting on unordered index pairs `{i, j}` (with `i = j`
/// allowed). Diagonal orbits come first ordered by smallest index, then
/// off-diagonal orbits ordered by their lexicographically smallest pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairOrbits {
    n: usize,
    orbits: Vec<Vec<(usize, usize)>>,
    label: Vec<usize>,
}

impl PairOrbits {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Pairs `(i, j)` with `i <= j` in each orbit, sorted.
    pub fn orbits(&self) -> &[Vec<(usize, usize)>] {
        &self.orbits
    }

    /// Orbit index of the pair `{i, j}`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        self.label[i * self.n + j]
    }

    /// Row-major `n*n` table of orbit indices.
    pub fn label_matrix(&self) -> Vec<usize> {
        self.label.clone()
    }

    /// Number of matrix entries covered by orbit `p` (off-diagonal pairs count twice).
    pub fn entry_count(&self, p: usize) -> usize {
        self.orbits[p].iter().map(|&(i, j)| if i == j { 1 } else { 2 }).sum()
    }
}

pub fn pair_orbits(g: &PermGroup) -> PairOrbits {
    let n = g.degree();
    let key = |i: usize, j: usize| if i <= j { i * n + j } else { j * n + i };
    let mut uf = UnionFind::new(n * n);
    for p in g.elements() {
        for i in 0..n {
            for j in i..n {
                uf.union(key(i, j), key(p.apply(i), p.apply(j)));
            }
        }
    }
    // roots are smallest keys (i*n+j, i<=j), i.e. lexicographically smallest pairs
    let mut roots: Vec<usize> = Vec::new();
    let mut members: std::collections::HashMap<usize, Vec<(usize, usize)>> = Default::default();
    for i in 0..n {
        for j in i..n {
            let r = uf.find(key(i, j));
            let entry = members.entry(r).or_insert_with(|| {
                roots.push(r);
                Vec::new()
            });
            entry.push((i, j));
        }
    }
    let is_diag = |r: usize| r / n == r % n;
    roots.sort_by_key(|&r| (!is_diag(r), r));
    let mut label = vec![0; n * n];
    let mut orbits = Vec::with_capacity(roots.len());
    for (idx, r) in roots.iter().enumerate() {
        let mut pairs = members.remove(r).unwrap_or_default();
        pairs.sort_unstable();
        for &(i, j) in &pairs {
            label[i * n + j] = idx;
            label[j * n + i] = idx;
        }
        orbits.push(pairs);
    }
    PairOrbits { n, orbits, label }
}

/// Orthonormal basis of `V(G)`: one normalized symmetric orbit indicator per
/// pair orbit. The map from coordinates to matrices is a linear isometry.
#[derive(Clone, Debug)]
pub struct GroupSpaceBasis {
    group: PermGroup,
    orbits: PairOrbits,
    inv_norms: Vec<f64>,
}

pub fn build_basis(g: &PermGroup) -> GroupSpaceBasis {
    let orbits = pair_orbits(g);
    let inv_norms = (0..orbits.len())
        .map(|p| 1.0 / (orbits.entry_count(p) as f64).sqrt())
        .collect();
    GroupSpaceBasis { group: g.clone(), orbits, inv_norms }
}

impl GroupSpaceBasis {
    pub fn group(&self) -> &PermGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.orbits.len()
    }

    pub fn n(&self) -> usize {
        self.orbits.n()
    }

    pub fn pair_orbits(&self) -> &PairOrbits {
        &self.orbits
    }

    /// Basis element `p` as a dense matrix.
    pub fn element(&self, p: usize) -> SymGraph {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for &(i, j) in &self.orbits.orbits()[p] {
            m[(i, j)] = self.inv_norms[p];
            m[(j, i)] = self.inv_norms[p];
        }
        SymGraph(m)
    }

    /// `L(x) = sum_p x_p E_p`.
    pub fn synthesize(&self, x: &[f64]) -> SymGraph {
        assert_eq!(x.len(), self.dim(), "coordinate vector has wrong length");
        let n = self.n();
        SymGraph(DMatrix::from_fn(n, n, |i, j| {
            let p = self.orbits.index(i, j);
            x[p] * self.inv_norms[p]
        }))
    }

    /// Frobenius coordinates `<A, E_p>`; exact inverse of [`Self::synthesize`] on `V(G)`.
    pub fn coordinates(&self, a: &DMatrix<f64>) -> Vec<f64> {
        let n = self.n();
        let mut x = vec![0.0; self.dim()];
        for i in 0..n {
            for j in 0..n {
                let p = self.orbits.index(i, j);
                x[p] += a[(i, j)] * self.inv_norms[p];
            }
        }
        x
    }
}

/// Uniform sample from the radius-`scale` sphere of `V(G)`.
pub fn sample_vg<R: Rng + ?Sized>(basis: &GroupSpaceBasis, rng: &mut R, scale: f64) -> SymGraph {
    let mut x: Vec<f64> = (0..basis.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    // a zero draw has probability zero; fall back to the first axis
    if norm == 0.0 {
        x[0] = scale;
    } else {
        x.iter_mut().for_each(|v| *v *= scale / norm);
    }
    basis.synthesize(&x)
}

/// Block-diagonal matrix with value `r/|I_r|` on orbit block `r` (classes
/// numbered from 1), so its row sums equal the class number.
pub fn discriminative_witness(g: &PermGroup) -> SymGraph {
    let n = g.degree();
    let orbits = g.vertex_orbits();
    let mut m = DMatrix::zeros(n, n);
    for (idx, class) in orbits.classes().iter().enumerate() {
        let v = (idx + 1) as f64 / class.len() as f64;
        for &i in class {
            for &j in class {
                m[(i, j)] = v;
            }
        }
    }
    SymGraph(m)
}

/// Indicator of the orbit of `(min I_r, min I_j)` under `G` acting on
/// `I_r x I_j`, with rows and columns in increasing vertex order. Requires
/// `I_r` to be a full orbit, in which case the result has rank `n_j`.
pub fn full_rank_witness(g: &PermGroup, r: usize, j: usize) -> Result<DMatrix<f64>> {
    let orbits = g.vertex_orbits();
    let class_r = &orbits.classes()[r];
    let class_j = &orbits.classes()[j];
    if class_r.len() != g.order() {
        return Err(Error::NotFullOrbit { orbit: r, len: class_r.len(), order: g.order() });
    }
    let pos = |class: &[usize], v: usize| class.iter().position(|&x| x == v).expect("orbit member");
    let mut m = DMatrix::zeros(class_r.len(), class_j.len());
    let (u, v) = (class_r[0], class_j[0]);
    for p in g.elements() {
        m[(pos(class_r, p.apply(u)), pos(class_j, p.apply(v)))] = 1.0;
    }
    Ok(m)
}
