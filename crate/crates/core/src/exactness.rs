//! Certificates for exactness of the doubly-stochastic relaxation: the
//! row-sum signature, the block rank / simple spectrum sufficient condition,
//! the affine kernel test and the generic zero-one classifier.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupspace::{build_basis, sample_vg};
use crate::linalg::{column_basis, orthonormal_complement, rank, singular_values, sym_eigenvalues};
use crate::permgroup::{GroupSpec, OrbitPartition, PermGroup, SupportMask};
use crate::trial_rng;

/// Default relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// Row-sum vector `s = A 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Signature(pub Vec<f64>);

pub fn signature(a: &DMatrix<f64>) -> Signature {
    Signature(a.row_iter().map(|r| r.sum()).collect())
}

impl Signature {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Per-class mean values, checking that `s` is constant on every class.
    pub fn orbit_values(&self, orbits: &OrbitPartition, tol: f64) -> Result<Vec<f64>> {
        orbits
            .classes()
            .iter()
            .enumerate()
            .map(|(r, class)| {
                let vals: Vec<f64> = class.iter().map(|&v| self.0[v]).collect();
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi - lo > tol {
                    return Err(Error::InconsistentSignature { orbit: r, spread: hi - lo });
                }
                Ok(vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect()
    }
}

/// True iff the orbit-level signature values are pairwise more than `tol` apart.
pub fn is_discriminative(s: &Signature, orbits: &OrbitPartition, tol: f64) -> Result<bool> {
    let mut vals = s.orbit_values(orbits, tol)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals.windows(2).all(|w| w[1] - w[0] > tol))
}

/// Groups vertices whose signature values are chained within `tol` of each
/// other (sorted single linkage). Equals the orbit partition of `Aut(A)`
/// whenever the signature is discriminative.
pub fn signature_classes(s: &Signature, tol: f64) -> OrbitPartition {
    let n = s.0.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| s.0[x].total_cmp(&s.0[y]).then(x.cmp(&y)));
    let mut labels = vec![0; n];
    let mut class = 0;
    for k in 0..n {
        if k > 0 && s.0[idx[k]] - s.0[idx[k - 1]] > tol {
            class += 1;
        }
        labels[idx[k]] = class;
    }
    OrbitPartition::from_labels(&labels)
}

#[derive(Clone, Copy, Debug)]
pub struct Prop1Tols {
    /// Allowed `max |P^T A P - A|` relative to `max(1, max|A|)`.
    pub invariance: f64,
    /// Signature separation and consistency tolerance, relative to `max(1, max|s|)`.
    pub signature: f64,
    /// Relative singular-value threshold for block ranks.
    pub rank: f64,
    /// Minimum eigenvalue gap of the diagonal block, relative to its spectral radius.
    pub gap: f64,
}

impl Default for Prop1Tols {
    fn default() -> Self {
        Self { invariance: 1e-9, signature: 1e-9, rank: RANK_TOL, gap: 1e-8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockRank {
    pub r: usize,
    pub j: usize,
    pub rank: usize,
    pub required: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub weakly_exact: bool,
    pub signature_discriminative: bool,
    /// First orbit class satisfying all three sufficient conditions.
    pub prop1_orbit: Option<usize>,
    pub rank_results: Vec<BlockRank>,
    /// Smallest eigenvalue gap of each diagonal block; `None` for singleton classes.
    pub spectrum_gaps: Vec<Option<f64>>,
}

fn block(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |x, y| a[(rows[x], cols[y])])
}

/// Checks, orbit by orbit, whether the signature is discriminative, every
/// off-diagonal block row `A_rj` has full column rank and `A_rr` has simple
/// spectrum. A reported `prop1_orbit` certifies convex exactness.
pub fn check_prop1(a: &DMatrix<f64>, g: &PermGroup, tols: Prop1Tols) -> Result<ExactnessReport> {
    let scale = a.amax().max(1.0);
    let deviation = g.invariance_defect(a);
    if deviation > tols.invariance * scale {
        return Err(Error::NotInvariant { deviation });
    }
    check_prop1_partition(a, &g.vertex_orbits(), tols)
}

/// The same three conditions on a given vertex partition, without the
/// invariance check. Used when the orbits are only known through the signature.
pub fn check_prop1_partition(
    a: &DMatrix<f64>,
    orbits: &OrbitPartition,
    tols: Prop1Tols,
) -> Result<ExactnessReport> {
    let scale = a.amax().max(1.0);
    let s = signature(a);
    let s_scale = s.0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let discriminative = is_discriminative(&s, orbits, tols.signature * s_scale)?;

    let classes = orbits.classes();
    let mut rank_results = Vec::new();
    let mut spectrum_gaps = Vec::with_capacity(classes.len());
    let mut prop1_orbit = None;
    for (r, class_r) in classes.iter().enumerate() {
        let mut ranks_ok = true;
        for (j, class_j) in classes.iter().enumerate() {
            if j == r {
                continue;
            }
            let rk = rank(&block(a, class_r, class_j), tols.rank, 1e-14 * scale);
            ranks_ok &= rk == class_j.len();
            rank_results.push(BlockRank { r, j, rank: rk, required: class_j.len() });
        }
        let ev = sym_eigenvalues(&block(a, class_r, class_r));
        let gap = ev.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
        let radius = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let simple = gap.is_none_or(|g| g > tols.gap * radius.max(1e-300));
        spectrum_gaps.push(gap);
        if prop1_orbit.is_none() && discriminative && ranks_ok && simple {
            prop1_orbit = Some(r);
        }
    }
    Ok(ExactnessReport {
        weakly_exact: discriminative,
        signature_discriminative: discriminative,
        prop1_orbit,
        rank_results,
        spectrum_gaps,
    })
}

/// Stacks the equality constraints of affine automorphisms of `A` as
/// `F vec(S) = b` with `vec` in column-major order. Row blocks, in order:
/// row sums, column sums, entries of `AS - SA` (column-major), and one row
/// `S_ij = 0` per masked-out entry (column-major).
pub fn affine_constraint_matrix(a: &DMatrix<f64>, mask: &SupportMask) -> (DMatrix<f64>, DVector<f64>) {
    affine_constraint_matrix_pair(a, a, mask)
}

/// Two-graph variant with commutation rows `AS - SB`.
pub fn affine_constraint_matrix_pair(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    mask: &SupportMask,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = a.nrows();
    let masked: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .filter(|&(i, j)| !mask.allowed(i, j))
        .collect();
    let rows = 2 * n + n * n + masked.len();
    let col = |i: usize, j: usize| i + j * n;
    let mut f = DMatrix::zeros(rows, n * n);
    let mut rhs = DVector::zeros(rows);
    for i in 0..n {
        for j in 0..n {
            f[(i, col(i, j))] = 1.0;
            f[(n + j, col(i, j))] = 1.0;
        }
        rhs[i] = 1.0;
        rhs[n + i] = 1.0;
    }
    for j in 0..n {
        for i in 0..n {
            let row = 2 * n + col(i, j);
            for k in 0..n {
                f[(row, col(k, j))] += a[(i, k)];
                f[(row, col(i, k))] -= b[(k, j)];
            }
        }
    }
    for (r, &(i, j)) in masked.iter().enumerate() {
        f[(2 * n + n * n + r, col(i, j))] = 1.0;
    }
    (f, rhs)
}

/// Detail of the affine kernel test.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AffineMargin {
    /// `sigma_min(F U1) / sigma_max(F U1)`.
    pub margin: f64,
    /// Dimension of `W = span{vec(P - I)}`.
    pub dim_w: usize,
}

/// Smallest relative singular value of `F(A)` on the orthogonal complement of
/// `W = span{vec(P - I) : P in G}`, with `A` normalized to unit Frobenius norm
/// and `F` built with the support mask of `G`.
pub fn affine_exactness_margin(a: &DMatrix<f64>, g: &PermGroup) -> AffineMargin {
    let n = a.nrows();
    let norm = a.norm();
    let a_unit = if norm > 0.0 { a / norm } else { a.clone() };
    let (f, _) = affine_constraint_matrix(&a_unit, &g.support_mask());
    let mut w = DMatrix::zeros(n * n, g.order());
    for (c, p) in g.elements().iter().enumerate() {
        let d = p.to_matrix() - DMatrix::<f64>::identity(n, n);
        w.set_column(c, &DVector::from_column_slice(d.as_slice()));
    }
    let u0 = column_basis(&w, 1e-10);
    let u1 = orthonormal_complement(&u0, 1e-10);
    let dim_w = u0.ncols();
    if u1.ncols() == 0 {
        return AffineMargin { margin: 1.0, dim_w };
    }
    let sv = singular_values(&(f * u1));
    let top = sv.first().copied().unwrap_or(0.0);
    // more unknowns than rows leaves a nontrivial kernel
    let smallest = if sv.len() < n * n - dim_w { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
    let margin = if top > 0.0 { smallest / top } else { 0.0 };
    AffineMargin { margin, dim_w }
}

/// True iff the affine solution set of the masked system equals the affine
/// hull of `G`, i.e. `F(A) U1` has full column rank at relative tolerance `tol`.
pub fn affine_exactness_test(a: &DMatrix<f64>, g: &PermGroup, tol: f64) -> bool {
    affine_exactness_margin(a, g).margin > tol
}

/// Status of `aff G ∩ {S >= 0} = conv G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    True,
    False,
    Unknown,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::True => "true",
            Condition::False => "false",
            Condition::Unknown => "unknown",
        }
    }
}

/// A full orbit makes the convex coefficients of any affine combination
/// readable off one column, so the condition holds; otherwise undecided.
pub fn condition_weird(g: &PermGroup) -> Condition {
    if g.has_full_orbit() {
        Condition::True
    } else {
        Condition::Unknown
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    GenericallyExact,
    AlwaysFails,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::GenericallyExact => "GenericallyExact",
            Verdict::AlwaysFails => "AlwaysFails",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenericVerdict {
    pub verdict: Verdict,
    pub trials: usize,
    pub zero_evaluations: usize,
    pub condition_weird: Condition,
    /// Affine test margin per trial, in trial order.
    pub margins: Vec<f64>,
}

#[derive(Serialize)]
struct VerdictJson<'a> {
    group: &'a GroupSpec,
    verdict: &'static str,
    trials: usize,
    zero_evaluations: usize,
    condition_weird: &'static str,
    min_singular_margins: &'a [f64],
}

impl GenericVerdict {
    pub fn to_json(&self, group: &GroupSpec) -> serde_json::Value {
        serde_json::to_value(VerdictJson {
            group,
            verdict: self.verdict.as_str(),
            trials: self.trials,
            zero_evaluations: self.zero_evaluations,
            condition_weird: self.condition_weird.as_str(),
            min_singular_margins: &self.margins,
        })
        .expect("verdict serializes")
    }
}

/// Runs the affine kernel test on `trials` random members of `V(G)` and
/// combines the outcome with [`condition_weird`]. Trial `k` draws from the
/// stream `(seed, k)`, so the verdict does not depend on scheduling.
pub fn classify_generic(g: &PermGroup, trials: usize, seed: u64, tol: f64) -> GenericVerdict {
    assert!(trials >= 1, "at least one trial is required");
    let basis = build_basis(g);
    let margins: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k as u64);
            let a = sample_vg(&basis, &mut rng, 1.0);
            affine_exactness_margin(&a, g).margin
        })
        .collect();
    let zero_evaluations = margins.iter().filter(|&&m| m <= tol).count();
    let condition = condition_weird(g);
    let verdict = if zero_evaluations == trials || condition == Condition::False {
        Verdict::AlwaysFails
    } else if zero_evaluations == 0 && condition == Condition::True {
        Verdict::GenericallyExact
    } else {
        Verdict::Inconclusive
    };
    GenericVerdict { verdict, trials, zero_evaluations, condition_weird: condition, margins }
}
