//! Extreme points of the convex isomorphism set: enumeration of all
//! isomorphisms from the centroid, and minimizers of random linear objectives.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::centroid::centroid_from_signature_pair;
use super::face::{face_basis, pataki_extract_in, Extraction, FaceBasis, FaceOpts};
use super::check_square_pair;
use crate::error::{Error, Result};
use crate::exactness::{check_prop1_partition, signature, signature_classes, Prop1Tols};
use crate::linalg::lstsq;
use crate::permgroup::Permutation;

#[derive(Clone, Copy, Debug)]
pub struct EnumerateOpts {
    pub face: FaceOpts,
    /// Signature values closer than this (relative to `max(1, max|s|)`) are equal.
    pub signature_tol: f64,
    pub prop1: Prop1Tols,
    /// Residual of the centroid against the hull of the found permutations.
    pub membership_tol: f64,
    /// Stop after this many permutations (`None`: `n^2`).
    pub max_permutations: Option<usize>,
    /// Seed for the re-mixing fallback when the backward step is degenerate.
    pub seed: u64,
}

impl Default for EnumerateOpts {
    fn default() -> Self {
        Self {
            face: FaceOpts::default(),
            signature_tol: 1e-9,
            prop1: Prop1Tols::default(),
            membership_tol: 1e-8,
            max_permutations: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    /// Isomorphisms in the order they were found.
    pub permutations: Vec<Permutation>,
    /// True when the centroid was certified to lie in the hull of the result.
    pub complete: bool,
    /// Number of times the backward step was degenerate and a re-mix was used.
    pub remixes: usize,
}

/// Lists isomorphisms `P` with `AP = PB`, starting from the signature
/// centroid: extract a permutation by face walking, step backwards away from
/// it as far as nonnegativity allows, and repeat until the centroid lies in
/// the convex hull of what was found.
pub fn enumerate_isomorphisms(a: &DMatrix<f64>, b: &DMatrix<f64>, opts: &EnumerateOpts) -> Result<Enumeration> {
    let n = check_square_pair(a, b)?;
    let sig = signature(a);
    let s_tol = opts.signature_tol * sig.0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let classes = signature_classes(&sig, s_tol);
    let report = check_prop1_partition(a, &classes, opts.prop1)?;
    if report.prop1_orbit.is_none() {
        return Err(Error::PreconditionFailed(
            "no signature class has full-rank blocks and a simple spectrum".into(),
        ));
    }
    let centroid = centroid_from_signature_pair(a, b, s_tol)?;
    let basis = face_basis(a, b, &centroid, &opts.face)?;
    let target = basis.values_of(&centroid);
    let max_perms = opts.max_permutations.unwrap_or(n * n).max(1);
    let mut rng = crate::trial_rng(opts.seed, 0);

    let mut found: Vec<Permutation> = Vec::new();
    let mut current = centroid.matrix().clone();
    let mut remixes = 0;
    let mut complete = false;
    for _ in 0..4 * max_perms {
        let ext = pataki_extract_in(&basis, &current, &opts.face)?;
        let p = permutation_of(&ext)?;
        if !found.contains(&p) {
            found.push(p.clone());
        }
        if in_hull(&basis, &found, &target, opts.membership_tol) {
            complete = true;
            break;
        }
        if found.len() >= max_perms {
            break;
        }
        // most negative t keeping (1 - t) S + t P nonnegative
        let mut t = f64::INFINITY;
        for j in 0..n {
            let i = p.apply(j);
            let v = current[(i, j)];
            if v < 1.0 - 1e-12 {
                t = t.min(v / (1.0 - v));
            }
        }
        if t.is_finite() && t > opts.face.zero_tol {
            let pm = p.to_matrix();
            current = &current + (&current - pm) * t;
            current.iter_mut().for_each(|v| {
                if *v <= opts.face.zero_tol {
                    *v = 0.0
                }
            });
        } else {
            remixes += 1;
            current = remix(centroid.matrix(), &found, &mut rng);
        }
    }
    Ok(Enumeration { permutations: found, complete, remixes })
}

fn permutation_of(ext: &Extraction) -> Result<Permutation> {
    ext.permutation
        .clone()
        .ok_or_else(|| Error::NonPermutationExtreme { fractional: ext.fractional() })
}

/// `0.5 S_c + 0.5 sum w_l P_l` with random convex weights.
fn remix<R: Rng>(centroid: &DMatrix<f64>, found: &[Permutation], rng: &mut R) -> DMatrix<f64> {
    let w: Vec<f64> = found.iter().map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    let mut m = centroid * 0.5;
    for (p, wl) in found.iter().zip(&w) {
        m += p.to_matrix() * (0.5 * wl / total);
    }
    m
}

/// Least-squares test of `target ∈ conv(found)` in face coordinates.
fn in_hull(basis: &FaceBasis, found: &[Permutation], target: &DVector<f64>, tol: f64) -> bool {
    let cols: Vec<DVector<f64>> = found.iter().map(|p| basis.values_of(&p.to_matrix())).collect();
    let m = DMatrix::from_columns(&cols);
    let coef = lstsq(&m, target, 1e-12);
    let residual = (&m * &coef - target).norm();
    residual <= tol && coef.iter().all(|&c| c >= -tol)
}

/// Minimizes `<C, S>` over the face described by `basis` (a linear program in
/// the face coordinates) and walks the solution to an exact extreme point.
pub fn random_objective_extreme_point(basis: &FaceBasis, c: &DMatrix<f64>, opts: &FaceOpts) -> Result<Extraction> {
    let d = basis.directions();
    let k = basis.dim();
    let reference = basis.reference();
    if k == 0 {
        return pataki_extract_in(basis, &reference, opts);
    }
    let cost = basis.values_of(c);
    let x_ref = basis.reference_values();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..k)
        .map(|l| lp.add_var(cost.dot(&d.column(l)), (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for e in 0..d.nrows() {
        let terms: Vec<_> = (0..k)
            .filter(|&l| d[(e, l)].abs() > 1e-14)
            .map(|l| (vars[l], d[(e, l)]))
            .collect();
        if !terms.is_empty() {
            lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, -x_ref[e]);
        }
    }
    let solution = lp
        .solve()
        .map_err(|err| Error::LinearProgram(format!("{err:?}")))?
        .into_solution()
        .map_err(|_| Error::LinearProgram("solve interrupted".into()))?;
    let y = DVector::from_iterator(k, vars.iter().map(|&v| solution.var_value(v)));
    let x = x_ref + d * y;
    let start = basis.to_matrix(&x.map(|v| v.max(0.0)));
    pataki_extract_in(basis, &start, opts)
}
