//! Permutations, finite permutation groups and their action on vertices.
//!
//! Convention: a permutation with image array `images` acts on vertices by
//! `j -> images[j]`, and its matrix `P` has `P[images[j], j] = 1`, so that
//! `(P x)[images[j]] = x[j]`. Composition `p.compose(&q)` is `j -> p(q(j))`,
//! which is the matrix product `P Q`. With this convention an isomorphism
//! `A P = P B` satisfies `A[p(l), p(j)] = B[l, j]`: vertex `l` of `B` is
//! matched to vertex `p(l)` of `A`.

mod search;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use search::{
    automorphism_oracle, exhaustive_qap, exhaustive_qap_capped, stabilizer_closure, ORACLE_MAX_DEGREE,
    QAP_MAX_DEGREE,
    STABILIZER_MAX_DEGREE,
};

/// Default cap on the order of groups built by [`PermGroup::closure`].
pub const DEFAULT_MAX_ORDER: usize = 10_000;

/// A bijection of `{0, .., n-1}` stored by its image array.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 0..{n}"
                )));
            }
            seen[x] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    /// Builds a permutation from disjoint cycles on `n` points.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for (k, &from) in cycle.iter().enumerate() {
                let to = cycle[(k + 1) % cycle.len()];
                if from >= n || to >= n {
                    return Err(Error::InvalidPermutation(format!("cycle entry out of range 0..{n}")));
                }
                images[from] = to;
            }
        }
        Self::new(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, j: usize) -> usize {
        self.images[j]
    }

    /// `self ∘ other`, i.e. `j -> self(other(j))`; matrix product `P_self P_other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation { images: other.images.iter().map(|&j| self.images[j]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (j, &i) in self.images.iter().enumerate() {
            inv[i] = j;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(j, &i)| i == j)
    }

    /// Permutation matrix with `P[images[j], j] = 1`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.degree();
        let mut p = DMatrix::zeros(n, n);
        for (j, &i) in self.images.iter().enumerate() {
            p[(i, j)] = 1.0;
        }
        p
    }

    /// Reads a permutation off a matrix whose entries are within `tol` of 0/1.
    pub fn from_matrix(m: &DMatrix<f64>, tol: f64) -> Option<Permutation> {
        let n = m.nrows();
        if m.ncols() != n {
            return None;
        }
        let mut images = vec![usize::MAX; n];
        for j in 0..n {
            for i in 0..n {
                let v = m[(i, j)];
                if (v - 1.0).abs() <= tol {
                    if images[j] != usize::MAX {
                        return None;
                    }
                    images[j] = i;
                } else if v.abs() > tol {
                    return None;
                }
            }
        }
        Permutation::new(images).ok()
    }

    /// `P^T A P`, whose `(l, j)` entry is `A[p(l), p(j)]`.
    pub fn conjugate(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.degree();
        DMatrix::from_fn(n, n, |l, j| a[(self.images[l], self.images[j])])
    }

    /// `max |A P - P B|` entrywise.
    pub fn residual_inf(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let n = self.degree();
        let mut worst: f64 = 0.0;
        for l in 0..n {
            for j in 0..n {
                worst = worst.max((a[(self.images[l], self.images[j])] - b[(l, j)]).abs());
            }
        }
        worst
    }

    /// Graph matching energy `||A P - P B||_F`.
    pub fn energy(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let n = self.degree();
        let mut acc = 0.0;
        for l in 0..n {
            for j in 0..n {
                let d = a[(self.images[l], self.images[j])] - b[(l, j)];
                acc += d * d;
            }
        }
        acc.sqrt()
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.images)
    }
}

/// A finite permutation group, stored as its full element list in
/// lexicographic order of image arrays.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PermGroup {
    degree: usize,
    elements: Vec<Permutation>,
}

impl PermGroup {
    pub fn trivial(n: usize) -> Self {
        Self { degree: n, elements: vec![Permutation::identity(n)] }
    }

    /// Smallest group containing `generators`, by product saturation.
    pub fn closure(n: usize, generators: &[Permutation], max_order: usize) -> Result<Self> {
        for g in generators {
            if g.degree() != n {
                return Err(Error::DegreeMismatch { expected: n, found: g.degree() });
            }
        }
        let mut seen: BTreeSet<Permutation> = BTreeSet::new();
        let mut queue = VecDeque::new();
        let id = Permutation::identity(n);
        seen.insert(id.clone());
        queue.push_back(id);
        while let Some(x) = queue.pop_front() {
            for g in generators {
                let y = g.compose(&x);
                if !seen.contains(&y) {
                    if seen.len() >= max_order {
                        return Err(Error::OrderExceeded { limit: max_order });
                    }
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        Ok(Self { degree: n, elements: seen.into_iter().collect() })
    }

    /// Wraps a complete element list, verifying the group axioms.
    pub fn from_elements(n: usize, elements: Vec<Permutation>) -> Result<Self> {
        let set: BTreeSet<Permutation> = elements.into_iter().collect();
        let group = Self { degree: n, elements: set.into_iter().collect() };
        group.check_axioms()?;
        Ok(group)
    }

    pub(crate) fn from_sorted_unchecked(n: usize, elements: Vec<Permutation>) -> Self {
        Self { degree: n, elements }
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.degree;
        if let Some(bad) = self.elements.iter().find(|p| p.degree() != n) {
            return Err(Error::DegreeMismatch { expected: n, found: bad.degree() });
        }
        if !self.contains(&Permutation::identity(n)) {
            return Err(Error::InvalidPermutation("element list lacks the identity".into()));
        }
        for p in &self.elements {
            if !self.contains(&p.inverse()) {
                return Err(Error::InvalidPermutation(format!("inverse of {p:?} missing")));
            }
            for q in &self.elements {
                if !self.contains(&p.compose(q)) {
                    return Err(Error::InvalidPermutation(format!("{p:?}∘{q:?} missing")));
                }
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    /// Every element is an involution.
    pub fn is_reflection_group(&self) -> bool {
        self.elements.iter().all(|p| p.compose(p).is_identity())
    }

    pub fn vertex_orbits(&self) -> OrbitPartition {
        let mut uf = UnionFind::new(self.degree);
        for p in &self.elements {
            for j in 0..self.degree {
                uf.union(j, p.apply(j));
            }
        }
        OrbitPartition::from_labels(&uf.labels())
    }

    /// Some vertex orbit has length `|G|`.
    pub fn has_full_orbit(&self) -> bool {
        self.full_orbit().is_some()
    }

    /// Index of the first full orbit, if any.
    pub fn full_orbit(&self) -> Option<usize> {
        let order = self.order();
        self.vertex_orbits().classes().iter().position(|c| c.len() == order)
    }

    pub fn support_mask(&self) -> SupportMask {
        SupportMask::from_permutations(self.degree, &self.elements)
    }

    /// Centroid `(1/|G|) sum_P P`.
    pub fn centroid_matrix(&self) -> DMatrix<f64> {
        let n = self.degree;
        let mut s = DMatrix::zeros(n, n);
        let w = 1.0 / self.order() as f64;
        for p in &self.elements {
            for j in 0..n {
                s[(p.apply(j), j)] += w;
            }
        }
        s
    }

    /// `max_P ||P^T A P - A||_inf`.
    pub fn invariance_defect(&self, a: &DMatrix<f64>) -> f64 {
        self.elements
            .iter()
            .map(|p| p.residual_inf(a, a))
            .fold(0.0, f64::max)
    }
}

/// Partition of the vertices into orbit classes, ordered by smallest member.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct OrbitPartition {
    classes: Vec<Vec<usize>>,
    #[serde(skip)]
    class_of: Vec<usize>,
}

impl OrbitPartition {
    /// Builds the partition from arbitrary class labels per vertex.
    pub fn from_labels(labels: &[usize]) -> Self {
        let n = labels.len();
        let mut first_label_order: Vec<usize> = Vec::new();
        let mut by_label: std::collections::HashMap<usize, usize> = Default::default();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            let idx = *by_label.entry(labels[v]).or_insert_with(|| {
                first_label_order.push(labels[v]);
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[idx].push(v);
        }
        let mut class_of = vec![0; n];
        for (c, members) in classes.iter().enumerate() {
            for &v in members {
                class_of[v] = c;
            }
        }
        Self { classes, class_of }
    }

    pub fn from_classes(n: usize, classes: Vec<Vec<usize>>) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, members) in classes.iter().enumerate() {
            for &v in members {
                if v >= n || labels[v] != usize::MAX {
                    return Err(Error::InvalidPermutation(format!(
                        "classes are not a partition of 0..{n}"
                    )));
                }
                labels[v] = c;
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(Error::InvalidPermutation(format!("classes do not cover 0..{n}")));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, v: usize) -> usize {
        self.class_of[v]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

/// Boolean `n x n` mask: `allowed(i, j)` iff some element maps `j` to `i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SupportMask {
    n: usize,
    allowed: Vec<bool>,
}

impl SupportMask {
    pub fn from_permutations(n: usize, perms: &[Permutation]) -> Self {
        let mut allowed = vec![false; n * n];
        for p in perms {
            for j in 0..n {
                allowed[p.apply(j) * n + j] = true;
            }
        }
        Self { n, allowed }
    }

    pub fn full(n: usize) -> Self {
        Self { n, allowed: vec![true; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut allowed = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                allowed[i * n + j] = f(i, j);
            }
        }
        Self { n, allowed }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.n + j]
    }

    pub fn count_allowed(&self) -> usize {
        self.allowed.iter().filter(|&&b| b).count()
    }

    pub fn count_masked_out(&self) -> usize {
        self.n * self.n - self.count_allowed()
    }

    /// Sum of `|S_ij|` over masked-out entries.
    pub fn mass_outside(&self, s: &DMatrix<f64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.allowed(i, j) {
                    acc += s[(i, j)].abs();
                }
            }
        }
        acc
    }

    pub fn is_transpose_closed(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.allowed(i, j) == self.allowed(j, i)))
    }
}

/// JSON group specification: `{ "n": int, "generators": [[int, ...], ...] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GroupSpec {
    pub n: usize,
    pub generators: Vec<Vec<usize>>,
}

impl GroupSpec {
    pub fn from_generators(n: usize, generators: &[Permutation]) -> Self {
        Self { n, generators: generators.iter().map(|g| g.images().to_vec()).collect() }
    }

    pub fn to_group(&self, max_order: usize) -> Result<PermGroup> {
        let gens = self
            .generators
            .iter()
            .map(|g| Permutation::new(g.clone()))
            .collect::<Result<Vec<_>>>()?;
        PermGroup::closure(self.n, &gens, max_order)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so labels follow the smallest member
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    pub(crate) fn labels(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|x| self.find(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn assert_group_axioms(g: &PermGroup) {
        let n = g.degree();
        assert!(g.contains(&Permutation::identity(n)));
        for p in g.elements() {
            assert!(g.contains(&p.inverse()));
            for q in g.elements() {
                assert!(g.contains(&p.compose(q)));
            }
        }
    }

    #[test]
    fn closure_of_double_transposition() {
        let g = PermGroup::closure(4, &[perm(&[1, 0, 3, 2])], 100).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.elements()[0], Permutation::identity(4));
        assert_group_axioms(&g);
    }

    #[test]
    fn closure_of_three_cycle() {
        let g = PermGroup::closure(3, &[perm(&[1, 2, 0])], 100).unwrap();
        assert_eq!(g.order(), 3);
        assert_group_axioms(&g);
    }

    #[test]
    fn adjacent_transpositions_generate_s3() {
        let g = PermGroup::closure(3, &[perm(&[1, 0, 2]), perm(&[0, 2, 1])], 100).unwrap();
        assert_eq!(g.order(), 6);
        assert_group_axioms(&g);
        let imgs: Vec<Vec<usize>> = g.elements().iter().map(|p| p.images().to_vec()).collect();
        let mut sorted = imgs.clone();
        sorted.sort();
        assert_eq!(imgs, sorted);
    }

    #[test]
    fn closure_respects_order_cap() {
        let err = PermGroup::closure(4, &[perm(&[1, 2, 3, 0]), perm(&[1, 0, 2, 3])], 10);
        assert!(matches!(err, Err(Error::OrderExceeded { limit: 10 })));
    }

    #[test]
    fn closure_rejects_mixed_degrees() {
        let err = PermGroup::closure(4, &[perm(&[1, 0, 2])], 10);
        assert!(matches!(err, Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn invalid_images_rejected() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3]).is_err());
    }

    #[test]
    fn reflection_group_checks() {
        let z2 = PermGroup::closure(4, &[perm(&[1, 0, 3, 2])], 100).unwrap();
        assert!(z2.is_reflection_group());
        let z3 = PermGroup::closure(3, &[perm(&[1, 2, 0])], 100).unwrap();
        assert!(!z3.is_reflection_group());
        // dihedral group of the square: rotation and a reflection
        let d4 = PermGroup::closure(4, &[perm(&[1, 2, 3, 0]), perm(&[0, 3, 2, 1])], 100).unwrap();
        assert_eq!(d4.order(), 8);
        assert!(!d4.is_reflection_group());
    }

    #[test]
    fn orbits_examples() {
        let z2 = PermGroup::closure(4, &[perm(&[1, 0, 3, 2])], 100).unwrap();
        assert_eq!(z2.vertex_orbits().classes(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(PermGroup::trivial(3).vertex_orbits().classes(), &[vec![0], vec![1], vec![2]]);
        let swap = PermGroup::closure(3, &[perm(&[1, 0, 2])], 100).unwrap();
        assert_eq!(swap.vertex_orbits().classes(), &[vec![0, 1], vec![2]]);
    }

    #[test]
    fn full_orbit_examples() {
        let z2 = PermGroup::closure(4, &[perm(&[1, 0, 3, 2])], 100).unwrap();
        assert!(z2.has_full_orbit());
        let s3 = PermGroup::closure(3, &[perm(&[1, 0, 2]), perm(&[0, 2, 1])], 100).unwrap();
        assert!(!s3.has_full_orbit());
        let free_z3 = PermGroup::closure(6, &[perm(&[1, 2, 0, 4, 5, 3])], 100).unwrap();
        assert!(free_z3.has_full_orbit());
    }

    #[test]
    fn support_mask_examples() {
        let id = PermGroup::trivial(3).support_mask();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(id.allowed(i, j), i == j);
            }
        }
        let z2 = PermGroup::closure(4, &[perm(&[1, 0, 3, 2])], 100).unwrap().support_mask();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(z2.allowed(i, j), i / 2 == j / 2);
            }
        }
        let s3 = PermGroup::closure(3, &[perm(&[1, 0, 2]), perm(&[0, 2, 1])], 100).unwrap();
        assert_eq!(s3.support_mask().count_allowed(), 9);
        assert!(z2.is_transpose_closed());
    }

    #[test]
    fn matrix_convention() {
        let p = perm(&[2, 0, 1]);
        let m = p.to_matrix();
        let x = nalgebra::DVector::from_vec(vec![10.0, 20.0, 30.0]);
        let y = &m * &x;
        for j in 0..3 {
            assert_eq!(y[p.apply(j)], x[j]);
        }
        let q = perm(&[1, 0, 2]);
        assert_eq!(p.compose(&q).to_matrix(), &m * q.to_matrix());
        assert_eq!(Permutation::from_matrix(&m, 1e-9), Some(p.clone()));
        assert_eq!(p.inverse().to_matrix(), m.transpose());
    }

    #[test]
    fn group_spec_roundtrip() {
        let spec: GroupSpec = serde_json::from_str(r#"{"n":4,"generators":[[1,0,3,2]]}"#).unwrap();
        let g = spec.to_group(DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(g.order(), 2);
        let bad: std::result::Result<Permutation, _> = serde_json::from_str("[0,0]");
        assert!(bad.is_err());
    }
}
