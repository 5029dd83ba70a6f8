//! Backtracking oracles: color-preserving automorphisms and exhaustive QAP.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{PermGroup, Permutation};
use crate::error::{Error, Result};

pub const STABILIZER_MAX_DEGREE: usize = 64;
pub const ORACLE_MAX_DEGREE: usize = 12;
pub const QAP_MAX_DEGREE: usize = 8;

/// Complete graph with an integer color on every ordered pair (including loops).
struct ColoredGraph {
    n: usize,
    colors: Vec<usize>,
}

impl ColoredGraph {
    #[inline]
    fn color(&self, i: usize, j: usize) -> usize {
        self.colors[i * self.n + j]
    }

    /// Stable vertex coloring from iterated color refinement, starting from
    /// loop colors. Any color-preserving permutation preserves the result.
    fn refined_classes(&self) -> Vec<usize> {
        let n = self.n;
        let mut cur: Vec<usize> = (0..n).map(|v| self.color(v, v)).collect();
        let mut count = distinct(&cur);
        loop {
            let mut table: BTreeMap<(usize, Vec<(usize, usize)>), usize> = BTreeMap::new();
            let sigs: Vec<(usize, Vec<(usize, usize)>)> = (0..n)
                .map(|v| {
                    let mut nb: Vec<(usize, usize)> = (0..n)
                        .filter(|&u| u != v)
                        .map(|u| (self.color(v, u), cur[u]))
                        .collect();
                    nb.sort_unstable();
                    (cur[v], nb)
                })
                .collect();
            for s in &sigs {
                let next = table.len();
                table.entry(s.clone()).or_insert(next);
            }
            // relabel in sorted signature order so labels do not depend on vertex order
            let ranks: BTreeMap<_, usize> =
                table.keys().enumerate().map(|(r, k)| (k.clone(), r)).collect();
            let next: Vec<usize> = sigs.iter().map(|s| ranks[s]).collect();
            let next_count = distinct(&next);
            cur = next;
            if next_count == count {
                return cur;
            }
            count = next_count;
        }
    }

    /// All color-preserving permutations, sorted lexicographically.
    fn automorphisms(&self, max_order: usize) -> Result<Vec<Permutation>> {
        let n = self.n;
        let classes = self.refined_classes();
        let mut class_size = BTreeMap::<usize, usize>::new();
        for &c in &classes {
            *class_size.entry(c).or_default() += 1;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (class_size[&classes[v]], v));

        let mut images = vec![usize::MAX; n];
        let mut used = vec![false; n];
        let mut found = Vec::new();
        self.extend(0, &order, &classes, &mut images, &mut used, &mut found, max_order)?;
        found.sort();
        Ok(found)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        depth: usize,
        order: &[usize],
        classes: &[usize],
        images: &mut Vec<usize>,
        used: &mut Vec<bool>,
        found: &mut Vec<Permutation>,
        max_order: usize,
    ) -> Result<()> {
        if depth == order.len() {
            if found.len() >= max_order {
                return Err(Error::OrderExceeded { limit: max_order });
            }
            found.push(Permutation { images: images.clone() });
            return Ok(());
        }
        let v = order[depth];
        for w in 0..self.n {
            if used[w] || classes[w] != classes[v] || self.color(w, w) != self.color(v, v) {
                continue;
            }
            let consistent = order[..depth].iter().all(|&u| {
                let su = images[u];
                self.color(su, w) == self.color(u, v) && self.color(w, su) == self.color(v, u)
            });
            if !consistent {
                continue;
            }
            images[v] = w;
            used[w] = true;
            self.extend(depth + 1, order, classes, images, used, found, max_order)?;
            used[w] = false;
            images[v] = usize::MAX;
        }
        Ok(())
    }
}

fn distinct(labels: &[usize]) -> usize {
    let mut v = labels.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// The largest group fixing every matrix of the invariant space of `g`:
/// automorphisms of the complete graph colored by the pair orbits of `g`.
/// `g` is a symmetry group iff the result equals `g`.
pub fn stabilizer_closure(g: &PermGroup, max_order: usize) -> Result<PermGroup> {
    let n = g.degree();
    if n > STABILIZER_MAX_DEGREE {
        return Err(Error::DegreeTooLarge { n, limit: STABILIZER_MAX_DEGREE });
    }
    let orbits = crate::groupspace::pair_orbits(g);
    let graph = ColoredGraph { n, colors: orbits.label_matrix() };
    let elements = graph.automorphisms(max_order)?;
    Ok(PermGroup::from_sorted_unchecked(n, elements))
}

/// `Aut(A) = {P : ||AP - PA||_inf <= tol}` for `n <= 12`.
pub fn automorphism_oracle(a: &DMatrix<f64>, tol: f64) -> Result<PermGroup> {
    let n = a.nrows();
    if n > ORACLE_MAX_DEGREE {
        return Err(Error::DegreeTooLarge { n, limit: ORACLE_MAX_DEGREE });
    }
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, a.ncols())));
    }
    // Quantize entries into tolerance clusters; the coarse coloring can only
    // admit extra candidates, which the final residual check removes.
    let mut values: Vec<(f64, usize)> = a.iter().copied().zip(0..).collect();
    values.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut colors = vec![0usize; n * n];
    let mut color = 0;
    for k in 0..values.len() {
        if k > 0 && values[k].0 - values[k - 1].0 > tol {
            color += 1;
        }
        // column-major storage index -> (row, col)
        let idx = values[k].1;
        let (i, j) = (idx % n, idx / n);
        colors[i * n + j] = color;
    }
    let graph = ColoredGraph { n, colors };
    let elements: Vec<Permutation> = graph
        .automorphisms(super::DEFAULT_MAX_ORDER)?
        .into_iter()
        .filter(|p| p.residual_inf(a, a) <= tol)
        .collect();
    Ok(PermGroup::from_sorted_unchecked(n, elements))
}

/// Global minimizer of `||AP - PB||_F` over all permutations (`n <= 8`),
/// with ties resolved toward the lexicographically smallest image array.
pub fn exhaustive_qap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Permutation, f64)> {
    exhaustive_qap_capped(a, b, QAP_MAX_DEGREE)
}

/// [`exhaustive_qap`] with a caller-chosen degree limit.
pub fn exhaustive_qap_capped(a: &DMatrix<f64>, b: &DMatrix<f64>, cap: usize) -> Result<(Permutation, f64)> {
    let n = a.nrows();
    if n > cap {
        return Err(Error::DegreeTooLarge { n, limit: cap });
    }
    if a.shape() != b.shape() || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {:?}, B is {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut best = Best { cost: f64::INFINITY, images: (0..n).collect() };
    let mut images = vec![usize::MAX; n];
    let mut used = vec![false; n];
    qap_branch(a, b, 0, 0.0, &mut images, &mut used, &mut best);
    let p = Permutation { images: best.images };
    let energy = p.energy(a, b);
    Ok((p, energy))
}

struct Best {
    cost: f64,
    images: Vec<usize>,
}

fn qap_branch(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    l: usize,
    partial: f64,
    images: &mut Vec<usize>,
    used: &mut Vec<bool>,
    best: &mut Best,
) {
    let n = a.nrows();
    if l == n {
        // strict improvement keeps the lexicographically first minimizer
        if partial < best.cost - 1e-12 * best.cost.abs().max(1e-300) || best.cost.is_infinite() {
            best.cost = partial;
            best.images.copy_from_slice(images);
        }
        return;
    }
    for x in 0..n {
        if used[x] {
            continue;
        }
        let mut add = {
            let d = a[(x, x)] - b[(l, l)];
            d * d
        };
        for j in 0..l {
            let d = a[(x, images[j])] - b[(l, j)];
            add += 2.0 * d * d;
        }
        let cost = partial + add;
        // partial sums are lower bounds; prune branches that cannot tie
        if cost > best.cost + 1e-12 * best.cost.abs() {
            continue;
        }
        images[l] = x;
        used[x] = true;
        qap_branch(a, b, l + 1, cost, images, used, best);
        used[x] = false;
    }
    images[l] = usize::MAX;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::DEFAULT_MAX_ORDER;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn free_z3_on_three_points_is_not_a_symmetry_group() {
        let g = PermGroup::closure(3, &[perm(&[1, 2, 0])], 100).unwrap();
        let closed = stabilizer_closure(&g, DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(closed.order(), 6);
    }

    #[test]
    fn double_transposition_is_its_own_stabilizer() {
        let g = PermGroup::closure(4, &[perm(&[1, 0, 3, 2])], 100).unwrap();
        assert_eq!(stabilizer_closure(&g, DEFAULT_MAX_ORDER).unwrap(), g);
        let t = PermGroup::trivial(3);
        assert_eq!(stabilizer_closure(&t, DEFAULT_MAX_ORDER).unwrap(), t);
    }

    #[test]
    fn oracle_on_counterexample_is_trivial() {
        let a = DMatrix::from_row_slice(3, 3, &[6., 1., 2., 1., 5., 3., 2., 3., 4.]);
        assert_eq!(automorphism_oracle(&a, 1e-9).unwrap().order(), 1);
    }

    #[test]
    fn oracle_on_all_ones_is_symmetric_group() {
        let a = DMatrix::from_element(3, 3, 1.0);
        assert_eq!(automorphism_oracle(&a, 1e-9).unwrap().order(), 6);
    }

    #[test]
    fn oracle_refuses_large_input() {
        let a = DMatrix::zeros(13, 13);
        assert!(matches!(automorphism_oracle(&a, 1e-9), Err(Error::DegreeTooLarge { .. })));
    }

    #[test]
    fn qap_on_self_with_symmetry_picks_lexicographic_first() {
        // path 0-1-2 with endpoint reversal symmetry
        let a = DMatrix::from_row_slice(3, 3, &[0., 1., 2., 1., 0., 1., 2., 1., 0.]);
        let (p, e) = exhaustive_qap(&a, &a).unwrap();
        assert!(p.is_identity());
        assert!(e < 1e-12);
    }
}
