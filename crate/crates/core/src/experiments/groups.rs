//! Parameterized permutation group constructors and the shipped group set.

use crate::permgroup::{GroupSpec, PermGroup, Permutation, DEFAULT_MAX_ORDER};

fn perm(images: Vec<usize>) -> Permutation {
    Permutation::new(images).expect("constructor produces a bijection")
}

/// `m` disjoint `k`-cycles rotated simultaneously (free action of `Z_k`).
pub fn cyclic_free(k: usize, m: usize) -> GroupSpec {
    let n = k * m;
    let rot = (0..n).map(|v| (v / k) * k + (v % k + 1) % k).collect();
    GroupSpec::from_generators(n, &[perm(rot)])
}

/// Dihedral group of the `k`-gon acting on `m` disjoint copies of its vertices.
pub fn dihedral(k: usize, m: usize) -> GroupSpec {
    let n = k * m;
    let rot = (0..n).map(|v| (v / k) * k + (v % k + 1) % k).collect();
    let refl = (0..n).map(|v| (v / k) * k + (k - v % k) % k).collect();
    GroupSpec::from_generators(n, &[perm(rot), perm(refl)])
}

/// `Z_2` swapping `2i <-> 2i + 1` for `i < pairs` (left/right mirror symmetry).
pub fn bilateral(pairs: usize) -> GroupSpec {
    let n = 2 * pairs;
    GroupSpec::from_generators(n, &[perm((0..n).map(|v| v ^ 1).collect())])
}

/// `Z_2 x Z_2` generated by the horizontal and vertical mirror of a lattice,
/// vertex `r * cols + c` at `(r, c)`.
pub fn grid_reflections(rows: usize, cols: usize) -> GroupSpec {
    let n = rows * cols;
    let flip_rows = (0..n).map(|v| (rows - 1 - v / cols) * cols + v % cols).collect();
    let flip_cols = (0..n).map(|v| (v / cols) * cols + (cols - 1 - v % cols)).collect();
    GroupSpec::from_generators(n, &[perm(flip_rows), perm(flip_cols)])
}

pub fn trivial(n: usize) -> GroupSpec {
    GroupSpec { n, generators: Vec::new() }
}

/// A named group used by the experiments and the acceptance suite.
#[derive(Clone, Debug)]
pub struct NamedGroup {
    pub name: &'static str,
    pub spec: GroupSpec,
}

impl NamedGroup {
    pub fn group(&self) -> PermGroup {
        self.spec.to_group(DEFAULT_MAX_ORDER).expect("shipped groups are small")
    }
}

/// The shipped symmetry groups, all on at most 12 points.
pub fn shipped_groups() -> Vec<NamedGroup> {
    vec![
        NamedGroup { name: "trivial6", spec: trivial(6) },
        NamedGroup { name: "z2_bilateral10", spec: bilateral(5) },
        NamedGroup { name: "z2xz2_grid3x4", spec: grid_reflections(3, 4) },
        NamedGroup { name: "z3_free6", spec: cyclic_free(3, 2) },
        NamedGroup { name: "z4_free8", spec: cyclic_free(4, 2) },
    ]
}

pub fn shipped_group(name: &str) -> Option<NamedGroup> {
    shipped_groups().into_iter().find(|g| g.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::stabilizer_closure;

    #[test]
    fn constructor_orders() {
        assert_eq!(cyclic_free(3, 2).to_group(100).unwrap().order(), 3);
        assert_eq!(dihedral(4, 1).to_group(100).unwrap().order(), 8);
        assert_eq!(bilateral(5).to_group(100).unwrap().order(), 2);
        let g = grid_reflections(3, 4).to_group(100).unwrap();
        assert_eq!(g.order(), 4);
        assert!(g.is_reflection_group());
        assert!(g.has_full_orbit());
    }

    #[test]
    fn shipped_groups_are_symmetry_groups() {
        for named in shipped_groups() {
            let g = named.group();
            assert!(g.degree() <= 12);
            let closed = stabilizer_closure(&g, DEFAULT_MAX_ORDER).unwrap();
            assert_eq!(closed, g, "{} is not a symmetry group", named.name);
        }
    }
}
