//! Linear assignment by the Hungarian method with row/column potentials.

use nalgebra::DMatrix;

use crate::permgroup::Permutation;

/// Permutation `p` minimizing `sum_j cost[(p(j), j)]`, in `O(n^3)`.
///
/// Columns are inserted one at a time and shortest augmenting paths are
/// grown over rows in index order, so ties resolve towards low indices.
pub fn min_cost_assignment(cost: &DMatrix<f64>) -> Permutation {
    assert!(cost.is_square(), "assignment needs a square cost matrix");
    let n = cost.nrows();
    if n == 0 {
        return Permutation::identity(0);
    }
    // 1-based with a virtual slot 0, as in the classical formulation:
    // "workers" are columns of `cost`, "jobs" are its rows.
    let c = |w: usize, job: usize| cost[(job - 1, w - 1)];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for w in 1..=n {
        owner[0] = w;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let w0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = c(w0, j) - u[w0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut images = vec![0; n];
    for job in 1..=n {
        images[owner[job] - 1] = job - 1;
    }
    Permutation::new(images).expect("assignment is a bijection")
}

/// Entries of a relaxed solution closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-6;

/// Nearest permutation to `s` in Frobenius norm, i.e. the maximizer of `<S, P>`.
/// Entries are snapped to multiples of [`TIE_TOL`] first, so solver round-off
/// between equal entries does not override the index-order tie-breaking.
pub fn l2_project(s: &DMatrix<f64>) -> Permutation {
    min_cost_assignment(&s.map(|v| -(v / TIE_TOL).round() * TIE_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_matrix_rounds_to_identity() {
        for n in 1..8 {
            let s = DMatrix::from_element(n, n, 1.0 / n as f64);
            assert!(l2_project(&s).is_identity(), "n = {n}");
        }
    }

    #[test]
    fn near_ties_follow_index_order() {
        // centroid of the mirror swapping 0<->1 and 2<->3, with round-off
        let mut s = DMatrix::from_row_slice(4, 4, &[
            0.5, 0.5, 0., 0., 0.5, 0.5, 0., 0., 0., 0., 0.5, 0.5, 0., 0., 0.5, 0.5,
        ]);
        s[(2, 3)] += 3e-13;
        s[(2, 2)] -= 3e-13;
        assert!(l2_project(&s).is_identity());
    }

    #[test]
    fn permutation_round_trips() {
        let p = Permutation::from_cycles(5, &[&[0, 3, 1], &[2, 4]]).unwrap();
        assert_eq!(l2_project(&p.to_matrix()), p);
    }

    #[test]
    fn small_cost_example() {
        // rows are targets: column 0 prefers row 2, column 1 row 0, column 2 row 1
        let cost = DMatrix::from_row_slice(3, 3, &[5., 0., 9., 9., 5., 0., 0., 9., 5.]);
        assert_eq!(min_cost_assignment(&cost).images(), &[2, 0, 1]);
    }
}
