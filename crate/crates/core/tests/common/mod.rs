//! Exact and brute-force helpers shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use dsmatch::groupspace::pair_orbits;
use dsmatch::{trial_rng, PermGroup, Permutation};

pub fn all_permutations(n: usize) -> Vec<Permutation> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Permutation>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(Permutation::new(prefix.clone()).unwrap());
            return;
        }
        for x in 0..n {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Rank of an integer matrix by fraction-exact Gaussian elimination.
pub fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let factor = &m[r][c] / &pivot;
                for k in c..ncols {
                    let delta = &factor * &m[rank][k];
                    m[r][k] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Integer matrix in `V(G)`: independent random integer per pair orbit.
pub fn integer_invariant(g: &PermGroup, seed: u64) -> Vec<Vec<i64>> {
    let po = pair_orbits(g);
    let mut rng = trial_rng(seed, 0);
    let vals: Vec<i64> = (0..po.len()).map(|_| rng.random_range(1..1000)).collect();
    let n = g.degree();
    (0..n).map(|i| (0..n).map(|j| vals[po.index(i, j)]).collect()).collect()
}

/// Kernel dimension of the homogeneous affine-automorphism system restricted
/// to the support of `G`: `R 1 = 0`, `1^T R = 0`, `AR = RA`, `R_ij = 0` off support.
pub fn exact_kernel_dim(a: &[Vec<i64>], g: &PermGroup) -> usize {
    let n = a.len();
    let allowed = |i: usize, j: usize| g.elements().iter().any(|p| p.apply(j) == i);
    let unknowns: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| allowed(i, j)).collect();
    let idx = |i: usize, j: usize| unknowns.iter().position(|&e| e == (i, j));
    let mut rows = Vec::new();
    for i in 0..n {
        let mut r = vec![0i64; unknowns.len()];
        let mut c = vec![0i64; unknowns.len()];
        for k in 0..n {
            if let Some(e) = idx(i, k) {
                r[e] += 1;
            }
            if let Some(e) = idx(k, i) {
                c[e] += 1;
            }
        }
        rows.push(r);
        rows.push(c);
    }
    for i in 0..n {
        for j in 0..n {
            // (AR - RA)_ij = sum_k A_ik R_kj - R_ik A_kj
            let mut r = vec![0i64; unknowns.len()];
            for k in 0..n {
                if let Some(e) = idx(k, j) {
                    r[e] += a[i][k];
                }
                if let Some(e) = idx(i, k) {
                    r[e] -= a[k][j];
                }
            }
            rows.push(r);
        }
    }
    unknowns.len() - rational_rank(&rows)
}
