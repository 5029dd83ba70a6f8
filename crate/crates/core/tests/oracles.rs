//! Independent oracles: exact rational kernels, brute-force searches over
//! all permutations, and explicitly assembled operators.

mod common;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::Rng;

use common::{all_permutations, exact_kernel_dim, integer_invariant, rational_rank};

use dsmatch::dsopt::{
    centroid_from_orbits, enumerate_isomorphisms, face_affine_space, pataki_extract, EnumerateOpts, FaceOpts,
    FaceState,
};
use dsmatch::exactness::{affine_exactness_margin, RANK_TOL};
use dsmatch::experiments::generators::gen_grid;
use dsmatch::experiments::groups::{bilateral, cyclic_free, grid_reflections};
use dsmatch::groupspace::{build_basis, sample_vg};
use dsmatch::permgroup::{automorphism_oracle, exhaustive_qap};
use dsmatch::projection::{invariant_costs, l2_project, spectral_endpoints};
use dsmatch::{trial_rng, PermGroup, Permutation};

fn to_f64(a: &[Vec<i64>]) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| a[i][j] as f64)
}

#[test]
fn free_z3_kernel_is_strictly_larger_than_group_span() {
    let g = cyclic_free(3, 2).to_group(10).unwrap();
    let a = integer_invariant(&g, 7);
    let kernel = exact_kernel_dim(&a, &g);
    let span = g.order() - 1;
    assert!(kernel > span, "kernel {kernel}, span {span}");
    // the floating-point classifier agrees on the same integer instance
    assert!(affine_exactness_margin(&to_f64(&a), &g).margin <= RANK_TOL);
}

#[test]
fn reflection_group_kernels_equal_group_span() {
    for g in [bilateral(4).to_group(10).unwrap(), grid_reflections(2, 3).to_group(10).unwrap()] {
        let a = integer_invariant(&g, 11);
        assert_eq!(exact_kernel_dim(&a, &g), g.order() - 1);
        assert!(affine_exactness_margin(&to_f64(&a), &g).margin > RANK_TOL);
    }
}

#[test]
fn face_at_centroid_matches_exact_kernel() {
    let g = bilateral(5).to_group(10).unwrap();
    let a = integer_invariant(&g, 3);
    let af = to_f64(&a);
    let sc = centroid_from_orbits(&g.vertex_orbits());
    let state = FaceState::from_matrix(sc, 1e-9);
    let dirs = face_affine_space(&af, &af, &state, &FaceOpts::default()).unwrap();
    assert_eq!(dirs.len(), exact_kernel_dim(&a, &g));
    assert_eq!(dirs.len(), 1);
}

#[test]
fn automorphism_oracle_matches_brute_force() {
    let perms = all_permutations(6);
    for seed in 0..4 {
        for g in [cyclic_free(3, 2), bilateral(3), cyclic_free(2, 3)] {
            let g = g.to_group(10).unwrap();
            let a = sample_vg(&build_basis(&g), &mut trial_rng(seed, 1), 1.0);
            let brute: Vec<Permutation> = perms.iter().filter(|p| p.residual_inf(&a, &a) <= 1e-9).cloned().collect();
            let oracle = automorphism_oracle(&a, 1e-9).unwrap();
            assert_eq!(oracle.elements(), brute.as_slice());
        }
    }
}

#[test]
fn exhaustive_qap_matches_brute_force() {
    let perms = all_permutations(6);
    for seed in 0..5 {
        let mut rng = trial_rng(seed, 2);
        let mut sym = || {
            let m = DMatrix::<f64>::from_fn(6, 6, |_, _| rng.random::<f64>());
            &m + m.transpose()
        };
        let (a, b) = (sym(), sym());
        let best = perms.iter().map(|p| p.energy(&a, &b)).fold(f64::INFINITY, f64::min);
        let (_, e) = exhaustive_qap(&a, &b).unwrap();
        assert!((e - best).abs() <= 1e-12 * best.max(1.0));
    }
}

#[test]
fn l2_projection_matches_brute_force() {
    let perms = all_permutations(5);
    for seed in 0..10 {
        let mut rng = trial_rng(seed, 3);
        let x = DMatrix::<f64>::from_fn(5, 5, |_, _| rng.random::<f64>());
        let s = dsmatch::dsopt::sinkhorn_polish(&x, 1e-14, 1000);
        let score = |p: &Permutation| (0..5).map(|j| s[(p.apply(j), j)]).sum::<f64>();
        let best = perms.iter().map(score).fold(f64::NEG_INFINITY, f64::max);
        let got = score(&l2_project(&s));
        assert!(got >= best - 5.0 * dsmatch::projection::TIE_TOL, "{got} < {best}");
    }
}

#[test]
fn centroid_is_group_average() {
    for g in [grid_reflections(3, 4), cyclic_free(4, 2), bilateral(3)] {
        let g = g.to_group(100).unwrap();
        let n = g.degree();
        let mut avg = DMatrix::zeros(n, n);
        for p in g.elements() {
            avg += p.to_matrix();
        }
        avg /= g.order() as f64;
        assert!((&*centroid_from_orbits(&g.vertex_orbits()) - avg).amax() < 1e-15);
    }
}

#[test]
fn spectral_endpoints_match_explicit_hessian() {
    // vec-space Hessian of ||AS - SB||^2 / 2 assembled entrywise, restricted
    // to an independently built basis of mean-zero matrices
    let g = bilateral(3).to_group(10).unwrap();
    let a = sample_vg(&build_basis(&g), &mut trial_rng(4, 0), 1.0);
    let n = 6;
    let mut basis: Vec<DMatrix<f64>> = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = 1.0;
            e[(i, n - 1)] = -1.0;
            e[(n - 1, j)] = -1.0;
            e[(n - 1, n - 1)] = 1.0;
            for q in &basis {
                let c = e.dot(q);
                e -= q * c;
            }
            let norm = e.norm();
            basis.push(e / norm);
        }
    }
    let k = basis.len();
    let images: Vec<DMatrix<f64>> = basis.iter().map(|d| &*a * d - d * &*a).collect();
    let gram = DMatrix::from_fn(k, k, |p, q| images[p].dot(&images[q]));
    let ev = nalgebra::SymmetricEigen::new(gram).eigenvalues;
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e = spectral_endpoints(&a, &a).unwrap();
    assert!(e.lambda_min <= 1e-8 && lo.abs() <= 1e-8);
    assert!((e.lambda_max - hi).abs() <= 1e-10 * hi);
}

#[test]
fn grid_3x4_enumeration_matches_oracle() {
    let a = gen_grid(3, 4);
    let oracle = automorphism_oracle(&a, 1e-9).unwrap();
    assert_eq!(oracle.order(), 4);
    let found = enumerate_isomorphisms(&a, &a, &EnumerateOpts::default()).unwrap();
    let mut perms = found.permutations.clone();
    perms.sort();
    assert_eq!(perms.as_slice(), oracle.elements());
    assert!(found.complete);
}

#[test]
fn z2_extraction_lands_in_oracle_group() {
    let g = bilateral(5).to_group(10).unwrap();
    let basis = build_basis(&g);
    for k in 0..5 {
        let a = sample_vg(&basis, &mut trial_rng(8, k), 1.0);
        let sc = centroid_from_orbits(&g.vertex_orbits());
        let ext = pataki_extract(&a, &a, &sc, &FaceOpts::default()).unwrap();
        let p = ext.permutation.expect("convex exactness gives a permutation");
        assert!(automorphism_oracle(&a, 1e-9).unwrap().contains(&p));
        assert_eq!(ext.steps, 1);
    }
}

#[test]
fn invariant_costs_vanish_exactly_on_group_support() {
    let g = PermGroup::closure(4, &[Permutation::new(vec![1, 0, 3, 2]).unwrap()], 10).unwrap();
    let a = sample_vg(&build_basis(&g), &mut trial_rng(2, 0), 1.0);
    let c = invariant_costs(&a, &a).unwrap();
    let mask = g.support_mask();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(c[(i, j)] == 0.0, mask.allowed(i, j), "({i}, {j})");
        }
    }
}

#[test]
fn rational_rank_sanity() {
    assert_eq!(rational_rank(&[vec![1, 2], vec![2, 4]]), 1);
    assert_eq!(rational_rank(&[vec![1, 0], vec![0, 1], vec![1, 1]]), 2);
    let one = BigRational::one();
    assert!(one.is_positive());
}
