//! Randomized invariants over groups, graphs and doubly-stochastic matrices.

mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

use dsmatch::dsopt::{
    centroid_from_orbits, default_schedule, ds_residual, enumerate_isomorphisms, pataki_extract, penalty_solve,
    sinkhorn_polish, solve_relaxation, Barrier, EnumerateOpts, FaceOpts, PenaltyOpts, SolverOpts,
};
use dsmatch::exactness::{
    affine_constraint_matrix, affine_exactness_test, classify_generic, signature, RANK_TOL,
};
use dsmatch::experiments::groups::{bilateral, cyclic_free, dihedral, grid_reflections, shipped_groups, trivial};
use dsmatch::experiments::{cmd_noise_experiment, cmd_table1, write_csv, ExperimentConfig, Method};
use dsmatch::groupspace::{build_basis, discriminative_witness, sample_vg};
use dsmatch::permgroup::{automorphism_oracle, exhaustive_qap, GroupSpec, DEFAULT_MAX_ORDER};
use dsmatch::projection::{
    dspp_path, invariant_costs, l2_project, projected_hessian_eigenvalues, spectral_endpoints, DsppOpts,
};
use dsmatch::{trial_rng, PermGroup, Permutation};

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Permutation::new(v).unwrap())
}

fn constructed_group() -> impl Strategy<Value = PermGroup> {
    prop_oneof![
        (1usize..=4).prop_map(bilateral),
        (2usize..=4, 1usize..=2).prop_map(|(k, m)| cyclic_free(k, m)),
        (3usize..=4, 1usize..=2).prop_map(|(k, m)| dihedral(k, m)),
        (2usize..=3, 2usize..=4).prop_map(|(r, c)| grid_reflections(r, c)),
        (2usize..=6).prop_map(trivial),
    ]
    .prop_map(|spec| spec.to_group(DEFAULT_MAX_ORDER).unwrap())
}

fn generated_group() -> impl Strategy<Value = PermGroup> {
    (2usize..=6)
        .prop_flat_map(|n| prop::collection::vec(permutation(n), 1..=2).prop_map(move |gens| (n, gens)))
        .prop_map(|(n, gens)| PermGroup::closure(n, &gens, DEFAULT_MAX_ORDER).unwrap())
}

fn any_group() -> impl Strategy<Value = PermGroup> {
    prop_oneof![constructed_group(), generated_group()]
}

/// Reflection groups with a full orbit, where the relaxation is convex exact.
fn exact_group() -> impl Strategy<Value = PermGroup> {
    prop_oneof![
        (1usize..=4).prop_map(bilateral),
        (2usize..=3, 2usize..=4).prop_map(|(r, c)| grid_reflections(r, c)),
    ]
    .prop_map(|spec| spec.to_group(DEFAULT_MAX_ORDER).unwrap())
}

fn random_ds(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = trial_rng(seed, 0);
    let x = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random::<f64>().powi(3) + 1e-3);
    sinkhorn_polish(&x, 1e-14, 2000)
}

fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = trial_rng(seed, 1);
    let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    &m + m.transpose()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn groups_satisfy_the_axioms(g in any_group()) {
        let n = g.degree();
        prop_assert!(g.contains(&Permutation::identity(n)));
        for p in g.elements() {
            prop_assert!(g.contains(&p.inverse()));
            for q in g.elements() {
                prop_assert!(g.contains(&p.compose(q)));
            }
        }
    }

    #[test]
    fn elements_map_orbits_onto_themselves(g in any_group()) {
        let orbits = g.vertex_orbits();
        for p in g.elements() {
            for class in orbits.classes() {
                let mut image: Vec<usize> = class.iter().map(|&v| p.apply(v)).collect();
                image.sort();
                let mut sorted = class.clone();
                sorted.sort();
                prop_assert_eq!(image, sorted);
            }
        }
    }

    #[test]
    fn support_mask_marks_exactly_the_group_moves(g in any_group()) {
        let n = g.degree();
        let mask = g.support_mask();
        let orbits = g.vertex_orbits();
        for i in 0..n {
            for j in 0..n {
                let movers = g.elements().iter().filter(|p| p.apply(j) == i).count();
                prop_assert_eq!(mask.allowed(i, j), movers > 0);
                if movers > 0 {
                    prop_assert_eq!(orbits.class_of(i), orbits.class_of(j));
                }
                let full = orbits.classes()[orbits.class_of(j)].len() == g.order();
                if full && movers > 0 {
                    prop_assert_eq!(movers, 1);
                }
            }
        }
    }

    #[test]
    fn oracle_contains_the_sampling_group(g in any_group(), seed in any::<u64>()) {
        let a = sample_vg(&build_basis(&g), &mut trial_rng(seed, 0), 1.0);
        let aut = automorphism_oracle(&a, 1e-9).unwrap();
        for p in g.elements() {
            prop_assert!(aut.contains(p));
        }
    }

    #[test]
    fn basis_reconstructs_and_is_isometric(g in any_group(), seed in any::<u64>()) {
        let basis = build_basis(&g);
        let a = sample_vg(&basis, &mut trial_rng(seed, 0), 1.0);
        let back = basis.synthesize(&basis.coordinates(&a));
        prop_assert!((&*back - &*a).norm() <= 1e-12 * a.norm().max(1.0));
        let mut rng = trial_rng(seed, 1);
        let x: Vec<f64> = (0..basis.dim()).map(|_| rng.random::<f64>() - 0.5).collect();
        let y: Vec<f64> = (0..basis.dim()).map(|_| rng.random::<f64>() - 0.5).collect();
        let lhs = basis.synthesize(&x).dot(&basis.synthesize(&y));
        let rhs: f64 = x.iter().zip(&y).map(|(u, v)| u * v).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn witness_signature_is_the_class_number(g in any_group()) {
        let s = signature(&discriminative_witness(&g));
        let orbits = g.vertex_orbits();
        for (idx, class) in orbits.classes().iter().enumerate() {
            for &v in class {
                prop_assert!((s.values()[v] - (idx + 1) as f64).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn group_moves_solve_the_affine_system(g in any_group(), seed in any::<u64>()) {
        let a = sample_vg(&build_basis(&g), &mut trial_rng(seed, 0), 1.0);
        let (f, rhs) = affine_constraint_matrix(&a, &g.support_mask());
        for p in g.elements() {
            let v = DVector::from_column_slice(p.to_matrix().as_slice());
            prop_assert!((&f * v - &rhs).amax() <= 1e-12);
        }
    }

    #[test]
    fn affine_verdict_is_scale_invariant(g in any_group(), seed in any::<u64>(), c in 1e-3f64..1e3) {
        let a = sample_vg(&build_basis(&g), &mut trial_rng(seed, 0), 1.0);
        prop_assert_eq!(affine_exactness_test(&a, &g, RANK_TOL), affine_exactness_test(&(&*a * c), &g, RANK_TOL));
    }

    #[test]
    fn centroid_is_fixed_by_the_group(g in any_group()) {
        let sc = centroid_from_orbits(&g.vertex_orbits());
        prop_assert!(ds_residual(&sc) <= 1e-15);
        prop_assert_eq!(g.support_mask().mass_outside(&sc), 0.0);
        for p in g.elements() {
            let m = p.to_matrix();
            prop_assert!((&m * &*sc - &*sc).amax() <= 1e-15);
            prop_assert!((&*sc * &m - &*sc).amax() <= 1e-15);
        }
    }

    #[test]
    fn invariant_costs_vanish_on_isomorphisms(g in any_group(), seed in any::<u64>()) {
        let a = sample_vg(&build_basis(&g), &mut trial_rng(seed, 0), 1.0);
        let c = invariant_costs(&a, &a).unwrap();
        for p in g.elements() {
            for j in 0..g.degree() {
                prop_assert_eq!(c[(p.apply(j), j)], 0.0);
            }
        }
    }

    #[test]
    fn permutation_gap_vanishes_only_on_permutations(n in 2usize..=7, seed in any::<u64>(), p in (2usize..=7).prop_flat_map(permutation)) {
        let s = random_ds(n, seed);
        let gap = n as f64 - s.norm_squared();
        prop_assert!(gap >= -1e-12);
        prop_assert_eq!(gap <= 1e-9, l2_project(&s).to_matrix() == s);
        let m = p.to_matrix();
        prop_assert_eq!(p.degree() as f64 - m.norm_squared(), 0.0);
        prop_assert_eq!(l2_project(&m), p);
    }

    #[test]
    fn l2_projection_attains_the_maximum(n in 2usize..=6, seed in any::<u64>()) {
        let s = random_ds(n, seed);
        let score = |p: &Permutation| (0..n).map(|j| s[(p.apply(j), j)]).sum::<f64>();
        let best = common::all_permutations(n).iter().map(score).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(score(&l2_project(&s)) >= best - n as f64 * dsmatch::projection::TIE_TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn exhaustive_search_finds_planted_isomorphisms(n in 3usize..=7, seed in any::<u64>(), p in (3usize..=7).prop_flat_map(permutation)) {
        prop_assume!(p.degree() == n);
        let a = random_symmetric(n, seed);
        let b = p.to_matrix().transpose() * &a * p.to_matrix();
        let (_, energy) = exhaustive_qap(&a, &b).unwrap();
        prop_assert!(energy <= 1e-12 * a.norm());
    }

    #[test]
    fn relaxation_is_feasible_and_weakly_exact(g in any_group(), seed in any::<u64>()) {
        let a = sample_vg(&build_basis(&g), &mut trial_rng(seed, 0), 1.0);
        let r = solve_relaxation(&a, &a, &SolverOpts::default()).unwrap();
        prop_assert!(ds_residual(&r.s) <= 1e-8);
        let aut = automorphism_oracle(&a, 1e-9).unwrap();
        prop_assert!(aut.support_mask().mass_outside(&r.s) <= 1e-6);
    }

    #[test]
    fn face_walk_reaches_a_group_element(g in exact_group(), seed in any::<u64>()) {
        let a = sample_vg(&build_basis(&g), &mut trial_rng(seed, 0), 1.0);
        let sc = centroid_from_orbits(&g.vertex_orbits());
        let n = g.degree();
        let ext = pataki_extract(&a, &a, &sc, &FaceOpts::default()).unwrap();
        prop_assert!(ext.steps <= n * n);
        let p = ext.permutation.expect("permutation");
        prop_assert!(g.contains(&p));
    }

    #[test]
    fn enumeration_returns_a_group_of_isomorphisms(g in exact_group(), seed in any::<u64>()) {
        let a = sample_vg(&build_basis(&g), &mut trial_rng(seed, 0), 1.0);
        let found = enumerate_isomorphisms(&a, &a, &EnumerateOpts::default()).unwrap();
        let perms = &found.permutations;
        for (k, p) in perms.iter().enumerate() {
            prop_assert!(p.energy(&a, &a) <= 1e-8 * a.norm());
            prop_assert!(!perms[..k].contains(p));
            for q in perms {
                prop_assert!(perms.contains(&p.compose(q)));
            }
        }
        let n = g.degree();
        let stacked = DMatrix::from_fn(n * n, perms.len(), |r, c| perms[c].to_matrix().as_slice()[r]);
        prop_assert_eq!(stacked.rank(1e-9), perms.len());
        prop_assert_eq!(perms.len(), g.order());
    }

    #[test]
    fn path_endpoints_are_convex_and_concave(n in 3usize..=7, seed in any::<u64>(), iso in any::<bool>()) {
        let a = random_symmetric(n, seed);
        let b = if iso { a.clone() } else { random_symmetric(n, seed.wrapping_add(1)) };
        let e = spectral_endpoints(&a, &b).unwrap();
        let low = projected_hessian_eigenvalues(&a, &b, e.lambda_min).unwrap();
        let high = projected_hessian_eigenvalues(&a, &b, e.lambda_max * (1.0 + 1e-3)).unwrap();
        prop_assert!(low[0] >= -1e-8 * e.lambda_max.max(1.0));
        prop_assert!(high.iter().all(|&v| v <= -1e-9));
    }

    #[test]
    fn path_energies_never_increase(n in 3usize..=7, seed in any::<u64>()) {
        let a = random_symmetric(n, seed);
        let b = random_symmetric(n, seed.wrapping_add(1));
        let r = dspp_path(&a, &b, &DsppOpts::default()).unwrap();
        prop_assert!(r.all_monotone());
        prop_assert!(r.iterates.iter().all(|s| ds_residual(s) <= 1e-8));
    }

    #[test]
    fn penalty_minimizer_is_group_invariant(g in exact_group(), seed in any::<u64>()) {
        let a = sample_vg(&build_basis(&g), &mut trial_rng(seed, 0), 1.0);
        let s = penalty_solve(&a, &a, Barrier::Entropy, &default_schedule(1.0, 0.5, 12), &PenaltyOpts::default()).unwrap();
        // equivariant Newton steps from J/n keep the iterate invariant up to round-off
        for p in g.elements() {
            prop_assert!((&p.to_matrix() * &*s - &*s).norm() <= 1e-11);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn single_trial_verdicts_agree_with_full_runs(seed in any::<u64>()) {
        for named in shipped_groups() {
            let g = named.group();
            let full = classify_generic(&g, 100, seed, RANK_TOL).verdict;
            prop_assert_eq!(classify_generic(&g, 1, seed, RANK_TOL).verdict, full);
        }
    }

    #[test]
    fn noise_ratios_are_exact_fractions(seed in any::<u64>()) {
        let config = ExperimentConfig {
            seed,
            trials: 3,
            sizes: vec![4],
            noise_exponents: vec![-1.0, 0.0],
            methods: vec![Method::DsL2, Method::Dspp],
            timing: false,
            ..Default::default()
        };
        let res = cmd_noise_experiment(&config).unwrap();
        for row in &res.rows {
            prop_assert!(row.successes <= row.trials);
            prop_assert_eq!(row.ratio, row.successes as f64 / row.trials as f64);
        }
        prop_assert!(res.records.iter().all(|r| r.retrieved.degree() == 4));
    }

    #[test]
    fn reruns_are_byte_identical(seed in any::<u64>()) {
        let groups = vec![("z2".to_string(), bilateral(3).to_group(10).unwrap())];
        let run = || {
            let mut out = Vec::new();
            write_csv(&cmd_table1(&groups, 5, seed, false).unwrap(), &mut out).unwrap();
            out
        };
        prop_assert_eq!(run(), run());
        let spec = GroupSpec::from_generators(6, &[Permutation::from_cycles(6, &[&[0, 1, 2], &[3, 4, 5]]).unwrap()]);
        prop_assert_eq!(spec.to_group(10).unwrap().order(), 3);
    }
}
