//! Instance generators: lattice distance matrices and noisy symmetric pairs.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::groupspace::{sample_vg, GroupSpaceBasis, SymGraph};

/// Euclidean distance matrix of the `rows x cols` integer lattice; vertex
/// `r * cols + c` sits at `(r, c)`.
pub fn gen_grid(rows: usize, cols: usize) -> SymGraph {
    assert!(rows >= 1 && cols >= 1, "grid needs at least one row and column");
    let n = rows * cols;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let (ri, ci) = ((i / cols) as f64, (i % cols) as f64);
        let (rj, cj) = ((j / cols) as f64, (j % cols) as f64);
        ((ri - rj).powi(2) + (ci - cj).powi(2)).sqrt()
    });
    SymGraph::symmetrize(m)
}

/// Symmetric Gaussian matrix rescaled to Frobenius norm `norm`.
pub fn random_symmetric<R: Rng + ?Sized>(n: usize, norm: f64, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v: f64 = rng.sample(StandardNormal);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let f = m.norm();
    if f > 0.0 {
        m *= norm / f;
    }
    m
}

/// General (not symmetric) matrix uniform on the radius-`norm` sphere of `R^{n x n}`.
pub fn random_on_sphere<R: Rng + ?Sized>(n: usize, norm: f64, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let f = m.norm();
    if f > 0.0 {
        m *= norm / f;
    }
    m
}

/// `A = A0 + dA`, `B = A0 + dB` with `A0` uniform on the unit sphere of
/// `V(G)` and independent symmetric perturbations of norm exactly `epsilon`.
pub fn gen_noisy_pair<R: Rng + ?Sized>(basis: &GroupSpaceBasis, epsilon: f64, rng: &mut R) -> (SymGraph, SymGraph) {
    let a0 = sample_vg(basis, rng, 1.0);
    if epsilon == 0.0 {
        return (a0.clone(), a0);
    }
    let n = basis.n();
    let da = random_symmetric(n, epsilon, rng);
    let db = random_symmetric(n, epsilon, rng);
    (SymGraph::symmetrize(&*a0 + da), SymGraph::symmetrize(&*a0 + db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupspace::build_basis;
    use crate::PermGroup;
    use rand::SeedableRng;

    #[test]
    fn two_point_grid() {
        assert_eq!(*gen_grid(1, 2), DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.]));
        assert_eq!(gen_grid(20, 25).n(), 500);
    }

    #[test]
    fn noise_has_requested_norm() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = random_symmetric(7, 0.125, &mut rng);
        assert!((m.norm() - 0.125).abs() < 1e-12);
        assert_eq!(m, m.transpose());
        let basis = build_basis(&PermGroup::trivial(4));
        let (a, b) = gen_noisy_pair(&basis, 0.0, &mut rng);
        assert_eq!(a, b);
    }
}
