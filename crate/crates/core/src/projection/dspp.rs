//! Convex-to-concave path `E(S, a) = ||AS - SB||_F^2 + a (n - ||S||_F^2)`,
//! from the convex end `a = lambda_min` to the concave end just past
//! `lambda_max`, warm-starting each local minimization at the previous one.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::hungarian::l2_project;
use super::spectral::{spectral_endpoints_capped, SpectralEndpoints, SPECTRAL_MAX_DEGREE};
use crate::dsopt::{check_square_pair, project_ds, sinkhorn_polish, DykstraOpts};
use crate::error::{Error, Result};
use crate::linalg::{commutator, frob_dot, nullspace};
use crate::permgroup::Permutation;

#[derive(Clone, Copy, Debug)]
pub struct DsppOpts {
    /// Number of steps `N` after the starting weight `a_0`.
    pub steps: usize,
    /// Insert `a_0 + (a_N - a_0) / 100` before the uniform steps.
    pub refine_first: bool,
    /// `a_N = lambda_max * (1 + end_margin)`.
    pub end_margin: f64,
    pub max_inner: usize,
    /// Gradient-mapping norm at which a local minimization stops.
    pub grad_tol: f64,
    /// Leave stationary points along directions of negative curvature in their face.
    pub escape_saddles: bool,
    /// Curvature below `-curvature_tol * max(lambda_max, 1)` counts as negative.
    pub curvature_tol: f64,
    /// Entries at or below this are outside the support.
    pub zero_tol: f64,
    /// Largest `n` accepted (the spectral operator is dense).
    pub dimension_cap: usize,
    pub projection: DykstraOpts,
}

impl Default for DsppOpts {
    fn default() -> Self {
        Self {
            steps: 10,
            refine_first: false,
            end_margin: 1e-3,
            max_inner: 500,
            grad_tol: 1e-9,
            escape_saddles: true,
            curvature_tol: 1e-9,
            zero_tol: 1e-9,
            dimension_cap: SPECTRAL_MAX_DEGREE,
            projection: DykstraOpts { iter_factor: 200, tol: 1e-13 },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathStep {
    pub weight: f64,
    /// `E(S_i, a_i)`.
    pub energy: f64,
    /// `E(S_{i-1}, a_i)`; absent for the first step.
    pub warm_energy: Option<f64>,
    /// `E(S_i, a_i) <= E(S_{i-1}, a_i) + 1e-10`.
    pub monotone: bool,
    /// `n - ||S_i||_F^2`.
    pub permutation_gap: f64,
    /// `||AS_i - S_iB||_F`.
    pub matching_energy: f64,
    /// Gradient-mapping norm at `S_i`.
    pub kkt_residual: f64,
    pub inner_iterations: usize,
    pub escapes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathReport {
    pub endpoints: SpectralEndpoints,
    pub a_schedule: Vec<f64>,
    pub steps: Vec<PathStep>,
    pub final_permutation: Permutation,
    pub final_gap: f64,
    /// Smallest eigenvalue of the Hessian of `E(., a_N)` restricted to the
    /// face of the final iterate; absent at a vertex.
    pub final_face_curvature: Option<f64>,
    #[serde(skip)]
    pub iterates: Vec<DMatrix<f64>>,
}

impl PathReport {
    pub fn all_monotone(&self) -> bool {
        self.steps.iter().all(|s| s.monotone)
    }
}

struct PathEnergy<'a> {
    a: &'a DMatrix<f64>,
    b: &'a DMatrix<f64>,
    n: f64,
    lip: f64,
}

impl PathEnergy<'_> {
    fn value(&self, s: &DMatrix<f64>, w: f64) -> f64 {
        commutator(self.a, s, self.b).norm_squared() + w * (self.n - s.norm_squared())
    }

    fn gradient(&self, s: &DMatrix<f64>, w: f64) -> DMatrix<f64> {
        let r = commutator(self.a, s, self.b);
        (self.a.tr_mul(&r) - r * self.b.transpose()) * 2.0 - s * (2.0 * w)
    }

    fn gradient_mapping(&self, s: &DMatrix<f64>, w: f64, proj: &DykstraOpts) -> f64 {
        let t = 1.0 / self.lip;
        let g = self.gradient(s, w);
        let next = project_ds(&(s - g * t), proj).s;
        (s - next).norm() / t
    }
}

/// Runs the path and rounds the last iterate with [`l2_project`].
pub fn dspp_path(a: &DMatrix<f64>, b: &DMatrix<f64>, opts: &DsppOpts) -> Result<PathReport> {
    let n = check_square_pair(a, b)?;
    if opts.steps < 2 {
        return Err(Error::PreconditionFailed("the path needs at least 2 steps".into()));
    }
    let endpoints = spectral_endpoints_capped(a, b, opts.dimension_cap)?;
    let a0 = endpoints.lambda_min;
    let an = endpoints.lambda_max * (1.0 + opts.end_margin);
    let mut schedule = vec![a0];
    if opts.refine_first {
        schedule.push(a0 + (an - a0) / 100.0);
    }
    schedule.extend((1..=opts.steps).map(|i| a0 + (an - a0) * i as f64 / opts.steps as f64));

    let lip = 2.0 * (a.norm() + b.norm()).powi(2) + 2.0 * an;
    let energy = PathEnergy { a, b, n: n as f64, lip: lip.max(1e-300) };
    let curvature_floor = opts.curvature_tol * endpoints.lambda_max.max(1.0);

    let mut s = DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut steps = Vec::with_capacity(schedule.len());
    let mut iterates = Vec::with_capacity(schedule.len());
    for (i, &w) in schedule.iter().enumerate() {
        let warm_energy = (i > 0).then(|| energy.value(&s, w));
        let may_escape = i > 0 && opts.escape_saddles;
        let escape = |s: &mut DMatrix<f64>| match face_curvature(&energy, s, w, opts.zero_tol) {
            Some((curv, d)) if curv < -curvature_floor => move_to_boundary(&energy, s, &d, w, opts.zero_tol),
            _ => false,
        };
        let mut inner = 0;
        let mut escapes = 0;
        // the warm start is typically stationary for the new weight too
        if may_escape && escape(&mut s) {
            escapes += 1;
        }
        loop {
            inner += descend(&energy, &mut s, w, opts.max_inner.saturating_sub(inner).max(1), i == 0, opts);
            if !may_escape || escapes >= n * n || !escape(&mut s) {
                break;
            }
            escapes += 1;
        }
        let value = energy.value(&s, w);
        steps.push(PathStep {
            weight: w,
            energy: value,
            warm_energy,
            monotone: warm_energy.is_none_or(|prev| value <= prev + 1e-10),
            permutation_gap: n as f64 - s.norm_squared(),
            matching_energy: commutator(a, &s, b).norm(),
            kkt_residual: energy.gradient_mapping(&s, w, &opts.projection),
            inner_iterations: inner,
            escapes,
        });
        iterates.push(s.clone());
    }
    let final_permutation = l2_project(&s);
    let final_gap = n as f64 - s.norm_squared();
    let final_face_curvature = face_curvature(&energy, &s, an, opts.zero_tol).map(|(c, _)| c);
    Ok(PathReport {
        endpoints,
        a_schedule: schedule,
        steps,
        final_permutation,
        final_gap,
        final_face_curvature,
        iterates,
    })
}

/// Monotone projected gradient with backtracking; returns iterations used.
/// With `accelerate`, extrapolated steps are tried as well (restarting the
/// momentum whenever a step would not decrease the energy), which matters on
/// the ill-conditioned convex first step.
fn descend(
    energy: &PathEnergy,
    s: &mut DMatrix<f64>,
    w: f64,
    max_iter: usize,
    accelerate: bool,
    opts: &DsppOpts,
) -> usize {
    let base = 1.0 / energy.lip;
    let mut step = base;
    let mut f = energy.value(s, w);
    let mut y = s.clone();
    let mut fy = f;
    let mut theta = 1.0f64;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let g = energy.gradient(&y, w);
        let mut t = (step * 2.0).min(base * 1e6);
        let accepted = loop {
            let cand = project_ds(&(&y - &g * t), &opts.projection).s;
            let d = &cand - &y;
            let fc = energy.value(&cand, w);
            let model = fy + frob_dot(&g, &d) + d.norm_squared() / (2.0 * t);
            if fc <= model + 1e-15 * fy.abs().max(1e-300) && (accelerate || fc <= f) {
                break Some((cand, fc, d.norm() / t));
            }
            t *= 0.5;
            if t < base * 1e-12 {
                break None;
            }
        };
        let Some((cand, fc, grad_map)) = accepted else { break };
        step = t;
        if fc <= f {
            let prev = std::mem::replace(s, cand);
            f = fc;
            if grad_map <= opts.grad_tol {
                break;
            }
            if accelerate {
                let theta_next = (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0;
                y = &*s + (&*s - &prev) * ((theta - 1.0) / theta_next);
                theta = theta_next;
            } else {
                y = s.clone();
            }
        } else if theta == 1.0 {
            break;
        } else {
            y = s.clone();
            theta = 1.0;
        }
        fy = energy.value(&y, w);
    }
    let polished = sinkhorn_polish(s, 1e-14, 100);
    if energy.value(&polished, w) <= f + 1e-12 {
        *s = polished;
    }
    iterations
}

/// Smallest curvature of `E(., w)` over directions that keep the support of
/// `s` and its row and column sums, with a unit direction attaining it.
fn face_curvature(energy: &PathEnergy, s: &DMatrix<f64>, w: f64, zero_tol: f64) -> Option<(f64, DMatrix<f64>)> {
    let n = s.nrows();
    let support: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .filter(|&(i, j)| s[(i, j)] > zero_tol)
        .collect();
    let mut sums = DMatrix::zeros(2 * n, support.len());
    for (e, &(i, j)) in support.iter().enumerate() {
        sums[(i, e)] = 1.0;
        sums[(n + j, e)] = 1.0;
    }
    let z = nullspace(&sums, 1e-10, 1e-12);
    if z.ncols() == 0 {
        return None;
    }
    let to_matrix = |col: &[f64]| {
        let mut d = DMatrix::zeros(n, n);
        for (e, &(i, j)) in support.iter().enumerate() {
            d[(i, j)] = col[e];
        }
        d
    };
    let dirs: Vec<DMatrix<f64>> = (0..z.ncols()).map(|k| to_matrix(z.column(k).as_slice())).collect();
    let images: Vec<DMatrix<f64>> = dirs.iter().map(|d| commutator(energy.a, d, energy.b)).collect();
    let k = dirs.len();
    let mut h = DMatrix::zeros(k, k);
    for p in 0..k {
        for q in p..k {
            let v = 2.0 * frob_dot(&images[p], &images[q]);
            h[(p, q)] = v;
            h[(q, p)] = v;
        }
        h[(p, p)] -= 2.0 * w;
    }
    let eig = SymmetricEigen::new(h);
    let (idx, &curv) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))?;
    let v = eig.eigenvectors.column(idx);
    let mut d = DMatrix::zeros(n, n);
    for (c, dir) in dirs.iter().enumerate() {
        d += dir * v[c];
    }
    Some((curv, d))
}

/// Moves from `s` along `±d` until an entry hits zero, choosing the sign
/// that does not increase the energy to first order. Returns false if the
/// move would not decrease the energy.
fn move_to_boundary(energy: &PathEnergy, s: &mut DMatrix<f64>, d: &DMatrix<f64>, w: f64, zero_tol: f64) -> bool {
    let slope = frob_dot(&energy.gradient(s, w), d);
    let d = if slope > 0.0 || (slope == 0.0 && first_nonzero(d) < 0.0) { -d } else { d.clone() };
    let mut t = f64::INFINITY;
    for (sv, dv) in s.iter().zip(d.iter()) {
        if *dv < 0.0 {
            t = t.min(sv / -dv);
        }
    }
    if !t.is_finite() || t <= 0.0 {
        return false;
    }
    let mut next = &*s + &d * t;
    next.iter_mut().for_each(|v| {
        if *v <= zero_tol {
            *v = 0.0
        }
    });
    let next = sinkhorn_polish(&next, 1e-14, 100);
    if energy.value(&next, w) >= energy.value(s, w) {
        return false;
    }
    *s = next;
    true
}

fn first_nonzero(d: &DMatrix<f64>) -> f64 {
    d.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(0.0)
}
