//! Extreme points of the convex isomorphism set reached by random linear objectives.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dsopt::{centroid_from_orbits, face_basis, random_objective_extreme_point, FaceOpts};
use crate::error::Result;
use crate::groupspace::{build_basis, sample_vg, GroupSpaceBasis};
use crate::permgroup::PermGroup;
use crate::trial_rng;

use super::generators::random_on_sphere;

#[derive(Clone, Debug, Serialize)]
pub struct ExtremeTrial {
    pub permutation: bool,
    /// Largest `min(x, 1 - x)` over entries of the extreme point.
    pub fractional: f64,
    pub wall_ms: f64,
}

/// One trial: a random graph in `V(G)` and a linear objective uniform on the
/// unit sphere of `R^{n x n}`, minimized over the convex automorphisms.
pub fn extreme_point_trial(g: &PermGroup, basis: &GroupSpaceBasis, seed: u64, index: u64) -> Result<ExtremeTrial> {
    let mut rng = trial_rng(seed, index);
    let start = Instant::now();
    let a = sample_vg(basis, &mut rng, 1.0);
    let c = random_on_sphere(g.degree(), 1.0, &mut rng);
    let centroid = centroid_from_orbits(&g.vertex_orbits());
    let opts = FaceOpts::default();
    let face = face_basis(&a, &a, &centroid, &opts)?;
    let ext = random_objective_extreme_point(&face, &c, &opts)?;
    Ok(ExtremeTrial {
        permutation: ext.permutation.is_some(),
        fractional: ext.fractional(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Row {
    pub group: String,
    pub n: usize,
    pub order: usize,
    pub trials: usize,
    pub permutations: usize,
    pub fractional: usize,
    pub ratio: f64,
    pub mean_wall_ms: f64,
}

pub fn table1_row(name: &str, g: &PermGroup, trials: usize, seed: u64, timing: bool) -> Result<Table1Row> {
    let basis = build_basis(g);
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|k| extreme_point_trial(g, &basis, seed, k))
        .collect::<Result<Vec<_>>>()?;
    let permutations = outcomes.iter().filter(|t| t.permutation).count();
    let wall: f64 = outcomes.iter().map(|t| t.wall_ms).sum();
    Ok(Table1Row {
        group: name.to_string(),
        n: g.degree(),
        order: g.order(),
        trials,
        permutations,
        fractional: trials - permutations,
        ratio: permutations as f64 / trials as f64,
        mean_wall_ms: if timing { wall / trials as f64 } else { 0.0 },
    })
}

pub fn cmd_table1(groups: &[(String, PermGroup)], trials: usize, seed: u64, timing: bool) -> Result<Vec<Table1Row>> {
    groups.iter().map(|(name, g)| table1_row(name, g, trials, seed, timing)).collect()
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::groups::bilateral;

    #[test]
    fn reflection_group_always_gives_permutations() {
        let g = bilateral(3).to_group(10).unwrap();
        let row = table1_row("z2", &g, 10, 1, false).unwrap();
        assert_eq!((row.permutations, row.fractional), (10, 0));
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("group,n,order,trials,permutations,fractional,ratio,mean_wall_ms\n"));
    }
}
