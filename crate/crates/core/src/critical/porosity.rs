use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::regularity::ball_grid;
use crate::semialg::dist;
use crate::spatial::GridIndex;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PorosityReport {
    /// `min ρ / r` over tested `(point, r)` pairs with a hole found.
    pub lambda_max: f64,
    pub tested_radii: Vec<f64>,
    pub tested_points: usize,
    /// Pairs for which no candidate center gave a hole of positive radius.
    pub witness_failures: Vec<(Vec<f64>, f64)>,
    /// Per tested pair: point index, radius, best hole radius.
    pub holes: Vec<(usize, f64, f64)>,
}

/// Points tested by [`porosity_scan`] when more are given.
pub const MAX_TESTED_POINTS: usize = 64;

/// For each tested point `x` and radius `r`, the largest hole: a ball
/// `B(c, ρ) ⊂ B(x, r)` containing no sample point, with `c` on a grid of
/// pitch `grid_pitch * r` over `B(x, r)`. `ρ = min(r - |c - x|, dist(c, Q))`.
/// Up to [`MAX_TESTED_POINTS`] points, evenly spaced by index, are tested.
pub fn porosity_scan(points: &[Vec<f64>], radii: &[f64], grid_pitch: f64) -> Result<PorosityReport> {
    if points.is_empty() {
        return Err(Error::InvalidInput("porosity scan needs points".into()));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidInput("porosity radii must be positive".into()));
    }
    if !(grid_pitch > 0.0 && grid_pitch < 1.0) {
        return Err(Error::InvalidInput(format!(
            "grid pitch is a fraction of the radius in (0, 1), got {grid_pitch}"
        )));
    }
    let rmin = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let index = GridIndex::new(points, rmin / 2.0);
    let tested: Vec<usize> = if points.len() <= MAX_TESTED_POINTS {
        (0..points.len()).collect()
    } else {
        (0..MAX_TESTED_POINTS).map(|i| i * points.len() / MAX_TESTED_POINTS).collect()
    };
    let pairs: Vec<(usize, f64)> = tested
        .iter()
        .flat_map(|&i| radii.iter().map(move |&r| (i, r)))
        .collect();
    let holes: Vec<(usize, f64, f64)> = pairs
        .par_iter()
        .map(|&(i, r)| {
            let x = &points[i];
            let best = ball_grid(x, r, grid_pitch * r)
                .iter()
                .map(|c| {
                    let inner = r - dist(c, x);
                    let gap = index.nearest(c, None).map_or(f64::INFINITY, |(_, d)| d);
                    inner.min(gap)
                })
                .fold(0.0, f64::max);
            (i, r, best)
        })
        .collect();
    let witness_failures = holes
        .iter()
        .filter(|h| h.2 <= 0.0)
        .map(|&(i, r, _)| (points[i].clone(), r))
        .collect();
    let lambda_max = holes
        .iter()
        .filter(|h| h.2 > 0.0)
        .map(|&(_, r, rho)| rho / r)
        .fold(f64::INFINITY, f64::min);
    Ok(PorosityReport {
        lambda_max: if lambda_max.is_finite() { lambda_max.min(1.0) } else { 0.0 },
        tested_radii: radii.to_vec(),
        tested_points: tested.len(),
        witness_failures,
        holes,
    })
}
