use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionFit {
    /// Box sizes, decreasing.
    pub scales: Vec<f64>,
    /// Occupied boxes at each scale.
    pub counts: Vec<usize>,
    /// Which scales entered the fit.
    pub used: Vec<bool>,
    pub dimension: f64,
    pub r2: f64,
}

/// `extent * 2^-k` for `k = k0..=k1`, where `extent` is the largest side of
/// the points' bounding box (1 when the points coincide).
pub fn dyadic_scales(points: &[Vec<f64>], k0: i32, k1: i32) -> Vec<f64> {
    let dim = points.first().map_or(0, Vec::len);
    let extent = (0..dim)
        .map(|d| {
            let (lo, hi) = points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[d]), hi.max(p[d])));
            hi - lo
        })
        .fold(0.0, f64::max);
    let extent = if extent > 0.0 { extent } else { 1.0 };
    (k0..=k1).map(|k| extent * 0.5f64.powi(k)).collect()
}

fn occupied(points: &[Vec<f64>], origin: &[f64], eps: f64) -> usize {
    points
        .iter()
        .map(|p| {
            p.iter()
                .zip(origin)
                .map(|(v, o)| ((v - o) / eps).floor() as i64)
                .collect::<Vec<_>>()
        })
        .collect::<HashSet<_>>()
        .len()
}

/// Least-squares slope and `r^2` of `ys` against `xs`.
fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, 1.0);
    }
    let slope = sxy / sxx;
    if syy == 0.0 {
        return (slope, 1.0);
    }
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    (slope, 1.0 - ss_res / syy)
}

/// Box-counting dimension on grids anchored at the points' min corner.
///
/// The slope of `log N(ε)` against `log 1/ε` is fitted over the scales with
/// `1 < N < #points`. When every count is 1 the set is a point (dimension
/// 0). When fewer than two scales are unsaturated, scales with `N = 1` are
/// admitted too; failing that the data is undersampled.
pub fn box_counting_dimension(points: &[Vec<f64>], scales: &[f64]) -> Result<DimensionFit> {
    if points.is_empty() {
        return Err(Error::InvalidInput("box counting needs at least one point".into()));
    }
    if scales.len() < 2
        || scales.iter().any(|s| !(*s > 0.0 && s.is_finite()))
        || scales.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidInput(
            "box counting needs at least two positive, strictly decreasing scales".into(),
        ));
    }
    let dim = points[0].len();
    let origin: Vec<f64> = (0..dim)
        .map(|d| points.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min))
        .collect();
    let counts: Vec<usize> = scales.iter().map(|&e| occupied(points, &origin, e)).collect();
    let total = points.len();
    let mut used: Vec<bool> = counts.iter().map(|&c| 1 < c && c < total).collect();
    if counts.iter().all(|&c| c == 1) {
        return Ok(DimensionFit {
            scales: scales.to_vec(),
            counts,
            used: vec![true; scales.len()],
            dimension: 0.0,
            r2: 1.0,
        });
    }
    if used.iter().filter(|u| **u).count() < 2 {
        used = counts.iter().map(|&c| c < total).collect();
        if used.iter().filter(|u| **u).count() < 2 {
            return Err(Error::Undersampled { points: total });
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = scales
        .iter()
        .zip(&counts)
        .zip(&used)
        .filter(|(_, u)| **u)
        .map(|((s, c), _)| (-s.ln(), (*c as f64).ln()))
        .unzip();
    let (slope, r2) = fit(&xs, &ys);
    Ok(DimensionFit {
        scales: scales.to_vec(),
        counts,
        used,
        dimension: slope.max(0.0),
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn scales() -> Vec<f64> {
        (2..=7).map(|k| 0.5f64.powi(k)).collect()
    }

    #[test]
    fn single_point_has_dimension_zero() {
        let fit = box_counting_dimension(&[vec![0.3, 0.4]], &scales()).unwrap();
        assert_eq!(fit.dimension, 0.0);
    }

    #[test]
    fn segment_and_square() {
        let mut s = rng::stream(1, 0, 0);
        let seg: Vec<Vec<f64>> = (0..10_000).map(|_| vec![rng::uniform(&mut s, 0.0, 1.0), 0.5]).collect();
        let d = box_counting_dimension(&seg, &scales()).unwrap().dimension;
        assert!((0.8..=1.2).contains(&d), "{d}");
        let sq: Vec<Vec<f64>> = (0..10_000)
            .map(|_| vec![rng::uniform(&mut s, 0.0, 1.0), rng::uniform(&mut s, 0.0, 1.0)])
            .collect();
        let d = box_counting_dimension(&sq, &scales()).unwrap().dimension;
        assert!((1.7..=2.1).contains(&d), "{d}");
    }

    #[test]
    fn saturated_counts_are_undersampled() {
        let pts = vec![vec![0.0], vec![1.0]];
        let err = box_counting_dimension(&pts, &[0.1, 0.01]).unwrap_err();
        assert!(matches!(err, Error::Undersampled { points: 2 }));
    }

    #[test]
    fn counts_grow_as_scales_shrink() {
        let pts: Vec<Vec<f64>> = (0..500).map(|i| vec![(i as f64 * 0.61).sin(), (i as f64).cos()]).collect();
        let fit = box_counting_dimension(&pts, &scales()).unwrap();
        assert!(fit.counts.windows(2).all(|w| w[0] <= w[1]));
    }
}
