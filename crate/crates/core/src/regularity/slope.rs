//! Slopes `|∇f|(x)` of scalar functions and `Sl F(x)` of polynomial maps.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::rng::{self, domain};
use crate::semialg::{dist, norm, PolyMap};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub radii: Vec<f64>,
    /// `values[k]`: largest `(f(x) - f(u))+ / |x - u|` over samples `u`
    /// strictly inside `B(x, radii[k])`.
    pub values: Vec<f64>,
    pub slope: f64,
}

pub const DEFAULT_RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty()
        || radii.iter().any(|r| !(*r > 0.0 && r.is_finite()))
        || radii.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidInput(
            "radii must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Central-difference gradient with step `step`.
fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut u = x.to_vec();
    (0..x.len())
        .map(|j| {
            u[j] = x[j] + step;
            let hi = f(&u);
            u[j] = x[j] - step;
            let lo = f(&u);
            u[j] = x[j];
            (hi - lo) / (2.0 * step)
        })
        .collect()
}

/// Slope of `f` at `x`.
///
/// At radius `r`, `samples` points `x + t r d` are tried with `d` a seeded
/// unit direction (used with both signs) and `t` uniform in `[1/2, 1)`, plus
/// the point at `t = 3/4` along the finite-difference descent direction.
pub fn function_slope(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SlopeEstimate> {
    check_radii(radii)?;
    let fx = f(x);
    let quotient = |u: &[f64]| (fx - f(u)).max(0.0) / dist(x, u);
    let pairs = samples.div_ceil(2);
    let values: Vec<f64> = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let mut best = 0.0f64;
            for i in 0..pairs {
                let mut s = rng::stream(seed, domain::SLOPE, (k * pairs + i) as u64);
                let d = rng::unit_vector(&mut s, x.len());
                let t = rng::uniform(&mut s, 0.5, 1.0);
                for sign in [1.0, -1.0] {
                    let u: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + sign * t * r * b).collect();
                    best = best.max(quotient(&u));
                }
            }
            let g = fd_gradient(f, x, 1e-3 * r);
            let gn = norm(&g);
            if gn > 0.0 && gn.is_finite() {
                let u: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - 0.75 * r * b / gn).collect();
                best = best.max(quotient(&u));
            }
            best
        })
        .collect();
    let slope = *values.last().expect("radii are non-empty");
    Ok(SlopeEstimate {
        radii: radii.to_vec(),
        values,
        slope,
    })
}

/// [`function_slope`] for a scalar polynomial map.
pub fn poly_slope(f: &PolyMap, x: &[f64], radii: &[f64], samples: usize, seed: u64) -> Result<SlopeEstimate> {
    check_dim(1, f.m())?;
    check_dim(f.n(), x.len())?;
    let g = |u: &[f64]| f.components()[0].value(u);
    function_slope(&g, x, radii, samples, seed)
}

/// `Sl F(x) = inf_{y ≠ F(x)} |∇ f_y|(x)` with `f_y(u) = |y - F(u)|`.
///
/// The infimum runs over `y = F(x) ± ρ e`, `e` among `range_samples` seeded
/// unit directions and `ρ = 10 * radii[0]`; each `f_y` gets
/// [`function_slope`] with 256 samples per radius.
pub fn map_slope(
    f: &PolyMap,
    x: &[f64],
    range_samples: usize,
    radii: &[f64],
    seed: u64,
) -> Result<SlopeEstimate> {
    check_dim(f.n(), x.len())?;
    check_radii(radii)?;
    let fx = f.value(x);
    let rho = 10.0 * radii[0];
    let mut values = vec![f64::INFINITY; radii.len()];
    for j in 0..range_samples.max(1) {
        let mut s = rng::stream(seed, domain::RANGE_DIR, j as u64);
        let e = rng::unit_vector(&mut s, f.m());
        for sign in [1.0, -1.0] {
            let y: Vec<f64> = fx.iter().zip(&e).map(|(a, b)| a + sign * rho * b).collect();
            let fy = |u: &[f64]| dist(&y, &f.value(u));
            let est = function_slope(&fy, x, radii, 256, rng::derive_seed(seed, j as u64))?;
            for (v, w) in values.iter_mut().zip(&est.values) {
                *v = v.min(*w);
            }
        }
    }
    let slope = *values.last().expect("radii are non-empty");
    Ok(SlopeEstimate {
        radii: radii.to_vec(),
        values,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::semialg::Polynomial;

    #[test]
    fn scalar_examples() {
        let sq = |u: &[f64]| u[0] * u[0];
        assert_eq!(function_slope(&sq, &[0.0], &DEFAULT_RADII, 64, 0).unwrap().slope, 0.0);
        let neg_abs = |u: &[f64]| -u[0].abs();
        let s = function_slope(&neg_abs, &[0.0], &DEFAULT_RADII, 64, 0).unwrap().slope;
        assert!((s - 1.0).abs() < 1e-12);
        let lin = |u: &[f64]| 3.0 * u[0];
        let s = function_slope(&lin, &[0.4, -0.2], &DEFAULT_RADII, 64, 0).unwrap().slope;
        assert!((s - 3.0).abs() < 1e-9, "{s}");
    }

    #[test]
    fn map_examples() {
        let id = PolyMap::identity(1);
        assert!((map_slope(&id, &[0.3], 4, &DEFAULT_RADII, 0).unwrap().slope - 1.0).abs() < 1e-6);
        let c = PolyMap::new(vec![Polynomial::constant(1, 2.0)]).unwrap();
        assert_eq!(map_slope(&c, &[0.3], 4, &DEFAULT_RADII, 0).unwrap().slope, 0.0);
        let two = PolyMap::linear(&Matrix::diag(&[2.0]));
        assert!((map_slope(&two, &[0.3], 4, &DEFAULT_RADII, 0).unwrap().slope - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_radii() {
        let f = |u: &[f64]| u[0];
        assert!(function_slope(&f, &[0.0], &[1e-3, 1e-2], 8, 0).is_err());
        assert!(function_slope(&f, &[0.0], &[], 8, 0).is_err());
    }
}
