//! Moduli and rates of surjection, regularity rates, slopes, the exact
//! formulas for linear and smooth maps, and checkers for the calculus
//! inequalities.

mod calculus;
mod modulus;
mod rate;
mod slope;

pub use calculus::{check_chain_rule, check_sum_rule, CheckReport, CheckRow};
pub use modulus::{modulus_of_surjection, modulus_with, ModulusBracket, ModulusOptions, ModulusQuery};
pub use rate::{
    geometric_schedule, reciprocal_rate, regularity_rate, surjection_rate, RateConfig, RegularityEstimate,
    ResolutionRule,
};
pub use slope::{function_slope, map_slope, poly_slope, SlopeEstimate, DEFAULT_RADII};

pub(crate) use calculus::at_most;
pub(crate) use modulus::ball_grid;

use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::linalg::{singular_values, solve_in_place, Matrix};
use crate::semialg::{GraphPoint, MapSpec, PolyMap};

/// `inf_{|y*| = 1} |A^T y*|`: the smallest singular value when `A` has at
/// least as many columns as rows, and 0 otherwise.
pub fn linear_surjection_rate(a: &Matrix) -> f64 {
    if a.rows() > a.cols() {
        return 0.0;
    }
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// `sur F(x) = sur ∇F(x)` for a polynomial map.
pub fn jacobian_rate(f: &PolyMap, x: &[f64]) -> Result<f64> {
    Ok(linear_surjection_rate(&f.jacobian(x)?))
}

/// For a graph `P(x, y) = 0` with `∂P/∂y` invertible at the point, the graph
/// is locally that of a smooth map with derivative `-(∂P/∂y)^{-1} ∂P/∂x`;
/// returns its surjection rate, or `None` when the system is not of that
/// form or `∂P/∂y` is singular.
pub fn implicit_rate(spec: &MapSpec, p: &GraphPoint) -> Option<f64> {
    let system = spec.implicit_system()?;
    let (n, m) = (spec.n(), spec.m());
    let z = p.concat();
    let mut jy = vec![0.0; m * m];
    let mut jx = Matrix::zeros(m, n);
    for (i, poly) in system.iter().enumerate() {
        for j in 0..n {
            jx[(i, j)] = poly.derivative(j).ok()?.value(&z);
        }
        for j in 0..m {
            jy[i * m + j] = poly.derivative(n + j).ok()?.value(&z);
        }
    }
    let scale = jy.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut d = Matrix::zeros(m, n);
    for j in 0..n {
        let mut a = jy.clone();
        let mut b: Vec<f64> = (0..m).map(|i| jx[(i, j)]).collect();
        if !solve_in_place(&mut a, &mut b, m) || b.iter().any(|v| !v.is_finite()) {
            return None;
        }
        for i in 0..m {
            d[(i, j)] = -b[i];
        }
    }
    Some(linear_surjection_rate(&d))
}

/// How a per-point rate was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RateMethod {
    Jacobian,
    Implicit,
    Estimated,
}

impl RateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateMethod::Jacobian => "jacobian",
            RateMethod::Implicit => "implicit",
            RateMethod::Estimated => "estimated",
        }
    }
}

/// The rate of surjection at a graph point: exact for polynomial maps and
/// for graphs that are locally smooth maps by the implicit function
/// theorem, estimated by [`surjection_rate`] otherwise.
pub fn pointwise_rate(spec: &MapSpec, p: &GraphPoint, cfg: &RateConfig, seed: u64) -> Result<(f64, RateMethod)> {
    check_dim(spec.n(), p.x.len())?;
    check_dim(spec.m(), p.y.len())?;
    if let Some(f) = spec.functional() {
        return Ok((jacobian_rate(f, &p.x)?, RateMethod::Jacobian));
    }
    if let Some(r) = implicit_rate(spec, p) {
        return Ok((r, RateMethod::Implicit));
    }
    let est = surjection_rate(spec, &p.x, &p.y, cfg, seed)?;
    Ok((est.sur_estimate, RateMethod::Estimated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::semialg::Polynomial;

    #[test]
    fn linear_rate_examples() {
        assert_eq!(linear_surjection_rate(&Matrix::diag(&[2.0, 3.0])), 2.0);
        assert_eq!(linear_surjection_rate(&Matrix::zeros(2, 2)), 0.0);
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert!((linear_surjection_rate(&a) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(linear_surjection_rate(&Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap()), 0.0);
    }

    #[test]
    fn jacobian_rate_examples() {
        let f = PolyMap::new(vec![Polynomial::var(2, 0).pow(2) + Polynomial::var(2, 1).pow(2)]).unwrap();
        assert_eq!(jacobian_rate(&f, &[1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(jacobian_rate(&f, &[0.0, 0.0]).unwrap(), 0.0);
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let lin = PolyMap::linear(&a);
        assert!((jacobian_rate(&lin, &[0.3, 0.9]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn implicit_rate_of_the_bump() {
        let spec = catalog::implicit_bump();
        let x: f64 = 2.0;
        let p = GraphPoint::new(vec![x], vec![1.0 / (1.0 + x * x)]);
        let exact = 2.0 * x / (1.0 + x * x).powi(2);
        assert!((implicit_rate(&spec, &p).unwrap() - exact).abs() < 1e-12);
        assert!(implicit_rate(&catalog::punctured_cone(), &p).is_none());
    }
}
