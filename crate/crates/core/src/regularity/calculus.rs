//! Checkers for the sum rule and the chain-rule sandwich.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::linalg::Matrix;
use crate::semialg::{GraphPoint, MapSpec, PolyMap};

use super::rate::{surjection_rate, RateConfig, RegularityEstimate};
use super::linear_surjection_rate;

/// One checked inequality `lhs >= rhs` (or `lhs <= rhs`, see `label`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// Bracket widths of the estimates involved, in rate units.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub tol: f64,
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Row for `lhs >= rhs`, passing when `lhs >= rhs - tol - slack`.
pub(crate) fn at_least(label: &str, p: &GraphPoint, lhs: f64, rhs: f64, slack: f64, tol: f64) -> CheckRow {
    CheckRow {
        label: label.to_string(),
        x: p.x.clone(),
        y: p.y.clone(),
        lhs,
        rhs,
        slack,
        pass: lhs >= rhs - tol - slack,
    }
}

/// Row for `lhs <= rhs`, passing when `lhs <= rhs + tol + slack`.
pub(crate) fn at_most(label: &str, p: &GraphPoint, lhs: f64, rhs: f64, slack: f64, tol: f64) -> CheckRow {
    CheckRow {
        label: label.to_string(),
        x: p.x.clone(),
        y: p.y.clone(),
        lhs,
        rhs,
        slack,
        pass: lhs <= rhs + tol + slack,
    }
}

pub(crate) fn rate_at(spec: &MapSpec, x: &[f64], y: &[f64], cfg: &RateConfig, seed: u64) -> Result<RegularityEstimate> {
    surjection_rate(spec, x, y, cfg, seed)
}

/// `sur (H + A)(x | y + A x) >= sur H(x|y) - |A|` at each graph point
/// `(x, y)` of `H`, with `|A|` the Frobenius norm.
pub fn check_sum_rule(
    h: &MapSpec,
    a: &Matrix,
    points: &[GraphPoint],
    tol: f64,
    cfg: &RateConfig,
    seed: u64,
) -> Result<CheckReport> {
    let f = h.add_linear(a)?;
    let norm_a = a.frobenius();
    let rows = points
        .par_iter()
        .map(|p| {
            check_dim(h.n(), p.x.len())?;
            let ax = a.mul_vec(&p.x);
            let fy: Vec<f64> = p.y.iter().zip(&ax).map(|(u, v)| u + v).collect();
            let lhs = rate_at(&f, &p.x, &fy, cfg, seed)?;
            let base = rate_at(h, &p.x, &p.y, cfg, seed)?;
            Ok(at_least(
                "sum",
                p,
                lhs.sur_estimate,
                base.sur_estimate - norm_a,
                lhs.slack + base.slack,
                tol,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport {
        name: "sum-rule".into(),
        tol,
        rows,
    })
}

/// Both sides of `sur G(x) sur H(G(x)|y) <= sur F(x|y) <= |∇G(x)| sur H(G(x)|y)`
/// for `F = H ∘ G`, at graph points `(x, y)` of `F`. The composed graph is
/// obtained by substituting `G` into the domain variables of `H`;
/// `domain` is the sampling box for `x`. `sur G` is exact.
pub fn check_chain_rule(
    h: &MapSpec,
    g: &PolyMap,
    domain: Vec<(f64, f64)>,
    points: &[GraphPoint],
    tol: f64,
    cfg: &RateConfig,
    seed: u64,
) -> Result<CheckReport> {
    let f = h.precompose(g, domain)?;
    let rows = points
        .par_iter()
        .map(|p| {
            check_dim(g.n(), p.x.len())?;
            let gx = g.value(&p.x);
            let jac = g.jacobian_unchecked(&p.x);
            let sur_g = linear_surjection_rate(&jac);
            let sur_h = rate_at(h, &gx, &p.y, cfg, seed)?;
            let sur_f = rate_at(&f, &p.x, &p.y, cfg, seed)?;
            let slack = sur_f.slack + sur_h.slack * jac.frobenius().max(sur_g);
            Ok(vec![
                at_most("chain-lower", p, sur_g * sur_h.sur_estimate, sur_f.sur_estimate, slack, tol),
                at_most(
                    "chain-upper",
                    p,
                    sur_f.sur_estimate,
                    jac.frobenius() * sur_h.sur_estimate,
                    slack,
                    tol,
                ),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport {
        name: "chain-rule".into(),
        tol,
        rows: rows.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn deep() -> RateConfig {
        RateConfig::default().with_schedule(0.5, 8).unwrap()
    }

    #[test]
    fn sum_rule_equality_case() {
        let pts = [GraphPoint::new(vec![0.0], vec![0.0])];
        let rep = check_sum_rule(&catalog::identity(1), &Matrix::diag(&[-0.5]), &pts, 0.1, &deep(), 0).unwrap();
        assert!(rep.all_pass());
        let row = &rep.rows[0];
        assert!((row.lhs - row.rhs).abs() < 0.05, "{row:?}");
        assert!((row.lhs - 0.5).abs() < 0.05);
    }

    #[test]
    fn chain_rule_equality_case() {
        let g = PolyMap::linear(&Matrix::diag(&[2.0]));
        let h = catalog::scaled_line(3.0);
        let pts = [GraphPoint::new(vec![0.1], vec![0.6])];
        let rep = check_chain_rule(&h.with_box(vec![(-3.0, 3.0), (-10.0, 10.0)]).unwrap(), &g, vec![(-1.0, 1.0)], &pts, 0.1, &deep(), 0)
            .unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        for row in &rep.rows {
            assert!((row.lhs - 6.0).abs() < 0.05 && (row.rhs - 6.0).abs() < 0.05, "{row:?}");
        }
    }
}
