use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::min_norm_step;
use crate::regularity::linear_surjection_rate;
use crate::semialg::{dist, sample_graph, MapSpec, PolyMap};
use crate::spatial::{link_clusters, GridIndex};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    /// Flagged points of the cluster.
    pub points: Vec<Vec<f64>>,
    /// `f` at the cluster's critical point: the least-rate member, polished
    /// by Newton's method on `∇f = 0` when that converges nearby.
    pub value: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    pub components: Vec<Component>,
    pub spreads: Vec<f64>,
    pub linking_radius: f64,
    pub tau: f64,
    pub total_sampled: usize,
}

/// Linking radius used when none is given: ten times the mean
/// nearest-neighbor distance.
pub fn default_linking_radius(points: &[Vec<f64>]) -> f64 {
    if points.len() < 2 {
        return 1.0;
    }
    let spread = points
        .iter()
        .flat_map(|p| p.iter().copied())
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1e-12);
    let index = GridIndex::new(points, spread / (points.len() as f64).sqrt().max(1.0));
    let total: f64 = (0..points.len())
        .into_par_iter()
        .map(|i| index.nearest(&points[i], Some(i)).map_or(0.0, |(_, d)| d))
        .collect::<Vec<_>>()
        .iter()
        .sum();
    10.0 * total / points.len() as f64
}

/// Newton on `∇f = 0` from `x`; returns the root if it stays within
/// `reach` of `x`.
fn polish(f: &PolyMap, x: &[f64], reach: f64) -> Option<Vec<f64>> {
    let n = f.n();
    let grad = f.components()[0].gradient();
    let hess: Vec<Vec<_>> = grad.iter().map(|g| g.gradient()).collect();
    let mut u = x.to_vec();
    for _ in 0..50 {
        let g: Vec<f64> = grad.iter().map(|p| p.value(&u)).collect();
        if g.iter().all(|v| v.abs() <= 1e-13) {
            return (dist(&u, x) <= reach).then_some(u);
        }
        let h: Vec<f64> = hess.iter().flat_map(|row| row.iter().map(|p| p.value(&u))).collect();
        let step = min_norm_step(&h, &g, n, n, 1e-14)?;
        for (a, s) in u.iter_mut().zip(&step) {
            *a -= s;
        }
        if dist(&u, x) > reach {
            return None;
        }
    }
    let g: Vec<f64> = grad.iter().map(|p| p.value(&u)).collect();
    (g.iter().all(|v| v.abs() <= 1e-10) && dist(&u, x) <= reach).then_some(u)
}

/// Clusters the sampled points of a scalar polynomial function whose
/// gradient norm is below `tau`, and reports the spread of `f` on each
/// cluster. `eps` is the linking radius (default
/// [`default_linking_radius`]).
pub fn component_constancy(
    spec: &MapSpec,
    tau: f64,
    eps: Option<f64>,
    budget: usize,
    seed: u64,
) -> Result<ComponentReport> {
    let f = spec
        .functional()
        .ok_or_else(|| Error::InvalidInput("component analysis needs a polynomial map".into()))?;
    check_dim(1, f.m())?;
    if !(tau > 0.0) || eps.is_some_and(|e| !(e > 0.0)) {
        return Err(Error::InvalidInput("tau and eps must be positive".into()));
    }
    let samples = sample_graph(spec, budget, seed, 1e-12)?;
    let scored: Vec<(f64, &[f64], f64)> = samples
        .par_iter()
        .map(|p| (linear_surjection_rate(&f.jacobian_unchecked(&p.x)), &p.x[..], p.y[0]))
        .collect();
    let flagged: Vec<(f64, &[f64], f64)> = scored.into_iter().filter(|s| s.0 < tau).collect();
    let xs: Vec<Vec<f64>> = flagged.iter().map(|s| s.1.to_vec()).collect();
    let eps = eps.unwrap_or_else(|| default_linking_radius(&xs));
    let components: Vec<Component> = link_clusters(&xs, eps)
        .into_iter()
        .map(|members| {
            let vals: Vec<f64> = members.iter().map(|&i| flagged[i].2).collect();
            let min_value = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max_value = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let best = members
                .iter()
                .copied()
                .min_by(|&a, &b| flagged[a].0.total_cmp(&flagged[b].0).then(a.cmp(&b)))
                .expect("clusters are non-empty");
            let value = match polish(f, &xs[best], eps) {
                Some(u) => f.components()[0].value(&u),
                None => flagged[best].2,
            };
            Component {
                points: members.iter().map(|&i| xs[i].clone()).collect(),
                value,
                min_value,
                max_value,
                spread: max_value - min_value,
            }
        })
        .collect();
    Ok(ComponentReport {
        spreads: components.iter().map(|c| c.spread).collect(),
        components,
        linking_radius: eps,
        tau,
        total_sampled: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn circle_squared_has_two_components() {
        let rep = component_constancy(&catalog::circle_squared(), 0.05, Some(0.1), 100_000, 0).unwrap();
        assert_eq!(rep.components.len(), 2, "{:?}", rep.spreads);
        let mut values: Vec<f64> = rep.components.iter().map(|c| c.value).collect();
        values.sort_by(f64::total_cmp);
        assert!(values[0].abs() < 1e-9 && (values[1] - 1.0).abs() < 1e-9, "{values:?}");
        assert!(rep.spreads.iter().all(|s| *s < 1e-3));
    }

    #[test]
    fn cubic_has_two_critical_values() {
        let rep = component_constancy(&catalog::cubic(), 0.05, None, 20_000, 0).unwrap();
        let mut values: Vec<f64> = rep.components.iter().map(|c| c.value).collect();
        values.sort_by(f64::total_cmp);
        assert_eq!(values.len(), 2);
        assert!((values[0] + 2.0).abs() < 1e-6 && (values[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn regular_function_has_none() {
        let rep = component_constancy(&catalog::identity(1), 0.05, None, 1000, 0).unwrap();
        assert!(rep.components.is_empty());
    }
}
