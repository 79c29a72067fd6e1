use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::regularity::{pointwise_rate, RateConfig, RateMethod};
use crate::rng;
use crate::semialg::{sample_graph, GraphPoint, MapSpec};

#[derive(Clone, Debug, Serialize)]
pub struct ScanConfig {
    /// Points with rate below `tau` are flagged.
    pub tau: f64,
    /// Graph samples drawn.
    pub budget: usize,
    pub tol_eq: f64,
    /// Estimator settings for graphs without an exact formula. Its ratio
    /// cap is lowered to `4 tau`: only whether a rate is below `tau`
    /// matters here.
    pub rate: RateConfig,
    /// Graph points evaluated in addition to the samples (points off the
    /// graph are skipped).
    pub extra_points: Vec<GraphPoint>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            tau: 0.05,
            budget: 2000,
            tol_eq: 1e-9,
            rate: RateConfig::default(),
            extra_points: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlaggedPoint {
    pub point: GraphPoint,
    pub rate: f64,
    pub method: RateMethod,
    /// Membership still holds at a tenth of the equality tolerance.
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalScanResult {
    pub flagged: Vec<FlaggedPoint>,
    /// The `y` parts of `flagged`, in order.
    pub values: Vec<Vec<f64>>,
    pub threshold: f64,
    pub total_sampled: usize,
}

/// Samples the graph and flags points whose rate of surjection is below
/// `tau`. Extra points come first, then samples in draw order.
pub fn scan_critical_values(spec: &MapSpec, cfg: &ScanConfig, seed: u64) -> Result<CriticalScanResult> {
    if !(cfg.tau > 0.0 && cfg.tau.is_finite()) {
        return Err(Error::InvalidInput(format!("tau must be positive, got {}", cfg.tau)));
    }
    let mut points: Vec<GraphPoint> = Vec::new();
    for p in &cfg.extra_points {
        if spec.contains(&p.x, &p.y, cfg.tol_eq)? {
            points.push(p.clone());
        }
    }
    points.extend(sample_graph(spec, cfg.budget, seed, cfg.tol_eq)?);
    let mut rate_cfg = cfg.rate.clone();
    rate_cfg.tol_eq = cfg.tol_eq;
    let cap = 4.0 * cfg.tau;
    rate_cfg.ratio_cap = Some(rate_cfg.ratio_cap.map_or(cap, |c| c.min(cap)));
    let rates: Vec<(f64, RateMethod)> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| pointwise_rate(spec, p, &rate_cfg, rng::derive_seed(seed, i as u64)))
        .collect::<Result<_>>()?;
    let flagged: Vec<FlaggedPoint> = points
        .iter()
        .zip(&rates)
        .filter(|(_, (r, _))| *r < cfg.tau)
        .map(|(p, &(rate, method))| FlaggedPoint {
            point: p.clone(),
            rate,
            method,
            strict: spec.contains(&p.x, &p.y, cfg.tol_eq / 10.0).unwrap_or(false),
        })
        .collect();
    let values = flagged.iter().map(|f| f.point.y.clone()).collect();
    Ok(CriticalScanResult {
        flagged,
        values,
        threshold: cfg.tau,
        total_sampled: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::regularity::jacobian_rate;

    #[test]
    fn square_flags_near_zero() {
        let cfg = ScanConfig {
            tau: 0.1,
            budget: 4000,
            ..Default::default()
        };
        let res = scan_critical_values(&catalog::square(), &cfg, 0).unwrap();
        assert!(!res.flagged.is_empty());
        for f in &res.flagged {
            assert!(f.point.x[0].abs() < 0.05 && f.point.y[0] < 0.0025);
            assert_eq!(f.method, RateMethod::Jacobian);
        }
        assert_eq!(res.values.len(), res.flagged.len());
    }

    #[test]
    fn flags_are_sound() {
        let spec = catalog::paraboloid();
        let res = scan_critical_values(&spec, &ScanConfig::default(), 3).unwrap();
        let f = spec.functional().unwrap();
        for p in &res.flagged {
            assert!(jacobian_rate(f, &p.point.x).unwrap() < 0.05);
        }
    }

    #[test]
    fn unsatisfiable_graph_is_a_diagnostic() {
        let spec = MapSpec::new(
            "empty",
            1,
            1,
            crate::semialg::Formula::falsity(2),
            vec![(-1.0, 1.0); 2],
        )
        .unwrap();
        let err = scan_critical_values(&spec, &ScanConfig::default(), 0).unwrap_err();
        assert!(err.is_diagnostic());
    }
}
