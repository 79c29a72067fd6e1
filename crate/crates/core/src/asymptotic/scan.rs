use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::regularity::{pointwise_rate, RateConfig};
use crate::rng::{self, domain};
use crate::semialg::{norm, sample_region, GraphPoint, MapSpec, Region};
use crate::spatial::link_clusters;

use super::compactification::Eta;

/// `[2^k, 2^(k+1)]` for `k = 2..=7`.
pub fn default_shells() -> Vec<(f64, f64)> {
    (2..=7).map(|k| (2f64.powi(k), 2f64.powi(k + 1))).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticConfig {
    /// Annuli `R_lo <= |x| <= R_hi`, increasing.
    pub shells: Vec<(f64, f64)>,
    pub per_shell_budget: usize,
    /// A cluster is a candidate when its final weighted rate is below this.
    pub threshold: f64,
    /// Linking radius for clustering values.
    pub cluster_radius: f64,
    /// Number of final shells over which the weighted rate must not grow.
    pub window: usize,
    pub tol_eq: f64,
    /// Used only for graphs without an exact rate formula.
    pub rate: RateConfig,
}

impl Default for AsymptoticConfig {
    fn default() -> Self {
        Self {
            shells: default_shells(),
            per_shell_budget: 200,
            threshold: 0.02,
            cluster_radius: 0.05,
            window: 3,
            tol_eq: 1e-9,
            rate: RateConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub cluster: usize,
    pub y: Vec<f64>,
    /// Per-shell minimum of `η(|x|) rate` over the cluster (`+∞` where
    /// the cluster has no point).
    pub decay_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellRow {
    pub shell: usize,
    pub cluster: usize,
    pub min_weighted_rate: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticScanResult {
    pub candidates: Vec<Candidate>,
    pub shells: Vec<(f64, f64)>,
    pub eta_name: String,
    pub table: Vec<ShellRow>,
    pub diagnostics: Vec<String>,
}

struct Sample {
    shell: usize,
    point: GraphPoint,
    weighted: f64,
}

/// Scans for asymptotically `η`-critical values.
///
/// Each shell is sampled on its own (`x` in the annulus, the range box
/// unchanged) and every sample gets `η(|x|) rate`. Sample values are
/// clustered by single linkage; a cluster is a candidate when it has points
/// in each of the last `window` shells, its per-shell minimum does not
/// increase over them, and the final minimum is below `threshold`. Empty
/// shells are skipped with a diagnostic.
pub fn asymptotic_scan(spec: &MapSpec, eta: &Eta, cfg: &AsymptoticConfig, seed: u64) -> Result<AsymptoticScanResult> {
    if cfg.shells.is_empty()
        || cfg
            .shells
            .iter()
            .any(|(lo, hi)| !(*lo >= 0.0 && hi > lo && hi.is_finite()))
        || cfg.shells.windows(2).any(|w| w[1].0 < w[0].1)
    {
        return Err(Error::InvalidInput("shells must be non-empty, increasing annuli".into()));
    }
    if cfg.window == 0 || cfg.window > cfg.shells.len() {
        return Err(Error::InvalidInput(format!(
            "window {} must lie in 1..={}",
            cfg.window,
            cfg.shells.len()
        )));
    }
    let mut diagnostics = Vec::new();
    let mut samples: Vec<Sample> = Vec::new();
    for (k, &(lo, hi)) in cfg.shells.iter().enumerate() {
        let region = Region::Shell { r_lo: lo, r_hi: hi };
        let (pts, trials) = sample_region(
            spec,
            &region,
            cfg.per_shell_budget,
            rng::derive_seed(seed, k as u64),
            domain::SHELL,
            cfg.tol_eq,
            30,
            50 * cfg.per_shell_budget,
            None,
        )?;
        if pts.is_empty() {
            diagnostics.push(format!("shell {k} [{lo}, {hi}]: no graph points in {trials} trials"));
            continue;
        }
        let weighted: Vec<f64> = pts
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let s = rng::derive_seed(seed, ((k as u64) << 32) | i as u64);
                pointwise_rate(spec, p, &cfg.rate, s).map(|(r, _)| eta.eval(norm(&p.x)) * r)
            })
            .collect::<Result<_>>()?;
        samples.extend(pts.into_iter().zip(weighted).map(|(point, weighted)| Sample {
            shell: k,
            point,
            weighted,
        }));
    }

    let ys: Vec<Vec<f64>> = samples.iter().map(|s| s.point.y.clone()).collect();
    let clusters = link_clusters(&ys, cfg.cluster_radius);
    let shells = cfg.shells.len();
    let mut table = Vec::new();
    let mut candidates = Vec::new();
    for (c, members) in clusters.iter().enumerate() {
        let mut trace = vec![f64::INFINITY; shells];
        let mut at_min: Vec<Option<usize>> = vec![None; shells];
        let mut counts = vec![0usize; shells];
        for &i in members {
            let s = &samples[i];
            counts[s.shell] += 1;
            if s.weighted < trace[s.shell] {
                trace[s.shell] = s.weighted;
                at_min[s.shell] = Some(i);
            }
        }
        for k in 0..shells {
            if counts[k] > 0 {
                table.push(ShellRow {
                    shell: k,
                    cluster: c,
                    min_weighted_rate: trace[k],
                    points: counts[k],
                });
            }
        }
        let tail = &trace[shells - cfg.window..];
        let decays = tail.iter().all(|v| v.is_finite()) && tail.windows(2).all(|w| w[1] <= w[0]);
        if decays && trace[shells - 1] < cfg.threshold {
            let i = at_min[shells - 1].expect("final shell is populated");
            candidates.push(Candidate {
                cluster: c,
                y: samples[i].point.y.clone(),
                decay_trace: trace,
            });
        }
    }
    table.sort_by_key(|r| (r.shell, r.cluster));
    Ok(AsymptoticScanResult {
        candidates,
        shells: cfg.shells.clone(),
        eta_name: eta.name(),
        table,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::Matrix;

    #[test]
    fn bump_has_candidate_zero() {
        let res = asymptotic_scan(&catalog::implicit_bump(), &Eta::Linear, &AsymptoticConfig::default(), 0).unwrap();
        assert_eq!(res.candidates.len(), 1, "{res:?}");
        assert!(res.candidates[0].y[0].abs() < 1e-3);
        assert_eq!(res.eta_name, "linear");
    }

    #[test]
    fn identity_has_none() {
        let res = asymptotic_scan(&catalog::identity(1), &Eta::Linear, &AsymptoticConfig::default(), 0).unwrap();
        assert!(res.candidates.is_empty());
    }

    #[test]
    fn projection_has_none_under_the_default_weight() {
        let spec = catalog::linear(&Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap());
        let res = asymptotic_scan(&spec, &Eta::PhiDefault, &AsymptoticConfig::default(), 0).unwrap();
        assert!(res.candidates.is_empty());
    }

    #[test]
    fn rejects_bad_shells() {
        let cfg = AsymptoticConfig {
            shells: vec![(4.0, 8.0), (2.0, 4.0)],
            ..Default::default()
        };
        assert!(asymptotic_scan(&catalog::identity(1), &Eta::Linear, &cfg, 0).is_err());
    }
}
