//! The rate of surjection `sur F(x̄|ȳ)`: a liminf of `Sur F(x, y)(λ) / λ`
//! over graph points `(x, y) → (x̄, ȳ)` and `λ → 0+`, approximated on a
//! finite schedule of shrinking neighborhoods.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::rng::{self, domain};
use crate::semialg::{sample_region, GraphPoint, MapSpec, Region};

use super::modulus::{modulus_with, ModulusBracket, ModulusOptions, ModulusQuery};

/// Maps a neighborhood radius `δ` to the grid pitch used at that level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ResolutionRule {
    /// `δ/512` for one-dimensional ranges, `δ/64` for planar ones and
    /// `δ/16` beyond.
    Auto,
    /// `δ * factor`.
    Relative(f64),
    /// The same pitch at every level.
    Fixed(f64),
}

impl ResolutionRule {
    pub fn pitch(&self, delta: f64, m: usize) -> f64 {
        match *self {
            ResolutionRule::Auto => {
                delta
                    / match m {
                        1 => 512.0,
                        2 => 64.0,
                        _ => 16.0,
                    }
            }
            ResolutionRule::Relative(f) => delta * f,
            ResolutionRule::Fixed(h) => h,
        }
    }
}

/// `δ0/2, δ0/4, ..., δ0/2^levels`.
pub fn geometric_schedule(delta0: f64, levels: usize) -> Result<Vec<f64>> {
    if !(delta0 > 0.0 && delta0.is_finite()) || levels == 0 {
        return Err(Error::InvalidInput(format!(
            "schedule needs delta0 > 0 and at least one level, got {delta0} and {levels}"
        )));
    }
    Ok((1..=levels).map(|k| delta0 * 0.5f64.powi(k as i32)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct RateConfig {
    /// Strictly decreasing neighborhood radii.
    pub schedule: Vec<f64>,
    pub resolution: ResolutionRule,
    /// Domain radii tried at level `k`, as fractions of `δ_k`.
    pub lambda_fractions: Vec<f64>,
    /// Sampled neighbors per level; `None` picks 32 for `m = 1` and 8
    /// otherwise.
    pub points_per_level: Option<usize>,
    /// Candidate draws allowed per level when collecting neighbors.
    pub neighbor_trials: usize,
    pub tol_eq: f64,
    /// Tolerance of the closure test on the base point.
    pub closure_tol: f64,
    /// Rates at or below this are treated as zero by [`regularity_rate`].
    pub zero_tol: f64,
    /// Moduli are not resolved beyond `ratio_cap * λ`; larger rates report
    /// as (about) the cap.
    pub ratio_cap: Option<f64>,
    /// Take the liminf over all `(x, y)` near the base point instead of
    /// graph points only.
    pub closure_variant: bool,
    /// Research ordering: neighbors are drawn once from the smallest
    /// neighborhood and only `λ` shrinks along the schedule.
    pub lambda_first: bool,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            schedule: geometric_schedule(0.5, 6).expect("valid"),
            resolution: ResolutionRule::Auto,
            lambda_fractions: vec![1.0, 0.5, 0.25],
            points_per_level: None,
            neighbor_trials: 4096,
            tol_eq: 1e-9,
            closure_tol: 1e-6,
            zero_tol: 1e-6,
            ratio_cap: Some(16.0),
            closure_variant: false,
            lambda_first: false,
        }
    }
}

impl RateConfig {
    pub fn with_schedule(mut self, delta0: f64, levels: usize) -> Result<Self> {
        self.schedule = geometric_schedule(delta0, levels)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty()
            || self.schedule.iter().any(|d| !(*d > 0.0 && d.is_finite()))
            || self.schedule.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidInput(
                "schedule must be positive and strictly decreasing".into(),
            ));
        }
        if self.lambda_fractions.is_empty()
            || self.lambda_fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0))
        {
            return Err(Error::InvalidInput("lambda fractions must lie in (0, 1]".into()));
        }
        if self.points_per_level == Some(0) {
            return Err(Error::InvalidInput("points per level must be positive".into()));
        }
        Ok(())
    }

    fn modulus_options(&self) -> ModulusOptions {
        ModulusOptions {
            tol_eq: self.tol_eq,
            ratio_cap: self.ratio_cap,
            ..ModulusOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityEstimate {
    pub deltas: Vec<f64>,
    /// `values[k]`: smallest `r_hi / λ` seen at level `k` (`+∞` when the
    /// level had no neighbors).
    pub values: Vec<f64>,
    pub sur_estimate: f64,
    pub reg_estimate: f64,
    pub points_per_level: Vec<usize>,
    /// `(r_hi - r_lo) / λ` of the bracket that set `sur_estimate`.
    pub slack: f64,
    /// The graph point and `λ` that set `sur_estimate`.
    pub argmin: Option<(GraphPoint, f64)>,
}

/// `1 / sur`, or `+∞` when `sur <= zero_tol`.
pub fn reciprocal_rate(sur: f64, zero_tol: f64) -> f64 {
    if sur <= zero_tol {
        f64::INFINITY
    } else {
        1.0 / sur
    }
}

/// `reg F = 1 / sur F`, already resolved in the estimate.
pub fn regularity_rate(est: &RegularityEstimate) -> f64 {
    est.reg_estimate
}

fn neighbors(
    spec: &MapSpec,
    center: &[f64],
    delta: f64,
    count: usize,
    seed: u64,
    cfg: &RateConfig,
) -> Result<Vec<GraphPoint>> {
    if cfg.closure_variant {
        return Ok((0..count)
            .map(|i| {
                let mut r = rng::stream(seed, domain::NEIGHBOR, i as u64);
                GraphPoint::split(&rng::in_ball(&mut r, center, delta), spec.n())
            })
            .collect());
    }
    let region = Region::Ball {
        center: center.to_vec(),
        radius: delta,
    };
    let (pts, _) = sample_region(
        spec,
        &region,
        count,
        seed,
        domain::NEIGHBOR,
        cfg.tol_eq,
        30,
        cfg.neighbor_trials,
        None,
    )?;
    Ok(pts)
}

fn dedupe(points: Vec<GraphPoint>) -> Vec<GraphPoint> {
    let mut seen = HashSet::new();
    points
        .into_iter()
        .filter(|p| seen.insert(p.concat().iter().map(|v| v.to_bits()).collect::<Vec<_>>()))
        .collect()
}

/// Estimates `sur F(x̄|ȳ)`.
///
/// Level `k` draws neighbors within `δ_k` of `(x̄, ȳ)`, plus the base
/// point itself: for graph points `(x, y) -> (x̄, ȳ)`,
/// `Sur F(x̄, ȳ)(λ + ε) >= limsup Sur F(x, y)(λ) - ε`, so the base point
/// never undercuts the liminf. It also catches holes such as a missing
/// value at `ȳ`, which a range grid anchored elsewhere cannot hit. The
/// level records the smallest `r_hi / λ` over these points and over
/// `λ ∈ δ_k * lambda_fractions`. Each level is an independent estimate of
/// the infimum over its neighborhood; the finest one is `sur_estimate`.
pub fn surjection_rate(
    spec: &MapSpec,
    xbar: &[f64],
    ybar: &[f64],
    cfg: &RateConfig,
    seed: u64,
) -> Result<RegularityEstimate> {
    check_dim(spec.n(), xbar.len())?;
    check_dim(spec.m(), ybar.len())?;
    cfg.validate()?;
    let center: Vec<f64> = xbar.iter().chain(ybar).copied().collect();
    let graph = spec.compiled();
    if !graph.relaxed_contains(&center, cfg.closure_tol) {
        return Err(Error::NotInClosure {
            violation: graph.violation(&center, cfg.tol_eq),
        });
    }
    let per_level = cfg
        .points_per_level
        .unwrap_or(if spec.m() == 1 { 32 } else { 8 });
    let levels = cfg.schedule.len();
    let finest = cfg.schedule[levels - 1];

    let draw = |k: usize, delta: f64| -> Result<Vec<GraphPoint>> {
        let mut pts = Vec::with_capacity(per_level + 1);
        pts.push(GraphPoint::new(xbar.to_vec(), ybar.to_vec()));
        pts.extend(neighbors(
            spec,
            &center,
            delta,
            per_level,
            rng::derive_seed(seed, k as u64),
            cfg,
        )?);
        Ok(dedupe(pts))
    };
    let level_points: Vec<Vec<GraphPoint>> = if cfg.lambda_first {
        let shared = draw(levels - 1, finest)?;
        vec![shared; levels]
    } else {
        cfg.schedule
            .iter()
            .enumerate()
            .map(|(k, &d)| draw(k, d))
            .collect::<Result<_>>()?
    };
    // The base point comes first and survives deduplication.
    if level_points[levels - 1].len() == 1 && !graph.contains(&center, cfg.tol_eq) {
        return Err(Error::IsolatedPoint { delta: finest });
    }

    let mut tasks = Vec::new();
    for (k, pts) in level_points.iter().enumerate() {
        let delta = cfg.schedule[k];
        let h = cfg.resolution.pitch(delta, spec.m());
        for (i, _) in pts.iter().enumerate() {
            for &f in &cfg.lambda_fractions {
                tasks.push((k, i, delta * f, h));
            }
        }
    }
    let opts = cfg.modulus_options();
    let brackets: Vec<ModulusBracket> = tasks
        .par_iter()
        .map(|&(k, i, lambda, h)| {
            let p = &level_points[k][i];
            let q = ModulusQuery::new(p.x.clone(), p.y.clone(), lambda);
            modulus_with(spec, &q, h, &opts)
        })
        .collect::<Result<_>>()?;

    let mut values = vec![f64::INFINITY; levels];
    let mut best: Vec<Option<(usize, f64, f64)>> = vec![None; levels];
    for (&(k, i, lambda, _), b) in tasks.iter().zip(&brackets) {
        let ratio = b.r_hi / lambda;
        if ratio < values[k] {
            values[k] = ratio;
            best[k] = Some((i, lambda, (b.r_hi - b.r_lo) / lambda));
        }
    }
    let sur = values[levels - 1];
    let (i, lambda, slack) = best[levels - 1].expect("finest level is non-empty");
    Ok(RegularityEstimate {
        deltas: cfg.schedule.clone(),
        values,
        sur_estimate: sur,
        reg_estimate: reciprocal_rate(sur, cfg.zero_tol),
        points_per_level: level_points.iter().map(Vec::len).collect(),
        slack,
        argmin: Some((level_points[levels - 1][i].clone(), lambda)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn schedule_and_resolution() {
        assert_eq!(geometric_schedule(0.5, 3).unwrap(), vec![0.25, 0.125, 0.0625]);
        assert!(geometric_schedule(0.0, 3).is_err());
        assert_eq!(ResolutionRule::Auto.pitch(0.5, 2), 0.5 / 64.0);
        assert_eq!(ResolutionRule::Fixed(0.01).pitch(0.5, 1), 0.01);
    }

    #[test]
    fn identity_rate_is_one() {
        let est = surjection_rate(&catalog::identity(1), &[0.0], &[0.0], &RateConfig::default(), 0).unwrap();
        assert!((est.sur_estimate - 1.0).abs() < 0.05, "{est:?}");
        assert!((est.reg_estimate * est.sur_estimate - 1.0).abs() == 0.0);
    }

    #[test]
    fn punctured_cone_is_irregular_at_the_origin() {
        let est = surjection_rate(&catalog::punctured_cone(), &[0.0], &[0.0], &RateConfig::default(), 0).unwrap();
        assert!(est.sur_estimate <= 0.05, "{est:?}");
    }

    #[test]
    fn diagonal_rate_is_smallest_entry() {
        let est = surjection_rate(&catalog::diagonal(&[2.0, 3.0]), &[0.0, 0.0], &[0.0, 0.0], &RateConfig::default(), 0)
            .unwrap();
        assert!((est.sur_estimate - 2.0).abs() < 0.05, "{est:?}");
    }

    #[test]
    fn rejects_points_off_the_closure() {
        let err = surjection_rate(&catalog::square(), &[0.5], &[0.9], &RateConfig::default(), 0).unwrap_err();
        assert!(matches!(err, Error::NotInClosure { .. }));
    }

    #[test]
    fn reciprocal_conventions() {
        assert_eq!(reciprocal_rate(2.0, 1e-6), 0.5);
        assert_eq!(reciprocal_rate(0.25, 1e-6), 4.0);
        assert_eq!(reciprocal_rate(0.0, 1e-6), f64::INFINITY);
    }

    #[test]
    fn research_flags_run() {
        let cfg = RateConfig {
            lambda_first: true,
            ..RateConfig::default()
        };
        let est = surjection_rate(&catalog::identity(1), &[0.0], &[0.0], &cfg, 1).unwrap();
        assert!((est.sur_estimate - 1.0).abs() < 0.05);
        let cfg = RateConfig {
            closure_variant: true,
            ..RateConfig::default()
        };
        let est = surjection_rate(&catalog::scaled_line(2.0), &[0.0], &[0.0], &cfg, 1).unwrap();
        assert!(est.sur_estimate.is_finite());
    }
}
