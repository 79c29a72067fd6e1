use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

use super::mapspec::{GraphPoint, MapSpec};

/// Knobs for [`sample_graph_with`].
#[derive(Clone, Debug)]
pub struct SamplerConfig {
    /// Sampling fails with a sparse-graph error once at least
    /// `probe_trials` candidates were drawn and the acceptance rate is below
    /// this floor.
    pub min_acceptance: f64,
    pub probe_trials: usize,
    /// Gauss-Newton iterations spent pulling a rejected candidate onto the
    /// equality atoms before it is discarded.
    pub refine_iters: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            min_acceptance: 1e-3,
            probe_trials: 20_000,
            refine_iters: 30,
        }
    }
}

/// Candidates are drawn in fixed-size batches; results never depend on the
/// worker count because acceptance is decided per index and assembled in
/// index order.
const BATCH: usize = 256;

/// Where candidates are drawn from.
#[derive(Clone, Debug)]
pub(crate) enum Region {
    /// The whole sampling box.
    Box,
    /// Graph points within Euclidean distance `radius` of `center` in
    /// `R^(n+m)`.
    Ball { center: Vec<f64>, radius: f64 },
    /// Graph points whose `x` lies in the annulus `r_lo <= |x| <= r_hi`; `y`
    /// is drawn from the range box.
    Shell { r_lo: f64, r_hi: f64 },
}

impl Region {
    fn keep(&self, spec: &MapSpec, z: &[f64]) -> bool {
        match self {
            Region::Box => spec
                .bbox()
                .iter()
                .zip(z)
                .all(|((lo, hi), v)| *lo <= *v && *v <= *hi),
            Region::Ball { center, radius } => dist(center, z) <= *radius,
            Region::Shell { r_lo, r_hi } => {
                let r = norm(&z[..spec.n()]);
                *r_lo <= r && r <= *r_hi
            }
        }
    }

    fn draw(&self, spec: &MapSpec, rng: &mut Stream) -> Vec<f64> {
        let n = spec.n();
        let mut z = match self {
            Region::Box => spec
                .bbox()
                .iter()
                .map(|(lo, hi)| rng::uniform(rng, *lo, *hi))
                .collect(),
            Region::Ball { center, radius } => center
                .iter()
                .map(|c| rng::uniform(rng, c - radius, c + radius))
                .collect::<Vec<_>>(),
            Region::Shell { r_lo, r_hi } => {
                let mut z: Vec<f64> = loop {
                    let x: Vec<f64> = (0..n).map(|_| rng::uniform(rng, -r_hi, *r_hi)).collect();
                    let r = norm(&x);
                    if *r_lo <= r && r <= *r_hi {
                        break x;
                    }
                };
                z.extend(spec.range_box().iter().map(|(lo, hi)| rng::uniform(rng, *lo, *hi)));
                z
            }
        };
        if let Some(f) = spec.functional() {
            let y = f.value(&z[..n]);
            z[n..].copy_from_slice(&y);
        }
        z
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Draws candidate `index` and returns it if it (or its refinement) lies on
/// the graph inside the region.
fn try_candidate(
    spec: &MapSpec,
    region: &Region,
    seed: u64,
    domain: u64,
    index: u64,
    tol_eq: f64,
    refine_iters: usize,
) -> Option<Vec<f64>> {
    let mut rng = rng::stream(seed, domain, index);
    let mut z = region.draw(spec, &mut rng);
    let g = spec.compiled();
    if g.contains(&z, tol_eq) {
        return region.keep(spec, &z).then_some(z);
    }
    if !g.has_eq() {
        return None;
    }
    let total = spec.n() + spec.m();
    let bbox = spec.bbox().to_vec();
    let clamp = move |z: &mut [f64]| {
        for (v, (lo, hi)) in z.iter_mut().zip(&bbox) {
            *v = v.clamp(*lo, *hi);
        }
    };
    let ok = match region {
        Region::Box => g.refine(&mut z, 0..total, tol_eq, refine_iters, &clamp),
        _ => g.refine(&mut z, 0..total, tol_eq, refine_iters, &|_| {}),
    };
    (ok && region.keep(spec, &z)).then_some(z)
}

/// Draws candidates in index order until `count` are accepted or
/// `max_trials` were drawn. `floor` optionally enforces the acceptance-rate
/// floor after a probe budget. Returns the accepted points and the number of
/// trials consumed.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sample_region(
    spec: &MapSpec,
    region: &Region,
    count: usize,
    seed: u64,
    domain: u64,
    tol_eq: f64,
    refine_iters: usize,
    max_trials: usize,
    floor: Option<(f64, usize)>,
) -> Result<(Vec<GraphPoint>, usize)> {
    let mut out = Vec::with_capacity(count);
    let mut trials = 0usize;
    while out.len() < count && trials < max_trials {
        let start = trials;
        let end = (start + BATCH).min(max_trials);
        let batch: Vec<Option<Vec<f64>>> = (start..end)
            .into_par_iter()
            .map(|i| try_candidate(spec, region, seed, domain, i as u64, tol_eq, refine_iters))
            .collect();
        for (offset, z) in batch.into_iter().enumerate() {
            if out.len() == count {
                break;
            }
            trials = start + offset + 1;
            if let Some(z) = z {
                out.push(GraphPoint::split(&z, spec.n()));
            }
        }
        if let Some((min_rate, probe)) = floor {
            if trials >= probe && (out.len() as f64) < min_rate * trials as f64 {
                return Err(Error::SparseGraph {
                    accepted: out.len(),
                    requested: count,
                    trials,
                });
            }
        }
    }
    Ok((out, trials))
}

/// `count` graph points, uniform over the box (points off thin sets are
/// rejected; candidates near equality atoms are projected onto them).
/// Deterministic in `(spec, count, seed, tol_eq)`.
pub fn sample_graph(spec: &MapSpec, count: usize, seed: u64, tol_eq: f64) -> Result<Vec<GraphPoint>> {
    sample_graph_with(spec, count, seed, tol_eq, &SamplerConfig::default())
}

pub fn sample_graph_with(
    spec: &MapSpec,
    count: usize,
    seed: u64,
    tol_eq: f64,
    cfg: &SamplerConfig,
) -> Result<Vec<GraphPoint>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let max_trials = cfg.probe_trials + (count as f64 / cfg.min_acceptance).ceil() as usize;
    let (pts, trials) = sample_region(
        spec,
        &Region::Box,
        count,
        seed,
        rng::domain::GRAPH,
        tol_eq,
        cfg.refine_iters,
        max_trials,
        Some((cfg.min_acceptance, cfg.probe_trials)),
    )?;
    if pts.len() < count {
        return Err(Error::SparseGraph {
            accepted: pts.len(),
            requested: count,
            trials,
        });
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semialg::{Formula, PolyMap, Polynomial};

    fn open_box_spec(graph: Formula) -> MapSpec {
        MapSpec::new("t", 1, 1, graph, vec![(-1.0, 1.0), (-2.0, 2.0)]).unwrap()
    }

    #[test]
    fn unsatisfiable_graph_is_sparse() {
        let spec = open_box_spec(Formula::falsity(2));
        match sample_graph(&spec, 10, 0, 1e-9) {
            Err(Error::SparseGraph { accepted, .. }) => assert_eq!(accepted, 0),
            other => panic!("expected sparse-graph, got {other:?}"),
        }
    }

    #[test]
    fn tautology_fills_the_box() {
        let spec = open_box_spec(Formula::truth(2));
        let pts = sample_graph(&spec, 500, 3, 1e-9).unwrap();
        assert_eq!(pts.len(), 500);
        for p in &pts {
            assert!((-1.0..=1.0).contains(&p.x[0]) && (-2.0..=2.0).contains(&p.y[0]));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = open_box_spec(Formula::lt(
            Polynomial::var(2, 1).pow(2) - Polynomial::var(2, 0).pow(2),
        ));
        let a = sample_graph(&spec, 300, 11, 1e-9).unwrap();
        let b = sample_graph(&spec, 300, 11, 1e-9).unwrap();
        assert_eq!(a, b);
        let c = sample_graph(&spec, 300, 12, 1e-9).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn equality_graphs_are_projected() {
        // Implicit graph y (1 + x^2) - 1 = 0.
        let p = Polynomial::var(2, 1) * (Polynomial::constant(2, 1.0) + Polynomial::var(2, 0).pow(2))
            - Polynomial::constant(2, 1.0);
        let spec = MapSpec::new("bump", 1, 1, Formula::eq(p), vec![(-3.0, 3.0), (-0.5, 1.5)]).unwrap();
        let pts = sample_graph(&spec, 200, 5, 1e-9).unwrap();
        for q in &pts {
            assert!(spec.contains(&q.x, &q.y, 1e-9).unwrap());
            assert!((q.y[0] - 1.0 / (1.0 + q.x[0] * q.x[0])).abs() < 1e-8);
        }
    }

    #[test]
    fn functional_samples_lie_on_graph() {
        let f = PolyMap::new(vec![Polynomial::var(1, 0).pow(2)]).unwrap();
        let spec = MapSpec::from_poly_map("sq", f, vec![(-1.0, 1.0), (0.0, 1.0)]).unwrap();
        let pts = sample_graph(&spec, 100, 0, 1e-12).unwrap();
        assert!(pts.iter().all(|q| q.y[0] == q.x[0] * q.x[0]));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let spec = open_box_spec(Formula::lt(
            Polynomial::var(2, 1).pow(2) - Polynomial::var(2, 0).pow(2),
        ));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_graph(&spec, 1000, 9, 1e-9).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
