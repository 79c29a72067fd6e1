//! Grid-certified brackets for the modulus of surjection
//! `Sur F(x, y)(λ) = sup { r >= 0 : B(y, r) ⊂ F(B(x, λ)) }`, with
//! `sup ∅ = 0`.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::min_norm_step;
use crate::semialg::{dist, CompiledFormula, MapSpec, PolyMap};

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusQuery {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
}

impl ModulusQuery {
    pub fn new(x: Vec<f64>, y: Vec<f64>, lambda: f64) -> Self {
        Self { x, y, lambda }
    }
}

/// `[r_lo, r_hi]` bracket on `Sur F(x, y)(λ)` at grid pitch `resolution`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusBracket {
    pub r_lo: f64,
    pub r_hi: f64,
    pub resolution: f64,
    /// Range grid points whose coverage was decided.
    pub samples_range: usize,
    /// Domain grid points (or preimage seeds) available per range point.
    pub samples_domain: usize,
    /// The search hit its ceiling without finding an uncovered point.
    pub saturated: bool,
}

#[derive(Clone, Debug)]
pub struct ModulusOptions {
    pub tol_eq: f64,
    /// Upper end of the search; defaults to the range-box diameter.
    pub r_max: Option<f64>,
    /// Additional ceiling `ratio_cap * λ` on the search.
    pub ratio_cap: Option<f64>,
    /// Iterations of the local refinement given to a range point that no
    /// domain grid point covers.
    pub refine_iters: usize,
    /// Domain grids are coarsened so they never exceed this many points.
    pub max_domain_points: usize,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        Self {
            tol_eq: 1e-9,
            r_max: None,
            ratio_cap: None,
            refine_iters: 20,
            max_domain_points: 50_000,
        }
    }
}

/// Integer offsets `i` with `|i| <= k`, sorted by length then
/// lexicographically. The order is total, so the list for a larger `k`
/// starts with the list for a smaller one.
fn sorted_offsets(dim: usize, k: i64) -> (Vec<i32>, Vec<i64>) {
    let k2 = k * k;
    let mut pts: Vec<(i64, Vec<i32>)> = Vec::new();
    let mut cur = vec![-k; dim];
    loop {
        let n2: i64 = cur.iter().map(|a| a * a).sum();
        if n2 <= k2 {
            pts.push((n2, cur.iter().map(|&a| a as i32).collect()));
        }
        let mut d = 0;
        loop {
            if d == dim {
                pts.sort();
                let norms = pts.iter().map(|p| p.0).collect();
                let flat = pts.into_iter().flat_map(|p| p.1).collect();
                return (flat, norms);
            }
            cur[d] += 1;
            if cur[d] <= k {
                break;
            }
            cur[d] = -k;
            d += 1;
        }
    }
}

/// Points of the grid `center + pitch * Z^dim` inside the closed ball of
/// radius `radius`, nearest first.
pub(crate) fn ball_grid(center: &[f64], radius: f64, pitch: f64) -> Vec<Vec<f64>> {
    let k = (radius / pitch).floor() as i64;
    let (flat, norms) = sorted_offsets(center.len(), k);
    let dim = center.len();
    norms
        .iter()
        .enumerate()
        .filter(|(_, &n2)| (n2 as f64).sqrt() * pitch <= radius)
        .map(|(i, _)| {
            (0..dim)
                .map(|d| center[d] + pitch * flat[i * dim + d] as f64)
                .collect()
        })
        .collect()
}

/// Decides whether a range point `v` lies in `F(B(x, λ))`.
enum Coverage<'a> {
    /// Single-valued polynomial map: solve `F(u) = v` by damped Newton from
    /// the center, then from the seeds whose images are closest to `v`.
    Functional {
        map: &'a PolyMap,
        seeds: Vec<(Vec<f64>, Vec<f64>)>,
    },
    /// Any graph: scan a domain grid nearest-first, then refine from the
    /// least-violating grid point.
    Generic {
        graph: &'a CompiledFormula,
        grid: Vec<Vec<f64>>,
    },
}

const NEWTON_ITERS: usize = 25;
const FALLBACK_SEEDS: usize = 3;

struct Coverer<'a> {
    kind: Coverage<'a>,
    x: &'a [f64],
    lambda: f64,
    tol_eq: f64,
    refine_iters: usize,
}

impl Coverer<'_> {
    fn domain_size(&self) -> usize {
        match &self.kind {
            Coverage::Functional { seeds, .. } => seeds.len(),
            Coverage::Generic { grid, .. } => grid.len(),
        }
    }

    fn in_ball(&self, u: &[f64]) -> bool {
        dist(u, self.x) <= self.lambda * (1.0 + 1e-12)
    }

    fn newton(&self, map: &PolyMap, v: &[f64], start: &[f64]) -> bool {
        let (m, n) = (map.m(), map.n());
        let mut u = start.to_vec();
        for _ in 0..NEWTON_ITERS {
            let r: Vec<f64> = map.value(&u).iter().zip(v).map(|(a, b)| a - b).collect();
            if r.iter().all(|e| e.abs() <= self.tol_eq) {
                return self.in_ball(&u);
            }
            if dist(&u, self.x) > 4.0 * self.lambda {
                return false;
            }
            let jac = map.jacobian_unchecked(&u);
            let Some(step) = min_norm_step(jac.as_slice(), &r, m, n, 1e-14) else {
                return false;
            };
            for (a, s) in u.iter_mut().zip(&step) {
                *a -= s;
            }
        }
        false
    }

    fn covers(&self, v: &[f64]) -> bool {
        match &self.kind {
            Coverage::Functional { map, seeds } => {
                if self.newton(map, v, self.x) {
                    return true;
                }
                let mut ranked: Vec<(f64, usize)> = seeds
                    .iter()
                    .enumerate()
                    .map(|(i, (_, img))| (dist(img, v), i))
                    .collect();
                let k = FALLBACK_SEEDS.min(ranked.len());
                if k == 0 {
                    return false;
                }
                ranked.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
                ranked[..k].sort_by(|a, b| a.partial_cmp(b).unwrap());
                ranked[..k].iter().any(|&(_, i)| self.newton(map, v, &seeds[i].0))
            }
            Coverage::Generic { graph, grid } => {
                let n = self.x.len();
                let mut z: Vec<f64> = self.x.iter().chain(v).copied().collect();
                let mut best = (f64::INFINITY, 0usize);
                for (i, u) in grid.iter().enumerate() {
                    z[..n].copy_from_slice(u);
                    let viol = graph.violation(&z, self.tol_eq);
                    if viol == 0.0 {
                        return true;
                    }
                    if viol < best.0 {
                        best = (viol, i);
                    }
                }
                if grid.is_empty() || self.refine_iters == 0 {
                    return false;
                }
                z[..n].copy_from_slice(&grid[best.1]);
                let (x, lambda) = (self.x, self.lambda);
                let project = |z: &mut [f64]| {
                    let d = dist(&z[..n], x);
                    if d > lambda {
                        for (a, c) in z[..n].iter_mut().zip(x) {
                            *a = c + (*a - c) * lambda / d;
                        }
                    }
                };
                graph.refine(&mut z, 0..n, self.tol_eq, self.refine_iters, &project)
                    && self.in_ball(&z[..n])
            }
        }
    }
}

/// Memoized scan of the range grid around `y` in order of distance.
///
/// `accept(r)` answers "is every grid point of `B(y, r)` covered?". Points
/// are decided at most once; the first uncovered distance answers every
/// later query at or beyond it.
struct RangeScan<'a> {
    y: &'a [f64],
    pitch: f64,
    k: i64,
    offsets: Vec<i32>,
    norms2: Vec<i64>,
    cursor: usize,
    first_fail: Option<f64>,
    decided: usize,
}

impl<'a> RangeScan<'a> {
    fn new(y: &'a [f64], pitch: f64) -> Self {
        Self {
            y,
            pitch,
            k: -1,
            offsets: Vec::new(),
            norms2: Vec::new(),
            cursor: 0,
            first_fail: None,
            decided: 0,
        }
    }

    fn ensure(&mut self, r: f64) {
        let need = (r / self.pitch).floor() as i64;
        if need > self.k {
            let k = need.max(2 * self.k).max(4);
            let (offsets, norms2) = sorted_offsets(self.y.len(), k);
            self.offsets = offsets;
            self.norms2 = norms2;
            self.k = k;
        }
    }

    /// Distance of the farthest grid point decided as covered.
    fn last_covered(&self) -> f64 {
        match self.cursor {
            0 => 0.0,
            c => (self.norms2[c - 1] as f64).sqrt() * self.pitch,
        }
    }

    fn accept(&mut self, r: f64, cover: &Coverer<'_>) -> bool {
        if let Some(f) = self.first_fail {
            if f <= r {
                return false;
            }
        }
        self.ensure(r);
        let m = self.y.len();
        let mut v = vec![0.0; m];
        while self.cursor < self.norms2.len() {
            let d = (self.norms2[self.cursor] as f64).sqrt() * self.pitch;
            if d > r {
                break;
            }
            for (j, vj) in v.iter_mut().enumerate() {
                *vj = self.y[j] + self.pitch * self.offsets[self.cursor * m + j] as f64;
            }
            self.decided += 1;
            if cover.covers(&v) {
                self.cursor += 1;
            } else {
                self.first_fail = Some(d);
                return false;
            }
        }
        true
    }
}

/// [`modulus_with`] under default options.
pub fn modulus_of_surjection(
    spec: &MapSpec,
    q: &ModulusQuery,
    resolution: f64,
) -> Result<ModulusBracket> {
    modulus_with(spec, q, resolution, &ModulusOptions::default())
}

/// Brackets `Sur F(x, y)(λ)`.
///
/// A radius `r` is accepted when every point of the pitch-`resolution`
/// grid on `B(y, r)` has a preimage in `B(x, λ)`: found among the points of
/// a domain grid on `B(x, λ)` (same pitch, coarsened only by the size cap
/// and, for graphs with equality atoms, to `λ/8` since every candidate is
/// refined anyway), or by one local refinement pass from the best of them.
/// Grid points are decided nearest-first, out to radii doubling from `λ`,
/// until one is uncovered or the ceiling (`ratio_cap * λ`, at most the
/// range diameter) is reached. `r_lo` is the distance of the farthest
/// covered grid point before the first uncovered one, and `r_hi` that
/// first uncovered distance plus `resolution`.
pub fn modulus_with(
    spec: &MapSpec,
    q: &ModulusQuery,
    resolution: f64,
    opts: &ModulusOptions,
) -> Result<ModulusBracket> {
    check_dim(spec.n(), q.x.len())?;
    check_dim(spec.m(), q.y.len())?;
    if !(q.lambda > 0.0 && q.lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {}", q.lambda)));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let r_max = opts.r_max.unwrap_or_else(|| spec.range_diameter());
    if resolution > r_max {
        return Err(Error::InvalidInput(format!(
            "resolution {resolution} exceeds the search range {r_max}: the range grid is empty"
        )));
    }
    let ceiling = opts.ratio_cap.map_or(r_max, |c| (c * q.lambda).min(r_max));
    let n = spec.n();
    let cap_pitch = 2.0 * q.lambda / (opts.max_domain_points as f64).powf(1.0 / n as f64);

    let kind = match spec.functional() {
        Some(map) => {
            let seeds = ball_grid(&q.x, q.lambda, q.lambda / 4.0)
                .into_iter()
                .map(|u| {
                    let img = map.value(&u);
                    (u, img)
                })
                .collect();
            Coverage::Functional { map, seeds }
        }
        None => {
            let graph = spec.compiled();
            let mut pitch = resolution.max(cap_pitch);
            if graph.has_eq() {
                pitch = pitch.max(q.lambda / 8.0);
            }
            Coverage::Generic {
                graph,
                grid: ball_grid(&q.x, q.lambda, pitch),
            }
        }
    };
    let cover = Coverer {
        kind,
        x: &q.x,
        lambda: q.lambda,
        tol_eq: opts.tol_eq,
        refine_iters: opts.refine_iters,
    };
    let mut scan = RangeScan::new(&q.y, resolution);
    let mut r = q.lambda.min(ceiling).max(resolution.min(ceiling));
    while scan.accept(r, &cover) {
        if r >= ceiling {
            break;
        }
        r = (2.0 * r).min(ceiling);
    }
    let covered = scan.last_covered();
    let (r_hi, saturated) = match scan.first_fail {
        Some(f) => (f + resolution, false),
        None => (ceiling + resolution, true),
    };
    Ok(ModulusBracket {
        r_lo: if saturated { ceiling } else { covered },
        r_hi,
        resolution,
        samples_range: scan.decided,
        samples_domain: cover.domain_size(),
        saturated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn offsets_are_sorted_and_nested() {
        let (small, n_small) = sorted_offsets(2, 3);
        let (big, n_big) = sorted_offsets(2, 6);
        assert!(n_big.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(&big[..small.len()], &small[..]);
        assert_eq!(&n_big[..n_small.len()], &n_small[..]);
        assert_eq!(n_small.len(), 29); // lattice points in the radius-3 disk
    }

    #[test]
    fn identity_bracket_contains_lambda() {
        let spec = catalog::identity(1);
        let q = ModulusQuery::new(vec![0.0], vec![0.0], 0.25);
        let b = modulus_of_surjection(&spec, &q, 0.25 / 512.0).unwrap();
        assert!(b.r_lo <= 0.25 && 0.25 <= b.r_hi, "{b:?}");
        assert!(b.r_hi - b.r_lo < 0.002);
    }

    #[test]
    fn doubling_bracket_contains_twice_lambda() {
        let spec = catalog::scaled_line(2.0);
        let q = ModulusQuery::new(vec![0.0], vec![0.0], 0.25);
        let b = modulus_of_surjection(&spec, &q, 0.25 / 512.0).unwrap();
        assert!(b.r_lo <= 0.5 && 0.5 <= b.r_hi, "{b:?}");
    }

    #[test]
    fn punctured_cone_bracket() {
        // F(B(0.5, 0.1)) = {v : 0 < |v| < 0.6}; the largest ball about 0.25
        // inside it has radius 0.25.
        let spec = catalog::punctured_cone();
        let q = ModulusQuery::new(vec![0.5], vec![0.25], 0.1);
        let b = modulus_of_surjection(&spec, &q, 1e-3).unwrap();
        assert!(b.r_lo <= 0.25 + 1e-12 && 0.25 <= b.r_hi, "{b:?}");
    }

    #[test]
    fn uncovered_center_gives_zero() {
        let spec = catalog::punctured_cone();
        let q = ModulusQuery::new(vec![0.5], vec![0.0], 0.1);
        let b = modulus_of_surjection(&spec, &q, 1e-3).unwrap();
        assert_eq!(b.r_lo, 0.0);
        assert_eq!(b.r_hi, 1e-3);
    }

    #[test]
    fn diagonal_map_in_the_plane() {
        let spec = catalog::diagonal(&[2.0, 3.0]);
        let q = ModulusQuery::new(vec![0.0, 0.0], vec![0.0, 0.0], 0.1);
        let b = modulus_of_surjection(&spec, &q, 0.1 / 64.0).unwrap();
        assert!(b.r_lo <= 0.2 + 1e-12 && 0.2 <= b.r_hi, "{b:?}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let spec = catalog::identity(1);
        let q = ModulusQuery::new(vec![0.0], vec![0.0], 0.0);
        assert!(modulus_of_surjection(&spec, &q, 0.01).is_err());
        let q = ModulusQuery::new(vec![0.0], vec![0.0], 0.1);
        assert!(modulus_of_surjection(&spec, &q, -1.0).is_err());
        assert!(matches!(
            modulus_of_surjection(&spec, &q, 1e6),
            Err(Error::InvalidInput(msg)) if msg.contains("empty")
        ));
    }

    #[test]
    fn halving_the_pitch_never_raises_r_hi_for_functional_maps() {
        let spec = catalog::diagonal(&[2.0, 3.0]);
        let q = ModulusQuery::new(vec![0.1, -0.2], vec![0.2, -0.6], 0.05);
        let coarse = modulus_of_surjection(&spec, &q, 0.05 / 16.0).unwrap();
        let fine = modulus_of_surjection(&spec, &q, 0.05 / 32.0).unwrap();
        assert!(fine.r_hi <= coarse.r_hi, "{coarse:?} {fine:?}");
    }

    #[test]
    fn ratio_cap_saturates() {
        let spec = catalog::scaled_line(10.0);
        let q = ModulusQuery::new(vec![0.0], vec![0.0], 0.01);
        let opts = ModulusOptions {
            ratio_cap: Some(2.0),
            ..Default::default()
        };
        let b = modulus_with(&spec, &q, 1e-4, &opts).unwrap();
        assert!(b.saturated);
        assert!((b.r_lo - 0.02).abs() < 1e-15);
    }
}
