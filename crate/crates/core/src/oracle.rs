//! Brute-force references for cross-checking the estimators on small
//! instances. Nothing here searches or refines cleverly: every quantity is
//! read off a dense grid or a large seeded sample.

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;
use crate::regularity::{ball_grid, ModulusQuery};
use crate::rng::{self, domain};
use crate::semialg::{dist, Formula, MapSpec, Node, Polynomial, Relation};

enum ONode {
    Atom {
        poly: Polynomial,
        grad: Vec<Polynomial>,
        relation: Relation,
    },
    And(Vec<ONode>),
    Or(Vec<ONode>),
    Not(Box<ONode>),
}

/// Membership at grid points, with each equality atom widened to the
/// values `p` takes over half a domain cell to first order:
/// `|p| <= pitch/2 * sum_i |∂p/∂x_i|`, `i` over the domain variables only
/// since range points are tested exactly.
struct Rasterizer {
    root: ONode,
    half: f64,
}

impl Rasterizer {
    fn new(f: &Formula, n: usize, pitch: f64) -> Self {
        fn build(node: &Node, n: usize) -> ONode {
            match node {
                Node::Atom(a) => ONode::Atom {
                    poly: a.poly.clone(),
                    grad: a.poly.gradient().into_iter().take(n).collect(),
                    relation: a.relation,
                },
                Node::And(c) => ONode::And(c.iter().map(|k| build(k, n)).collect()),
                Node::Or(c) => ONode::Or(c.iter().map(|k| build(k, n)).collect()),
                Node::Not(c) => ONode::Not(Box::new(build(c, n))),
            }
        }
        Self {
            root: build(f.root(), n),
            half: 0.5 * pitch,
        }
    }

    fn eval(&self, n: &ONode, z: &[f64]) -> bool {
        match n {
            ONode::Atom { poly, grad, relation } => {
                let v = poly.value(z);
                match relation {
                    Relation::Lt => v < 0.0,
                    Relation::Le => v <= 0.0,
                    Relation::Eq => {
                        let width: f64 = grad.iter().map(|g| g.value(z).abs()).sum();
                        v.abs() <= self.half * width * (1.0 + 1e-9) + 1e-15
                    }
                }
            }
            ONode::And(c) => c.iter().all(|k| self.eval(k, z)),
            ONode::Or(c) => c.iter().any(|k| self.eval(k, z)),
            ONode::Not(c) => !self.eval(c, z),
        }
    }

    fn contains(&self, z: &[f64]) -> bool {
        self.eval(&self.root, z)
    }
}

fn guard(spec: &MapSpec) -> Result<()> {
    if spec.n() + spec.m() > 3 {
        return Err(Error::CostGuard(format!(
            "dense oracles need n + m <= 3, got {}",
            spec.n() + spec.m()
        )));
    }
    Ok(())
}

/// Occupancy of a box grid: cell `i` holds the graph membership of its
/// center.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterGrid {
    pub dims: Vec<usize>,
    pub pitch: f64,
    pub origin: Vec<f64>,
    pub occupancy: Vec<bool>,
}

impl RasterGrid {
    pub fn center(&self, index: usize) -> Vec<f64> {
        let mut rest = index;
        let mut c = vec![0.0; self.dims.len()];
        for d in (0..self.dims.len()).rev() {
            let i = rest % self.dims[d];
            rest /= self.dims[d];
            c[d] = self.origin[d] + (i as f64 + 0.5) * self.pitch;
        }
        c
    }
}

const MAX_CELLS: usize = 20_000_000;

/// Rasterizes the graph over the spec's box.
pub fn rasterize(spec: &MapSpec, pitch: f64) -> Result<RasterGrid> {
    guard(spec)?;
    if !(pitch > 0.0) {
        return Err(Error::InvalidInput("pitch must be positive".into()));
    }
    let dims: Vec<usize> = spec
        .bbox()
        .iter()
        .map(|(lo, hi)| ((hi - lo) / pitch).ceil() as usize)
        .collect();
    let cells: usize = dims.iter().product();
    if cells > MAX_CELLS {
        return Err(Error::CostGuard(format!("{cells} cells exceed {MAX_CELLS}")));
    }
    let raster = Rasterizer::new(spec.graph(), spec.n(), pitch);
    let mut grid = RasterGrid {
        dims,
        pitch,
        origin: spec.bbox().iter().map(|b| b.0).collect(),
        occupancy: Vec::new(),
    };
    let slab = grid.dims[1..].iter().product::<usize>().max(1);
    grid.occupancy = (0..grid.dims[0])
        .into_par_iter()
        .flat_map_iter(|s| {
            let g = &grid;
            let r = &raster;
            (s * slab..(s + 1) * slab).map(move |i| r.contains(&g.center(i)))
        })
        .collect();
    Ok(grid)
}

/// `Sur F(x, y)(λ)` read off the rasterized image of `B(x, λ)`: the
/// distance from `y` of the nearest grid point `v` (pitch `pitch`, anchored
/// at `y`) with no grid point `u` of `B(x, λ)` such that `(u, v)` is in the
/// rasterized graph.
pub fn dense_modulus(spec: &MapSpec, q: &ModulusQuery, pitch: f64) -> Result<f64> {
    guard(spec)?;
    check_dim(spec.n(), q.x.len())?;
    check_dim(spec.m(), q.y.len())?;
    if !(pitch > 0.0 && q.lambda > 0.0) {
        return Err(Error::InvalidInput("pitch and lambda must be positive".into()));
    }
    let raster = Rasterizer::new(spec.graph(), spec.n(), pitch);
    let us = ball_grid(&q.x, q.lambda, pitch);
    let n = spec.n();
    let reach = spec.range_diameter();
    for v in ball_grid(&q.y, reach, pitch) {
        let mut z: Vec<f64> = q.x.iter().chain(&v).copied().collect();
        let covered = us.iter().any(|u| {
            z[..n].copy_from_slice(u);
            raster.contains(&z)
        });
        if !covered {
            return Ok(dist(&v, &q.y));
        }
    }
    Ok(reach)
}

/// `inf_{|y| = 1} |A^T y|` from `samples` seeded unit vectors, the best
/// of which is then improved by coordinate moves of shrinking size.
pub fn dense_min_singular(a: &Matrix, samples: usize, seed: u64) -> Result<f64> {
    let m = a.rows();
    if m > 3 || m == 0 {
        return Err(Error::CostGuard(format!("dense singular values need 1 <= m <= 3, got {m}")));
    }
    let at = a.transpose();
    let value = |y: &[f64]| at.mul_vec(y).iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mut best_y, mut best) = (0..samples.max(1))
        .into_par_iter()
        .map(|i| {
            let mut s = rng::stream(seed, domain::ORACLE, i as u64);
            let y = rng::unit_vector(&mut s, m);
            let v = value(&y);
            (y, v)
        })
        .reduce_with(|p, q| if q.1 < p.1 { q } else { p })
        .expect("at least one sample");
    let mut step = 1e-2;
    while step > 1e-12 {
        let mut improved = true;
        while improved {
            improved = false;
            for d in 0..m {
                for sign in [1.0, -1.0] {
                    let mut y = best_y.clone();
                    y[d] += sign * step;
                    let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                    y.iter_mut().for_each(|v| *v /= nrm);
                    let v = value(&y);
                    if v < best {
                        best = v;
                        best_y = y;
                        improved = true;
                    }
                }
            }
        }
        step *= 0.5;
    }
    Ok(best)
}

/// Slope of `f` at `x` over every grid point of `B(x, radius)`.
pub fn dense_slope(f: &(dyn Fn(&[f64]) -> f64 + Sync), x: &[f64], radius: f64, pitch: f64) -> Result<f64> {
    if x.len() > 2 {
        return Err(Error::CostGuard(format!("dense slope needs n <= 2, got {}", x.len())));
    }
    if !(pitch > 0.0 && radius >= pitch) {
        return Err(Error::InvalidInput("need 0 < pitch <= radius".into()));
    }
    let fx = f(x);
    Ok(ball_grid(x, radius, pitch)
        .par_iter()
        .filter_map(|u| {
            let d = dist(u, x);
            (d > 0.0).then(|| (fx - f(u)).max(0.0) / d)
        })
        .reduce(|| 0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn modulus_examples() {
        let q = ModulusQuery::new(vec![0.0], vec![0.0], 0.25);
        let r = dense_modulus(&catalog::identity(1), &q, 1e-3).unwrap();
        assert!((r - 0.25).abs() <= 2e-3, "{r}");
        let q = ModulusQuery::new(vec![0.5], vec![0.25], 0.1);
        let r = dense_modulus(&catalog::punctured_cone(), &q, 1e-3).unwrap();
        assert!((r - 0.25).abs() <= 2e-3, "{r}");
        let q = ModulusQuery::new(vec![0.0], vec![0.0], 0.1);
        let r = dense_modulus(&catalog::scaled_line(2.0), &q, 1e-3).unwrap();
        assert!((r - 0.2).abs() <= 3e-3, "{r}");
        assert!(matches!(
            dense_modulus(&catalog::fold(), &ModulusQuery::new(vec![0.0; 2], vec![0.0; 2], 0.1), 1e-2),
            Err(Error::CostGuard(_))
        ));
    }

    #[test]
    fn singular_examples() {
        assert!((dense_min_singular(&Matrix::diag(&[2.0, 3.0]), 100_000, 0).unwrap() - 2.0).abs() < 1e-4);
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert!((dense_min_singular(&a, 100_000, 0).unwrap() - 2f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn slope_examples() {
        let neg_abs = |u: &[f64]| -u[0].abs();
        assert!((dense_slope(&neg_abs, &[0.0], 0.01, 1e-4).unwrap() - 1.0).abs() < 1e-12);
        let sq = |u: &[f64]| u[0] * u[0];
        assert_eq!(dense_slope(&sq, &[0.0], 0.01, 1e-4).unwrap(), 0.0);
        let lin = |u: &[f64]| 3.0 * u[0];
        assert!((dense_slope(&lin, &[0.2, 0.1], 0.01, 1e-3).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn raster_marks_the_cone() {
        let grid = rasterize(&catalog::punctured_cone(), 0.05).unwrap();
        assert_eq!(grid.occupancy.len(), 40 * 40);
        let inside = grid.occupancy.iter().filter(|b| **b).count();
        // The cone covers half the square.
        assert!((inside as f64 / 1600.0 - 0.5).abs() < 0.05, "{inside}");
    }
}
