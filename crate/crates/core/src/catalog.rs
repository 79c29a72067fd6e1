//! Bundled example maps.
//!
//! [`poly_catalog`] lists the polynomial maps used by the consistency and
//! Sard checks; the remaining constructors build the worked examples
//! (the punctured cone, the map with a proper critical value at the origin,
//! the implicit bump) and small linear maps.

use crate::linalg::Matrix;
use crate::semialg::{Formula, MapSpec, PolyMap, Polynomial};

fn var(n: usize, i: usize) -> Polynomial {
    Polynomial::var(n, i)
}

fn spec(name: &str, map: PolyMap, bbox: Vec<(f64, f64)>) -> MapSpec {
    MapSpec::from_poly_map(name, map, bbox).expect("catalog map is well-formed")
}

fn padded(dom: &[(f64, f64)], range: &[(f64, f64)]) -> Vec<(f64, f64)> {
    dom.iter().chain(range).copied().collect()
}

pub fn identity(n: usize) -> MapSpec {
    spec("identity", PolyMap::identity(n), vec![(-1.0, 1.0); 2 * n])
}

/// `x -> c x` on `[-1, 1]`.
pub fn scaled_line(c: f64) -> MapSpec {
    let r = c.abs() + 1.0;
    let map = PolyMap::linear(&Matrix::diag(&[c]));
    spec("scaled-line", map, vec![(-1.0, 1.0), (-r, r)])
}

/// `x -> diag(d) x` on `[-1, 1]^n`.
pub fn diagonal(d: &[f64]) -> MapSpec {
    linear(&Matrix::diag(d))
}

/// `x -> A x` on `[-1, 1]^n`.
pub fn linear(a: &Matrix) -> MapSpec {
    let reach: f64 = (0..a.rows())
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let dom = vec![(-1.0, 1.0); a.cols()];
    let range = vec![(-reach, reach); a.rows()];
    spec("linear", PolyMap::linear(a), padded(&dom, &range))
}

/// `F(x) = {y : 0 < |y| < |x|}` on `R`.
pub fn punctured_cone() -> MapSpec {
    let (x, y) = (var(2, 0), var(2, 1));
    let graph = Formula::and(vec![Formula::gt(y.pow(2)), Formula::lt(y.pow(2) - x.pow(2))])
        .expect("same arity");
    MapSpec::new("punctured-cone", 1, 1, graph, vec![(-1.0, 1.0); 2]).expect("well-formed")
}

/// `F: R^2 ⇉ R^2` with `F(0) = {0}` and, for `x ≠ 0`, `F(x)` the open
/// ball of radius `|x|` minus the first coordinate axis. Zero is a
/// critical value attained at the graph point `(0, 0)`.
pub fn remark_map() -> MapSpec {
    let v = |i| var(4, i);
    let origin = Formula::and((0..4).map(|i| Formula::eq(v(i))).collect()).expect("same arity");
    let ball = Formula::lt(v(2).pow(2) + v(3).pow(2) - v(0).pow(2) - v(1).pow(2));
    let off_axis = Formula::gt(v(3).pow(2));
    let rest = Formula::and(vec![ball, off_axis]).expect("same arity");
    let graph = Formula::or(vec![origin, rest]).expect("same arity");
    MapSpec::new("remark", 2, 2, graph, vec![(-1.0, 1.0); 4]).expect("well-formed")
}

/// The graph `y (1 + x^2) - 1 = 0` of `x -> 1 / (1 + x^2)`, as an implicit
/// (non-functional) spec.
pub fn implicit_bump() -> MapSpec {
    let (x, y) = (var(2, 0), var(2, 1));
    let p = y * (Polynomial::constant(2, 1.0) + x.pow(2)) - Polynomial::constant(2, 1.0);
    MapSpec::new("bump", 1, 1, Formula::eq(p), vec![(-4.0, 4.0), (-0.25, 1.25)]).expect("well-formed")
}

pub fn square() -> MapSpec {
    let map = PolyMap::new(vec![var(1, 0).pow(2)]).expect("one component");
    spec("square", map, vec![(-1.0, 1.0), (-0.25, 1.25)])
}

/// `x1^2 + x2^2`.
pub fn paraboloid() -> MapSpec {
    let map = PolyMap::new(vec![var(2, 0).pow(2) + var(2, 1).pow(2)]).expect("one component");
    spec("paraboloid", map, vec![(-1.0, 1.0), (-1.0, 1.0), (-0.25, 2.25)])
}

/// `(x1^2 + x2^2 - 1)^2`; critical on the origin and the unit circle.
pub fn circle_squared() -> MapSpec {
    let r2 = var(2, 0).pow(2) + var(2, 1).pow(2) - Polynomial::constant(2, 1.0);
    let map = PolyMap::new(vec![r2.pow(2)]).expect("one component");
    spec("circle-squared", map, vec![(-1.1, 1.1), (-1.1, 1.1), (-0.25, 2.25)])
}

/// `x^3 - 3x` on `[-2, 2]`.
pub fn cubic() -> MapSpec {
    let x = var(1, 0);
    let map = PolyMap::new(vec![x.pow(3) - x.scale(3.0)]).expect("one component");
    spec("cubic", map, vec![(-2.0, 2.0), (-2.5, 2.5)])
}

/// The fold `(x1, x2^2)`.
pub fn fold() -> MapSpec {
    let map = PolyMap::new(vec![var(2, 0), var(2, 1).pow(2)]).expect("two components");
    spec("fold", map, vec![(-1.0, 1.0), (-1.0, 1.0), (-1.25, 1.25), (-0.25, 1.25)])
}

/// `z -> z^2` on `C = R^2`.
pub fn complex_square() -> MapSpec {
    let (a, b) = (var(2, 0), var(2, 1));
    let map = PolyMap::new(vec![a.pow(2) - b.pow(2), (a * b).scale(2.0)]).expect("two components");
    spec("complex-square", map, vec![(-1.0, 1.0), (-1.0, 1.0), (-1.25, 1.25), (-2.25, 2.25)])
}

/// `(|x|^2, x3)` on `R^3`; singular along the `x3` axis.
pub fn sphere_height() -> MapSpec {
    let v = |i| var(3, i);
    let map = PolyMap::new(vec![v(0).pow(2) + v(1).pow(2) + v(2).pow(2), v(2)]).expect("two components");
    let mut bbox = vec![(-1.0, 1.0); 3];
    bbox.extend([(-0.25, 3.25), (-1.25, 1.25)]);
    spec("sphere-height", map, bbox)
}

/// The six polynomial maps of the regularity and Sard checks.
pub fn poly_catalog() -> Vec<MapSpec> {
    vec![
        square(),
        paraboloid(),
        circle_squared(),
        fold(),
        complex_square(),
        sphere_height(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_dimensions() {
        let dims: Vec<(usize, usize)> = poly_catalog().iter().map(|s| (s.n(), s.m())).collect();
        assert_eq!(dims, vec![(1, 1), (2, 1), (2, 1), (2, 2), (2, 2), (3, 2)]);
    }

    #[test]
    fn example_memberships() {
        let cone = punctured_cone();
        assert!(cone.contains(&[1.0], &[0.5], 1e-9).unwrap());
        assert!(!cone.contains(&[1.0], &[0.0], 1e-9).unwrap());
        let remark = remark_map();
        assert!(remark.contains(&[0.0, 0.0], &[0.0, 0.0], 1e-9).unwrap());
        assert!(!remark.contains(&[0.5, 0.0], &[0.1, 0.0], 1e-9).unwrap());
        assert!(remark.contains(&[0.5, 0.0], &[0.1, 0.1], 1e-9).unwrap());
        assert!(implicit_bump().contains(&[1.0], &[0.5], 1e-12).unwrap());
    }
}
