//! Polynomials, semialgebraic formulas, set-valued maps given by their
//! graphs, and seeded sampling of those graphs.

mod formula;
mod mapspec;
mod polynomial;
mod sampling;
mod spec_file;

pub use formula::{Atom, CompiledFormula, Formula, Node, Relation};
pub use mapspec::{GraphPoint, MapSpec, PolyMap};
pub use polynomial::{Polynomial, Term};
pub use sampling::{sample_graph, sample_graph_with, SamplerConfig};
pub use spec_file::{load_spec, parse_polynomial, parse_spec, spec_to_json, PolyJson, SpecFile};

pub(crate) use sampling::{dist, norm, sample_region, Region};

use crate::error::Result;
use crate::linalg::Matrix;

/// Checked polynomial evaluation.
pub fn eval_polynomial(p: &Polynomial, point: &[f64]) -> Result<f64> {
    p.eval(point)
}

/// Exact partial derivative.
pub fn differentiate_polynomial(p: &Polynomial, var: usize) -> Result<Polynomial> {
    p.derivative(var)
}

/// Graph membership with equality tolerance `tol_eq`.
pub fn membership(f: &Formula, point: &[f64], tol_eq: f64) -> Result<bool> {
    f.membership(point, tol_eq)
}

/// Jacobian of a polynomial map.
pub fn jacobian(f: &PolyMap, x: &[f64]) -> Result<Matrix> {
    f.jacobian(x)
}
