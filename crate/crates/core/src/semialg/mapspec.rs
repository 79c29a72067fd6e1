use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;

use super::formula::{CompiledFormula, Formula, Relation};
use super::polynomial::Polynomial;

/// A single-valued polynomial map `F = (F^1, ..., F^m)` on `R^n`, with its
/// first partials precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    n: usize,
    components: Vec<Polynomial>,
    /// `partials[i * n + j] = dF^i / dx_j`.
    partials: Vec<Polynomial>,
}

impl PolyMap {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let n = components
            .first()
            .ok_or_else(|| Error::InvalidInput("polynomial map needs a component".into()))?
            .num_vars();
        for c in &components {
            check_dim(n, c.num_vars())?;
        }
        let partials = components.iter().flat_map(Polynomial::gradient).collect();
        Ok(Self {
            n,
            components,
            partials,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(&Matrix::identity(n))
    }

    /// `x -> A x`.
    pub fn linear(a: &Matrix) -> Self {
        let comps = (0..a.rows())
            .map(|i| Polynomial::affine(0.0, a.row(i)))
            .collect();
        Self::new(comps).expect("rows share a width")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        Ok(self.value(x))
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }

    /// The `m x n` Jacobian at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        check_dim(self.n, x.len())?;
        Ok(self.jacobian_unchecked(x))
    }

    pub(crate) fn jacobian_unchecked(&self, x: &[f64]) -> Matrix {
        let data = self.partials.iter().map(|p| p.value(x)).collect();
        Matrix::from_row_major(self.m(), self.n, data)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        check_dim(self.n, inner.m())?;
        let comps = self
            .components
            .iter()
            .map(|c| c.substitute(&inner.components))
            .collect::<Result<_>>()?;
        PolyMap::new(comps)
    }

    /// `x -> F(x) + A x`.
    pub fn add_linear(&self, a: &Matrix) -> Result<PolyMap> {
        check_dim(self.m(), a.rows())?;
        check_dim(self.n, a.cols())?;
        let comps = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| c + &Polynomial::affine(0.0, a.row(i)))
            .collect();
        PolyMap::new(comps)
    }

    /// The graph `{(x, y): y_i - F^i(x) = 0}` over `n + m` variables.
    pub fn graph_formula(&self) -> Formula {
        let total = self.n + self.m();
        let atoms = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| Formula::eq(Polynomial::var(total, self.n + i) - c.embed(total, 0)))
            .collect();
        Formula::and(atoms).expect("at least one component")
    }
}

/// A point `(x, y)` of a graph.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GraphPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GraphPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    pub fn split(z: &[f64], n: usize) -> Self {
        Self {
            x: z[..n].to_vec(),
            y: z[n..].to_vec(),
        }
    }

    pub fn concat(&self) -> Vec<f64> {
        let mut z = self.x.clone();
        z.extend_from_slice(&self.y);
        z
    }
}

/// A set-valued mapping `F: R^n ⇉ R^m` given by a semialgebraic graph over
/// `(x, y)`, together with an axis-aligned sampling box in `R^(n+m)`.
///
/// Maps built from a [`PolyMap`] remember it; the estimators use it for
/// exact Jacobians and preimage solves.
#[derive(Clone, Debug)]
pub struct MapSpec {
    name: String,
    n: usize,
    m: usize,
    graph: Formula,
    compiled: CompiledFormula,
    bbox: Vec<(f64, f64)>,
    functional: Option<PolyMap>,
}

impl MapSpec {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        m: usize,
        graph: Formula,
        bbox: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("dimensions must be positive".into()));
        }
        check_dim(n + m, graph.num_vars())?;
        check_dim(n + m, bbox.len())?;
        validate_box(&bbox)?;
        let compiled = graph.compile();
        Ok(Self {
            name: name.into(),
            n,
            m,
            graph,
            compiled,
            bbox,
            functional: None,
        })
    }

    pub fn from_poly_map(
        name: impl Into<String>,
        map: PolyMap,
        bbox: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let mut spec = Self::new(name, map.n(), map.m(), map.graph_formula(), bbox)?;
        spec.functional = Some(map);
        Ok(spec)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn graph(&self) -> &Formula {
        &self.graph
    }

    pub fn compiled(&self) -> &CompiledFormula {
        &self.compiled
    }

    pub fn bbox(&self) -> &[(f64, f64)] {
        &self.bbox
    }

    pub fn domain_box(&self) -> &[(f64, f64)] {
        &self.bbox[..self.n]
    }

    pub fn range_box(&self) -> &[(f64, f64)] {
        &self.bbox[self.n..]
    }

    /// Euclidean diameter of the range part of the box.
    pub fn range_diameter(&self) -> f64 {
        self.range_box()
            .iter()
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    pub fn functional(&self) -> Option<&PolyMap> {
        self.functional.as_ref()
    }

    pub fn with_box(&self, bbox: Vec<(f64, f64)>) -> Result<Self> {
        check_dim(self.n + self.m, bbox.len())?;
        validate_box(&bbox)?;
        let mut out = self.clone();
        out.bbox = bbox;
        Ok(out)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Membership of `(x, y)` in the graph.
    pub fn contains(&self, x: &[f64], y: &[f64], tol_eq: f64) -> Result<bool> {
        check_dim(self.n, x.len())?;
        check_dim(self.m, y.len())?;
        let mut z = x.to_vec();
        z.extend_from_slice(y);
        Ok(self.compiled.contains(&z, tol_eq))
    }

    /// When the graph is a conjunction of exactly `m` equalities
    /// `P(x, y) = 0`, returns `P`.
    pub fn implicit_system(&self) -> Option<Vec<&Polynomial>> {
        let atoms = self.graph.conjunction_atoms()?;
        if atoms.len() != self.m || atoms.iter().any(|a| a.relation != Relation::Eq) {
            return None;
        }
        Some(atoms.into_iter().map(|a| &a.poly).collect())
    }

    /// The graph of `x -> F(x) + A x`: `(x, y)` is in it iff
    /// `(x, y - A x)` is in the graph of `F`.
    pub fn add_linear(&self, a: &Matrix) -> Result<MapSpec> {
        check_dim(self.m, a.rows())?;
        check_dim(self.n, a.cols())?;
        let name = format!("{}+A", self.name);
        if let Some(f) = &self.functional {
            let map = f.add_linear(a)?;
            let bbox = shifted_range_box(self, &map);
            return MapSpec::from_poly_map(name, map, bbox);
        }
        let total = self.n + self.m;
        let mut subs: Vec<Polynomial> = (0..self.n).map(|j| Polynomial::var(total, j)).collect();
        for i in 0..self.m {
            let mut coeffs = vec![0.0; total];
            for j in 0..self.n {
                coeffs[j] = -a[(i, j)];
            }
            coeffs[self.n + i] = 1.0;
            subs.push(Polynomial::affine(0.0, &coeffs));
        }
        let graph = self.graph.substitute(&subs)?;
        let spread = a.frobenius()
            * self
                .domain_box()
                .iter()
                .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
                .sum::<f64>()
                .sqrt();
        let mut bbox = self.bbox.clone();
        for b in &mut bbox[self.n..] {
            *b = (b.0 - spread, b.1 + spread);
        }
        MapSpec::new(name, self.n, self.m, graph, bbox)
    }

    /// The graph of `x -> F(g(x))` for a polynomial `g: R^k -> R^n`, obtained
    /// by substituting `g` for the domain variables. `domain` is the new
    /// domain box.
    pub fn precompose(&self, g: &PolyMap, domain: Vec<(f64, f64)>) -> Result<MapSpec> {
        check_dim(self.n, g.m())?;
        check_dim(g.n(), domain.len())?;
        let name = format!("{}∘g", self.name);
        let mut bbox = domain;
        bbox.extend_from_slice(self.range_box());
        if let Some(f) = &self.functional {
            return MapSpec::from_poly_map(name, f.compose(g)?, bbox);
        }
        let k = g.n();
        let total = k + self.m;
        let mut subs: Vec<Polynomial> = g.components().iter().map(|c| c.embed(total, 0)).collect();
        subs.extend((0..self.m).map(|i| Polynomial::var(total, k + i)));
        let graph = self.graph.substitute(&subs)?;
        MapSpec::new(name, k, self.m, graph, bbox)
    }
}

fn validate_box(bbox: &[(f64, f64)]) -> Result<()> {
    for (i, (lo, hi)) in bbox.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidInput(format!(
                "box side {i} must have positive length, got [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

/// Range box for a functional map: the old one widened to hold the image
/// of the domain box's corners.
fn shifted_range_box(spec: &MapSpec, map: &PolyMap) -> Vec<(f64, f64)> {
    let dom = spec.domain_box();
    let mut range: Vec<(f64, f64)> = spec.range_box().to_vec();
    let corners = 1usize << dom.len();
    for mask in 0..corners {
        let x: Vec<f64> = dom
            .iter()
            .enumerate()
            .map(|(j, (lo, hi))| if mask >> j & 1 == 1 { *hi } else { *lo })
            .collect();
        for (r, v) in range.iter_mut().zip(map.value(&x)) {
            r.0 = r.0.min(v - 0.5);
            r.1 = r.1.max(v + 0.5);
        }
    }
    let mut bbox = dom.to_vec();
    bbox.extend(range);
    bbox
}
