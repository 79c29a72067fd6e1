use crate::error::{check_dim, Error, Result};
use crate::linalg::min_norm_step;

use super::polynomial::Polynomial;

/// Sign condition of an atom: `p < 0`, `p <= 0` or `p = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub poly: Polynomial,
    pub relation: Relation,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Atom(Atom),
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(Box<Node>),
}

/// A finite boolean combination of polynomial sign conditions over a fixed
/// number of variables.
///
/// `AND` of no children is true and `OR` of no children is false.
#[derive(Clone, Debug, PartialEq)]
pub struct Formula {
    num_vars: usize,
    root: Node,
}

impl Formula {
    pub fn atom(poly: Polynomial, relation: Relation) -> Self {
        Self {
            num_vars: poly.num_vars(),
            root: Node::Atom(Atom { poly, relation }),
        }
    }

    pub fn lt(p: Polynomial) -> Self {
        Self::atom(p, Relation::Lt)
    }

    pub fn le(p: Polynomial) -> Self {
        Self::atom(p, Relation::Le)
    }

    pub fn eq(p: Polynomial) -> Self {
        Self::atom(p, Relation::Eq)
    }

    /// `p > 0`, written as `-p < 0`.
    pub fn gt(p: Polynomial) -> Self {
        Self::lt(-p)
    }

    /// `p >= 0`, written as `-p <= 0`.
    pub fn ge(p: Polynomial) -> Self {
        Self::le(-p)
    }

    /// Always true: `0 <= 0`.
    pub fn truth(num_vars: usize) -> Self {
        Self::le(Polynomial::zero(num_vars))
    }

    /// Never true: `0 < 0`.
    pub fn falsity(num_vars: usize) -> Self {
        Self::lt(Polynomial::zero(num_vars))
    }

    pub fn and(children: Vec<Formula>) -> Result<Self> {
        let num_vars = Self::common_vars(&children)?;
        Ok(Self {
            num_vars,
            root: Node::And(children.into_iter().map(|f| f.root).collect()),
        })
    }

    pub fn or(children: Vec<Formula>) -> Result<Self> {
        let num_vars = Self::common_vars(&children)?;
        Ok(Self {
            num_vars,
            root: Node::Or(children.into_iter().map(|f| f.root).collect()),
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Self {
            num_vars: f.num_vars,
            root: Node::Not(Box::new(f.root)),
        }
    }

    fn common_vars(children: &[Formula]) -> Result<usize> {
        let first = children
            .first()
            .ok_or_else(|| Error::InvalidInput("boolean node with no children".into()))?
            .num_vars;
        for c in children {
            check_dim(first, c.num_vars)?;
        }
        Ok(first)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn has_eq(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Atom(a) => a.relation == Relation::Eq,
                Node::And(c) | Node::Or(c) => c.iter().any(walk),
                Node::Not(c) => walk(c),
            }
        }
        walk(&self.root)
    }

    /// Membership test. Equality atoms hold iff `|p| <= tol_eq`; strict and
    /// non-strict inequalities are evaluated exactly as computed.
    pub fn membership(&self, point: &[f64], tol_eq: f64) -> Result<bool> {
        check_dim(self.num_vars, point.len())?;
        Ok(self.contains(point, tol_eq))
    }

    /// [`Formula::membership`] without the dimension check.
    pub fn contains(&self, point: &[f64], tol_eq: f64) -> bool {
        fn walk(n: &Node, x: &[f64], tol: f64) -> bool {
            match n {
                Node::Atom(a) => {
                    let v = a.poly.value(x);
                    match a.relation {
                        Relation::Lt => v < 0.0,
                        Relation::Le => v <= 0.0,
                        Relation::Eq => v.abs() <= tol,
                    }
                }
                Node::And(c) => c.iter().all(|k| walk(k, x, tol)),
                Node::Or(c) => c.iter().any(|k| walk(k, x, tol)),
                Node::Not(c) => !walk(c, x, tol),
            }
        }
        walk(&self.root, point, tol_eq)
    }

    /// Replaces every polynomial `p(z)` by `p(subs(w))`. The result lives in
    /// the substitutes' variable space.
    pub fn substitute(&self, subs: &[Polynomial]) -> Result<Self> {
        check_dim(self.num_vars, subs.len())?;
        let target = subs
            .first()
            .map(Polynomial::num_vars)
            .ok_or_else(|| Error::InvalidInput("empty substitution".into()))?;
        fn walk(n: &Node, subs: &[Polynomial]) -> Result<Node> {
            Ok(match n {
                Node::Atom(a) => Node::Atom(Atom {
                    poly: a.poly.substitute(subs)?,
                    relation: a.relation,
                }),
                Node::And(c) => Node::And(c.iter().map(|k| walk(k, subs)).collect::<Result<_>>()?),
                Node::Or(c) => Node::Or(c.iter().map(|k| walk(k, subs)).collect::<Result<_>>()?),
                Node::Not(c) => Node::Not(Box::new(walk(c, subs)?)),
            })
        }
        Ok(Self {
            num_vars: target,
            root: walk(&self.root, subs)?,
        })
    }

    /// Flattened list of the atoms of a pure conjunction, or `None` when the
    /// formula has any OR or NOT node.
    pub fn conjunction_atoms(&self) -> Option<Vec<&Atom>> {
        fn walk<'a>(n: &'a Node, out: &mut Vec<&'a Atom>) -> bool {
            match n {
                Node::Atom(a) => {
                    out.push(a);
                    true
                }
                Node::And(c) => c.iter().all(|k| walk(k, out)),
                _ => false,
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out).then_some(out)
    }

    pub fn compile(&self) -> CompiledFormula {
        CompiledFormula::new(self)
    }
}

/// Sign conditions after pushing negations down to the atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sign {
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
    /// `|p| > tol_eq`, the negation of a thickened equality.
    Ne,
}

impl Sign {
    fn from_relation(r: Relation, negated: bool) -> Self {
        match (r, negated) {
            (Relation::Lt, false) => Sign::Lt,
            (Relation::Le, false) => Sign::Le,
            (Relation::Eq, false) => Sign::Eq,
            (Relation::Lt, true) => Sign::Ge,
            (Relation::Le, true) => Sign::Gt,
            (Relation::Eq, true) => Sign::Ne,
        }
    }
}

#[derive(Clone, Debug)]
struct CompiledAtom {
    poly: Polynomial,
    grad: Vec<Polynomial>,
    sign: Sign,
}

#[derive(Clone, Debug)]
enum CNode {
    Atom(usize),
    And(Vec<CNode>),
    Or(Vec<CNode>),
}

/// Negation normal form of a [`Formula`] with cached atom gradients.
///
/// Membership agrees with the source formula for every tolerance. On top
/// of membership it offers a violation measure, a relaxed (closure-style)
/// test and Gauss-Newton refinement toward the set.
#[derive(Clone, Debug)]
pub struct CompiledFormula {
    num_vars: usize,
    atoms: Vec<CompiledAtom>,
    root: CNode,
}

/// Strict inequalities are pushed this far past zero during refinement.
const STRICT_MARGIN: f64 = 1e-9;

impl CompiledFormula {
    fn new(f: &Formula) -> Self {
        let mut atoms = Vec::new();
        fn walk(n: &Node, negated: bool, atoms: &mut Vec<CompiledAtom>) -> CNode {
            match n {
                Node::Atom(a) => {
                    atoms.push(CompiledAtom {
                        poly: a.poly.clone(),
                        grad: a.poly.gradient(),
                        sign: Sign::from_relation(a.relation, negated),
                    });
                    CNode::Atom(atoms.len() - 1)
                }
                Node::And(c) => {
                    let kids = c.iter().map(|k| walk(k, negated, atoms)).collect();
                    if negated {
                        CNode::Or(kids)
                    } else {
                        CNode::And(kids)
                    }
                }
                Node::Or(c) => {
                    let kids = c.iter().map(|k| walk(k, negated, atoms)).collect();
                    if negated {
                        CNode::And(kids)
                    } else {
                        CNode::Or(kids)
                    }
                }
                Node::Not(c) => walk(c, !negated, atoms),
            }
        }
        let root = walk(&f.root, false, &mut atoms);
        Self {
            num_vars: f.num_vars,
            atoms,
            root,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn has_eq(&self) -> bool {
        self.atoms.iter().any(|a| a.sign == Sign::Eq)
    }

    pub fn contains(&self, x: &[f64], tol_eq: f64) -> bool {
        self.eval_node(&self.root, x, tol_eq, false)
    }

    /// Closure-style test: inequalities are treated as non-strict with
    /// slack `tol`, equalities as `|p| <= tol`, thickened disequalities are
    /// dropped (their closure is everything for non-constant `p`).
    pub fn relaxed_contains(&self, x: &[f64], tol: f64) -> bool {
        self.eval_node(&self.root, x, tol, true)
    }

    fn eval_node(&self, n: &CNode, x: &[f64], tol: f64, relaxed: bool) -> bool {
        match n {
            CNode::Atom(i) => {
                let a = &self.atoms[*i];
                let v = a.poly.value(x);
                if relaxed {
                    match a.sign {
                        Sign::Lt | Sign::Le => v <= tol,
                        Sign::Gt | Sign::Ge => v >= -tol,
                        Sign::Eq => v.abs() <= tol,
                        Sign::Ne => true,
                    }
                } else {
                    match a.sign {
                        Sign::Lt => v < 0.0,
                        Sign::Le => v <= 0.0,
                        Sign::Eq => v.abs() <= tol,
                        Sign::Gt => v > 0.0,
                        Sign::Ge => v >= 0.0,
                        Sign::Ne => v.abs() > tol,
                    }
                }
            }
            CNode::And(c) => c.iter().all(|k| self.eval_node(k, x, tol, relaxed)),
            CNode::Or(c) => c.iter().any(|k| self.eval_node(k, x, tol, relaxed)),
        }
    }

    fn atom_violation(&self, i: usize, v: f64, tol: f64) -> f64 {
        // Zero exactly when the atom holds; boundary points of strict atoms
        // get the smallest positive violation.
        let tiny = f64::MIN_POSITIVE;
        match self.atoms[i].sign {
            Sign::Lt => if v < 0.0 { 0.0 } else { v.max(tiny) },
            Sign::Le => v.max(0.0),
            Sign::Gt => if v > 0.0 { 0.0 } else { (-v).max(tiny) },
            Sign::Ge => (-v).max(0.0),
            Sign::Eq => (v.abs() - tol).max(0.0),
            Sign::Ne => if v.abs() > tol { 0.0 } else { (tol - v.abs()).max(tiny) },
        }
    }

    fn node_violation(&self, n: &CNode, x: &[f64], tol: f64) -> f64 {
        match n {
            CNode::Atom(i) => self.atom_violation(*i, self.atoms[*i].poly.value(x), tol),
            CNode::And(c) => c
                .iter()
                .map(|k| self.node_violation(k, x, tol))
                .fold(0.0, f64::max),
            CNode::Or(c) => c
                .iter()
                .map(|k| self.node_violation(k, x, tol))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Non-negative, zero exactly on the set (at tolerance `tol_eq`).
    pub fn violation(&self, x: &[f64], tol_eq: f64) -> f64 {
        self.node_violation(&self.root, x, tol_eq)
    }

    /// Residuals to drive to zero: violated atoms of the AND-branch that is
    /// closest to holding. Equalities are always active so refinement lands
    /// on the thin set rather than its tolerance shell.
    fn active_residuals(&self, n: &CNode, x: &[f64], tol: f64, out: &mut Vec<(usize, f64)>) {
        match n {
            CNode::Atom(i) => {
                let a = &self.atoms[*i];
                let v = a.poly.value(x);
                if a.sign == Sign::Eq {
                    out.push((*i, v));
                    return;
                }
                if self.atom_violation(*i, v, tol) == 0.0 {
                    return;
                }
                let target = match a.sign {
                    Sign::Lt => -STRICT_MARGIN,
                    Sign::Le => 0.0,
                    Sign::Gt => STRICT_MARGIN,
                    Sign::Ge => 0.0,
                    Sign::Ne => {
                        let s = if v < 0.0 { -1.0 } else { 1.0 };
                        s * (2.0 * tol + STRICT_MARGIN)
                    }
                    Sign::Eq => unreachable!(),
                };
                out.push((*i, v - target));
            }
            CNode::And(c) => {
                for k in c {
                    self.active_residuals(k, x, tol, out);
                }
            }
            CNode::Or(c) => {
                let best = c
                    .iter()
                    .map(|k| (self.node_violation(k, x, tol), k))
                    .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                if let Some((_, k)) = best {
                    self.active_residuals(k, x, tol, out);
                }
            }
        }
    }

    /// Moves `x` toward the set by damped minimum-norm Gauss-Newton steps
    /// over the variables in `free`, applying `project` after every step.
    /// Returns whether `x` ends inside the set at `tol_eq`.
    pub fn refine(
        &self,
        x: &mut [f64],
        free: std::ops::Range<usize>,
        tol_eq: f64,
        max_iters: usize,
        project: &dyn Fn(&mut [f64]),
    ) -> bool {
        let nf = free.len();
        let mut active = Vec::new();
        let mut jac = Vec::new();
        for _ in 0..max_iters {
            if self.contains(x, tol_eq) {
                return true;
            }
            active.clear();
            self.active_residuals(&self.root, x, tol_eq, &mut active);
            if active.is_empty() {
                return false;
            }
            jac.clear();
            for &(i, _) in &active {
                for v in free.clone() {
                    jac.push(self.atoms[i].grad[v].value(x));
                }
            }
            let r: Vec<f64> = active.iter().map(|a| a.1).collect();
            let Some(step) = min_norm_step(&jac, &r, active.len(), nf, 1e-12) else {
                return false;
            };
            if step.iter().any(|s| !s.is_finite()) {
                return false;
            }
            for (k, v) in free.clone().enumerate() {
                x[v] -= step[k];
            }
            project(x);
        }
        self.contains(x, tol_eq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x2(num_vars: usize, var: usize) -> Polynomial {
        Polynomial::var(num_vars, var).pow(2)
    }

    /// `0 < |y| < |x|` over (x, y).
    fn punctured_cone() -> Formula {
        Formula::and(vec![
            Formula::gt(x2(2, 1)),
            Formula::lt(x2(2, 1) - x2(2, 0)),
        ])
        .unwrap()
    }

    #[test]
    fn membership_examples() {
        let disk = Formula::lt(x2(1, 0) - Polynomial::constant(1, 1.0));
        assert!(disk.membership(&[0.0], 0.0).unwrap());
        assert!(!disk.membership(&[1.0], 0.0).unwrap());

        let g = punctured_cone();
        assert!(g.membership(&[1.0, 0.5], 1e-9).unwrap());
        assert!(!g.membership(&[1.0, 0.0], 1e-9).unwrap());
        assert!(g.membership(&[1.0], 0.0).is_err());
    }

    #[test]
    fn compiled_agrees_with_source_including_negated_equalities() {
        let p = Polynomial::var(2, 0) - Polynomial::var(2, 1);
        let f = Formula::or(vec![
            Formula::not(Formula::eq(p.clone())),
            Formula::and(vec![Formula::not(punctured_cone()), Formula::le(p)]).unwrap(),
        ])
        .unwrap();
        let c = f.compile();
        for &(a, b) in &[(0.0, 0.0), (1.0, 1.0), (1.0, 1.0 + 1e-10), (0.3, -2.0), (-1.0, 0.5)] {
            for tol in [0.0, 1e-9] {
                assert_eq!(f.contains(&[a, b], tol), c.contains(&[a, b], tol), "{a} {b} {tol}");
            }
        }
    }

    #[test]
    fn violation_is_zero_exactly_on_set() {
        let g = punctured_cone().compile();
        assert_eq!(g.violation(&[1.0, 0.5], 0.0), 0.0);
        assert!(g.violation(&[1.0, 0.0], 0.0) > 0.0);
        assert!(g.violation(&[0.5, 1.0], 0.0) > 0.0);
    }

    #[test]
    fn relaxed_membership_accepts_closure_points() {
        let g = punctured_cone().compile();
        assert!(!g.contains(&[0.0, 0.0], 1e-9));
        assert!(g.relaxed_contains(&[0.0, 0.0], 1e-9));
        assert!(!g.relaxed_contains(&[0.0, 1.0], 1e-9));
    }

    #[test]
    fn refine_projects_onto_equality() {
        // Unit circle in the plane.
        let circle = Formula::eq(x2(2, 0) + x2(2, 1) - Polynomial::constant(2, 1.0)).compile();
        let mut x = [0.9, 0.8];
        assert!(circle.refine(&mut x, 0..2, 1e-12, 30, &|_| {}));
        assert!((x[0].hypot(x[1]) - 1.0).abs() < 1e-12);
        // With only the second coordinate free it solves for it.
        let mut x = [0.6, 0.1];
        assert!(circle.refine(&mut x, 1..2, 1e-12, 30, &|_| {}));
        assert!((x[1] - 0.8).abs() < 1e-9);
    }

    #[test]
    fn refine_fails_when_frozen_variables_block() {
        let origin = Formula::and(vec![
            Formula::eq(Polynomial::var(2, 0)),
            Formula::eq(Polynomial::var(2, 1)),
        ])
        .unwrap()
        .compile();
        let mut x = [0.3, 0.2];
        assert!(!origin.refine(&mut x, 0..1, 1e-9, 20, &|_| {}));
    }

    #[test]
    fn conjunction_atoms_flattens_pure_ands() {
        let g = punctured_cone();
        assert_eq!(g.conjunction_atoms().unwrap().len(), 2);
        assert!(Formula::not(g).conjunction_atoms().is_none());
    }
}
