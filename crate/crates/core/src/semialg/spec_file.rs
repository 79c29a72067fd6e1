//! The JSON map-spec format.
//!
//! ```json
//! { "name": "cone", "n": 1, "m": 1, "box": [[-1, 1], [-1, 1]],
//!   "graph": {"op": "and", "args": [
//!       {"poly": {"vars": 2, "terms": [{"c": -1, "e": [0, 2]}]}, "rel": "lt"},
//!       {"poly": {"vars": 2, "terms": [{"c": 1, "e": [0, 2]}, {"c": -1, "e": [2, 0]}]}, "rel": "lt"}]} }
//! ```
//!
//! A polynomial map is given by `"components"` (polynomials in `n`
//! variables) instead of `"graph"`; its graph is `y_i - F^i(x) = 0`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::formula::{Formula, Node, Relation};
use super::mapspec::{MapSpec, PolyMap};
use super::polynomial::Polynomial;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub c: f64,
    pub e: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub vars: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub args: Option<Vec<NodeJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly: Option<PolyJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub name: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "box")]
    pub bbox: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<NodeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<PolyJson>>,
}

impl PolyJson {
    pub fn to_polynomial(&self) -> Result<Polynomial> {
        Polynomial::new(self.vars, self.terms.iter().map(|t| (t.c, t.e.clone())))
    }

    pub fn from_polynomial(p: &Polynomial) -> Self {
        Self {
            vars: p.num_vars(),
            terms: p
                .terms()
                .iter()
                .map(|t| TermJson {
                    c: t.coeff,
                    e: t.exps.clone(),
                })
                .collect(),
        }
    }
}

fn node_to_formula(node: &NodeJson, path: &str) -> Result<Formula> {
    let bad = |msg: &str| Error::InvalidInput(format!("{path}: {msg}"));
    match (&node.op, &node.poly) {
        (Some(op), None) => {
            if node.rel.is_some() {
                return Err(bad("boolean node cannot carry \"rel\""));
            }
            let args = node.args.as_ref().ok_or_else(|| bad("missing \"args\""))?;
            let kids = args
                .iter()
                .enumerate()
                .map(|(i, a)| node_to_formula(a, &format!("{path}.args[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            match op.as_str() {
                "and" => Formula::and(kids),
                "or" => Formula::or(kids),
                "not" => {
                    if kids.len() != 1 {
                        return Err(bad("\"not\" takes exactly one argument"));
                    }
                    Ok(Formula::not(kids.into_iter().next().unwrap()))
                }
                other => Err(bad(&format!("unknown op {other:?}"))),
            }
        }
        (None, Some(poly)) => {
            if node.args.is_some() {
                return Err(bad("atom cannot carry \"args\""));
            }
            let rel = match node.rel.as_deref() {
                Some("lt") => Relation::Lt,
                Some("le") => Relation::Le,
                Some("eq") => Relation::Eq,
                Some(other) => return Err(bad(&format!("unknown rel {other:?}"))),
                None => return Err(bad("atom missing \"rel\"")),
            };
            Ok(Formula::atom(poly.to_polynomial()?, rel))
        }
        _ => Err(bad("node needs exactly one of \"op\" or \"poly\"")),
    }
}

fn formula_to_node(n: &Node) -> NodeJson {
    match n {
        Node::Atom(a) => NodeJson {
            poly: Some(PolyJson::from_polynomial(&a.poly)),
            rel: Some(
                match a.relation {
                    Relation::Lt => "lt",
                    Relation::Le => "le",
                    Relation::Eq => "eq",
                }
                .into(),
            ),
            ..Default::default()
        },
        Node::And(c) | Node::Or(c) => NodeJson {
            op: Some(if matches!(n, Node::And(_)) { "and" } else { "or" }.into()),
            args: Some(c.iter().map(formula_to_node).collect()),
            ..Default::default()
        },
        Node::Not(c) => NodeJson {
            op: Some("not".into()),
            args: Some(vec![formula_to_node(c)]),
            ..Default::default()
        },
    }
}

impl SpecFile {
    pub fn into_spec(self) -> Result<MapSpec> {
        let bbox = self.bbox.iter().map(|[lo, hi]| (*lo, *hi)).collect();
        match (self.graph, self.components) {
            (Some(g), None) => {
                let f = node_to_formula(&g, "graph")?;
                MapSpec::new(self.name, self.n, self.m, f, bbox)
            }
            (None, Some(comps)) => {
                if comps.len() != self.m {
                    return Err(Error::InvalidInput(format!(
                        "components: expected {} polynomials, got {}",
                        self.m,
                        comps.len()
                    )));
                }
                let polys = comps
                    .iter()
                    .map(PolyJson::to_polynomial)
                    .collect::<Result<Vec<_>>>()?;
                let map = PolyMap::new(polys)?;
                if map.n() != self.n {
                    return Err(Error::DimensionMismatch {
                        expected: self.n,
                        got: map.n(),
                    });
                }
                MapSpec::from_poly_map(self.name, map, bbox)
            }
            _ => Err(Error::InvalidInput(
                "spec needs exactly one of \"graph\" or \"components\"".into(),
            )),
        }
    }

    pub fn from_spec(spec: &MapSpec) -> Self {
        let (graph, components) = match spec.functional() {
            Some(f) => (
                None,
                Some(f.components().iter().map(PolyJson::from_polynomial).collect()),
            ),
            None => (Some(formula_to_node(spec.graph().root())), None),
        };
        Self {
            name: spec.name().to_string(),
            n: spec.n(),
            m: spec.m(),
            bbox: spec.bbox().iter().map(|(lo, hi)| [*lo, *hi]).collect(),
            graph,
            components,
        }
    }
}

/// Parses a map spec from JSON text. Syntax errors carry line and column.
pub fn parse_spec(text: &str) -> Result<MapSpec> {
    let file: SpecFile = serde_json::from_str(text)?;
    file.into_spec()
}

pub fn load_spec(path: &Path) -> Result<MapSpec> {
    parse_spec(&std::fs::read_to_string(path)?)
}

pub fn spec_to_json(spec: &MapSpec) -> String {
    serde_json::to_string_pretty(&SpecFile::from_spec(spec)).expect("spec serializes")
}

/// Parses a bare polynomial `{"vars": .., "terms": [..]}`.
pub fn parse_polynomial(text: &str) -> Result<Polynomial> {
    let p: PolyJson = serde_json::from_str(text)?;
    p.to_polynomial()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONE: &str = r#"{ "name": "cone", "n": 1, "m": 1, "box": [[-1, 1], [-1, 1]],
      "graph": {"op": "and", "args": [
        {"poly": {"vars": 2, "terms": [{"c": -1, "e": [0, 2]}]}, "rel": "lt"},
        {"poly": {"vars": 2, "terms": [{"c": 1, "e": [0, 2]}, {"c": -1, "e": [2, 0]}]}, "rel": "lt"}]} }"#;

    #[test]
    fn parses_graph_spec() {
        let spec = parse_spec(CONE).unwrap();
        assert_eq!((spec.n(), spec.m()), (1, 1));
        assert!(spec.contains(&[1.0], &[0.5], 1e-9).unwrap());
        assert!(!spec.contains(&[1.0], &[0.0], 1e-9).unwrap());
    }

    #[test]
    fn parses_components_spec() {
        let text = r#"{"name": "sq", "n": 1, "m": 1, "box": [[-1, 1], [0, 1]],
            "components": [{"vars": 1, "terms": [{"c": 1, "e": [2]}]}]}"#;
        let spec = parse_spec(text).unwrap();
        assert!(spec.functional().is_some());
        assert!(spec.contains(&[0.5], &[0.25], 1e-12).unwrap());
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_spec("{\n  \"name\": \"x\",\n  \"n\": 1,,\n}").unwrap_err();
        match err {
            Error::Parse(e) => assert_eq!(e.line(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_node() {
        let text = CONE.replace("\"rel\": \"lt\"}]}", "\"rel\": \"gt\"}]}");
        let err = parse_spec(&text).unwrap_err().to_string();
        assert!(err.contains("graph.args[1]"), "{err}");
        let not2 = r#"{"name": "x", "n": 1, "m": 1, "box": [[0,1],[0,1]], "graph": {"op": "not", "args": [
            {"poly": {"vars": 2, "terms": []}, "rel": "le"}, {"poly": {"vars": 2, "terms": []}, "rel": "le"}]}}"#;
        assert!(parse_spec(not2).unwrap_err().to_string().contains("exactly one"));
    }

    #[test]
    fn json_round_trip_preserves_membership() {
        let spec = parse_spec(CONE).unwrap();
        let again = parse_spec(&spec_to_json(&spec)).unwrap();
        for p in [[0.3, 0.1], [0.3, 0.0], [0.1, 0.3], [-0.5, -0.2]] {
            assert_eq!(
                spec.contains(&p[..1], &p[1..], 1e-9).unwrap(),
                again.contains(&p[..1], &p[1..], 1e-9).unwrap()
            );
        }
    }
}
