//! JSON documents for spaces, value tables, elements and reports.
//!
//! A space is either `{"labels": [...], "matrix": [[...]]}` with `"inf"`
//! allowed as an entry, or `{"dim": d, "points": [[...]]}` for Euclidean
//! points. Elements are `{"functor": ..., "kind": ..., "indices": [...]}`
//! where indices may be integers or labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::functor_engine::Element;
use crate::group_norms::{FinSupportFunction, GroupError};
use crate::metric_core::{deserialize_ext_f64, euclidean_import, serialize_ext_f64, DistanceSpace, MetricError};

/// Serializes an `f64` with `+∞` written as `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ext(pub f64);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_ext_f64(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        deserialize_ext_f64(d).map(Ext)
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    /// Malformed JSON or a document of the wrong shape.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("UnknownElement: {0}")]
    UnknownElement(String),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Parse(e.to_string())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpaceDoc {
    Matrix {
        labels: Option<Vec<String>>,
        matrix: Vec<Vec<Ext>>,
    },
    Points {
        labels: Option<Vec<String>>,
        dim: usize,
        points: Vec<Vec<f64>>,
    },
}

/// Parses and validates a space document.
pub fn parse_space(text: &str) -> Result<DistanceSpace, IoError> {
    match serde_json::from_str::<SpaceDoc>(text)? {
        SpaceDoc::Matrix { labels, matrix } => {
            let rows: Vec<Vec<f64>> = matrix.into_iter().map(|r| r.into_iter().map(|e| e.0).collect()).collect();
            Ok(DistanceSpace::validate(labels, &rows)?)
        }
        SpaceDoc::Points { labels, dim, points } => {
            if let Some((index, p)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
                return Err(MetricError::DimensionMismatch { index, expected: dim, found: p.len() }.into());
            }
            let x = euclidean_import(&points)?;
            match labels {
                None => Ok(x),
                Some(l) => {
                    if l.len() != x.len() {
                        return Err(MetricError::LabelCount { labels: l.len(), size: x.len() }.into());
                    }
                    Ok(DistanceSpace::from_fn(l, |i, j| x.d(i, j))?)
                }
            }
        }
    }
}

#[derive(Serialize)]
struct SpaceOut<'a> {
    labels: &'a [String],
    matrix: Vec<Vec<Ext>>,
}

/// The matrix form of a space.
pub fn space_to_json(x: &DistanceSpace) -> serde_json::Value {
    let matrix = (0..x.len()).map(|i| (0..x.len()).map(|j| Ext(x.d(i, j))).collect()).collect();
    serde_json::to_value(SpaceOut { labels: x.labels(), matrix }).expect("plain data serializes")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IndexRef {
    Index(usize),
    Label(String),
}

#[derive(Deserialize)]
struct ElementDoc {
    #[serde(default)]
    functor: Option<String>,
    kind: String,
    #[serde(default)]
    indices: Vec<IndexRef>,
}

/// An element spec after label resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementSpec {
    pub functor: Option<String>,
    pub element: Element,
}

fn resolve(x: &DistanceSpace, r: &IndexRef) -> Result<usize, IoError> {
    match r {
        IndexRef::Index(i) if *i < x.len() => Ok(*i),
        IndexRef::Index(i) => Err(IoError::UnknownElement(format!("index {i} out of range"))),
        IndexRef::Label(l) => x.index_of(l).ok_or_else(|| IoError::UnknownElement(format!("unknown label {l:?}"))),
    }
}

/// Parses an element spec against the labels of `x`.
pub fn parse_element(x: &DistanceSpace, text: &str) -> Result<ElementSpec, IoError> {
    let doc: ElementDoc = serde_json::from_str(text)?;
    let idx = doc.indices.iter().map(|r| resolve(x, r)).collect::<Result<Vec<_>, _>>()?;
    let element = match doc.kind.to_ascii_lowercase().as_str() {
        "empty" if idx.is_empty() => Element::Empty,
        "set" => Element::set(idx),
        "tuple" => Element::tuple(idx),
        other => return Err(IoError::Parse(format!("unknown element kind {other:?}"))),
    };
    Ok(ElementSpec { functor: doc.functor, element })
}

/// Parses a list of indices or labels, as used for subsets.
pub fn parse_subset(x: &DistanceSpace, text: &str) -> Result<Vec<usize>, IoError> {
    let refs: Vec<IndexRef> = serde_json::from_str(text)?;
    let mut idx = refs.iter().map(|r| resolve(x, r)).collect::<Result<Vec<_>, _>>()?;
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

#[derive(Deserialize, Serialize)]
struct GroupDoc {
    modulus: u32,
    #[serde(default)]
    values: BTreeMap<String, i64>,
}

/// Parses `{"modulus": m, "values": {label: residue}}`; omitted labels are `0`.
pub fn parse_group_function(x: &DistanceSpace, text: &str) -> Result<FinSupportFunction, IoError> {
    let doc: GroupDoc = serde_json::from_str(text)?;
    let mut values = vec![0i64; x.len()];
    for (label, v) in &doc.values {
        let i = match x.index_of(label) {
            Some(i) => i,
            None => label.parse::<usize>().ok().filter(|&i| i < x.len()).ok_or_else(|| IoError::UnknownElement(format!("unknown label {label:?}")))?,
        };
        values[i] = *v;
    }
    Ok(FinSupportFunction::new(doc.modulus, values)?)
}

/// The JSON form of a group function, listing nonzero values only.
pub fn group_function_to_json(x: &DistanceSpace, f: &FinSupportFunction) -> serde_json::Value {
    let values = f.support().into_iter().map(|i| (x.label(i).to_string(), f.values()[i] as i64)).collect();
    serde_json::to_value(GroupDoc { modulus: f.modulus(), values }).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_and_points() {
        let x = parse_space(r#"{"labels":["a","b","c"],"matrix":[[0,1,"inf"],[1,0,"inf"],["inf","inf",0]]}"#).unwrap();
        assert_eq!(x.components().len(), 2);
        assert_eq!(space_to_json(&x)["matrix"][0][2], "inf");
        let y = parse_space(r#"{"dim":2,"points":[[0,0],[3,4]]}"#).unwrap();
        assert_eq!(y.d(0, 1), 5.0);
        assert!(matches!(parse_space(r#"{"dim":2,"points":[[0,0],[3]]}"#), Err(IoError::Metric(MetricError::DimensionMismatch { .. }))));
        assert!(matches!(parse_space("{"), Err(IoError::Parse(_))));
        assert!(matches!(parse_space(r#"{"matrix":[[0,1],[2,0]]}"#), Err(IoError::Metric(MetricError::Asymmetric { .. }))));
    }

    #[test]
    fn elements_and_functions() {
        let x = parse_space(r#"{"labels":["a","b"],"matrix":[[0,1],[1,0]]}"#).unwrap();
        let e = parse_element(&x, r#"{"functor":"hyperspace","kind":"set","indices":["b",0]}"#).unwrap();
        assert_eq!(e.element, Element::set([0, 1]));
        assert!(matches!(parse_element(&x, r#"{"kind":"set","indices":["z"]}"#), Err(IoError::UnknownElement(_))));
        assert_eq!(parse_element(&x, r#"{"kind":"empty"}"#).unwrap().element, Element::Empty);
        let f = parse_group_function(&x, r#"{"modulus":3,"values":{"a":4}}"#).unwrap();
        assert_eq!(f.values(), &[1, 0]);
        assert_eq!(group_function_to_json(&x, &f).to_string(), r#"{"modulus":3,"values":{"a":1}}"#);
        assert_eq!(parse_subset(&x, r#"["b","a",1]"#).unwrap(), vec![0, 1]);
    }
}
