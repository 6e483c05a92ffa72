//! Loading constant values from XML data files.

mod bindings;
mod canonical;
mod constraints;
mod fixed;
mod path;
mod schema;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::spec_lang::SpecModel;
use crate::value::{Atom, Universes, Value};

pub use bindings::{parse_bindings, BindingKind, BindingSpec};
pub use canonical::{read_canonical, write_canonical};
pub use constraints::{check_constraints, Violation};
pub use fixed::{scale_digits, to_fixed_point, FixedPointError};
pub use path::{Hit, Path};
pub use schema::{ColType, ConstSchema, Schema, SetSchema};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("binding file line {line}: {message}")]
    Bindings { line: usize, message: String },
    #[error("bad path `{path}`: {reason}")]
    PathSyntax { path: String, reason: String },
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("binding for `{constant}`, which the model does not declare")]
    UnknownConstant { constant: String },
    #[error("no binding for `{constant}`")]
    MissingBinding { constant: String },
    #[error("`{constant}` has a {kind} binding but is {expected}")]
    KindMismatch {
        constant: String,
        kind: BindingKind,
        expected: String,
    },
    #[error("`{constant}`: scale given but the bound values are not integers")]
    ScaleNotNumeric { constant: String },
    #[error("`{constant}`: path `{path}` selects {count} values, expected exactly one")]
    ScalarSelection { constant: String, path: String, count: usize },
    #[error("`{constant}`: key `{key}` maps to both `{first}` and `{second}`")]
    DuplicateKey {
        constant: String,
        key: String,
        first: String,
        second: String,
    },
    #[error("`{constant}`: value `{value}` from `{path}` is not in {expected}")]
    OutsideType {
        constant: String,
        path: String,
        value: String,
        expected: String,
    },
    #[error("`{constant}`: bad numeral from `{path}`: {source}")]
    Numeral {
        constant: String,
        path: String,
        source: FixedPointError,
    },
    #[error("canonical dataset: {0}")]
    Canonical(String),
    #[error("dataset does not match the model: {0}")]
    SchemaMismatch(String),
}

impl LoadError {
    /// The constant a diagnostic refers to, when there is one.
    pub fn constant(&self) -> Option<&str> {
        match self {
            LoadError::UnknownConstant { constant }
            | LoadError::MissingBinding { constant }
            | LoadError::KindMismatch { constant, .. }
            | LoadError::ScaleNotNumeric { constant }
            | LoadError::ScalarSelection { constant, .. }
            | LoadError::DuplicateKey { constant, .. }
            | LoadError::OutsideType { constant, .. }
            | LoadError::Numeral { constant, .. } => Some(constant),
            _ => None,
        }
    }

    /// The path a diagnostic refers to, when there is one.
    pub fn path(&self) -> Option<&str> {
        match self {
            LoadError::PathSyntax { path, .. }
            | LoadError::ScalarSelection { path, .. }
            | LoadError::OutsideType { path, .. }
            | LoadError::Numeral { path, .. } => Some(path),
            _ => None,
        }
    }
}

/// Resolved constant values. Immutable once loaded.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub schema: Schema,
    pub universes: Universes,
    values: BTreeMap<String, Value>,
    provenance: BTreeMap<String, String>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.universes == other.universes && self.values == other.values
    }
}

impl Dataset {
    pub(crate) fn from_parts(
        schema: Schema,
        universes: Universes,
        values: BTreeMap<String, Value>,
        provenance: BTreeMap<String, String>,
    ) -> Dataset {
        Dataset {
            schema,
            universes,
            values,
            provenance,
        }
    }

    pub fn value(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn values(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn provenance(&self, name: &str) -> Option<&str> {
        self.provenance.get(name).map(String::as_str)
    }

    /// Total number of scalar leaves across all constant values.
    pub fn leaf_count(&self) -> usize {
        self.values.values().map(Value::leaf_count).sum()
    }

    /// Atom of a carrier set by source key.
    pub fn atom(&self, set: &str, key: &str) -> Option<Value> {
        let id = self.universes.id(set)?;
        let index = self.universes.get(id).lookup(key)?;
        Some(Value::Atom(Atom { set: id, index }))
    }

    /// Checks that a dataset obtained without bindings (for example decoded
    /// from a binary message) has the shape the model and bindings expect.
    pub fn conforms_to(&self, model: &SpecModel, bindings: &[BindingSpec]) -> Result<(), LoadError> {
        let expected = Schema::from_model(model, bindings)?;
        if expected != self.schema {
            return Err(LoadError::SchemaMismatch(format!(
                "expected\n{expected}found\n{}",
                self.schema
            )));
        }
        Ok(())
    }
}

fn convert(
    col: ColType,
    text: &str,
    scale: Option<u64>,
    universes: &Universes,
    constant: &str,
    path: &Path,
) -> Result<Value, LoadError> {
    match col {
        ColType::Atom(id) => {
            let u = universes.get(id);
            u.lookup(text)
                .map(|index| Value::Atom(Atom { set: id, index }))
                .ok_or_else(|| LoadError::OutsideType {
                    constant: constant.to_string(),
                    path: path.to_string(),
                    value: text.to_string(),
                    expected: u.name.clone(),
                })
        }
        ColType::Int => to_fixed_point(text, scale.unwrap_or(1))
            .map(Value::Int)
            .map_err(|source| LoadError::Numeral {
                constant: constant.to_string(),
                path: path.to_string(),
                source,
            }),
        ColType::Bool => match text.trim() {
            "TRUE" | "true" => Ok(Value::Bool(true)),
            "FALSE" | "false" => Ok(Value::Bool(false)),
            other => Err(LoadError::OutsideType {
                constant: constant.to_string(),
                path: path.to_string(),
                value: other.to_string(),
                expected: "BOOL".into(),
            }),
        },
    }
}

/// Rejects a relation with two pairs sharing a left component.
pub(crate) fn check_functional(constant: &str, pairs: &[Value], universes: &Universes) -> Result<(), LoadError> {
    for w in pairs.windows(2) {
        let (a, x) = w[0].as_pair().expect("relation of pairs");
        let (b, y) = w[1].as_pair().expect("relation of pairs");
        if a == b {
            return Err(LoadError::DuplicateKey {
                constant: constant.to_string(),
                key: a.display(universes).to_string(),
                first: x.display(universes).to_string(),
                second: y.display(universes).to_string(),
            });
        }
    }
    Ok(())
}

/// Loads every constant of a type-checked model from an XML document.
pub fn load_dataset(xml: &str, bindings: &[BindingSpec], model: &SpecModel) -> Result<Dataset, LoadError> {
    let schema = Schema::from_model(model, bindings)?;
    let doc = roxmltree::Document::parse(xml)?;
    let mut universes = Universes::new(schema.sets.iter().map(|s| s.name.as_str()));
    let mut provenance = BTreeMap::new();

    for s in &schema.sets {
        let id = universes.id(&s.name).expect("declared");
        match &s.enumerated {
            Some(elements) => {
                for e in elements {
                    universes.get_mut(id).intern(e);
                }
                provenance.insert(s.name.clone(), "enumerated".to_string());
            }
            None => {
                let b = bindings.iter().find(|b| b.constant == s.name).expect("checked by schema");
                let u = universes.get_mut(id);
                for hit in b.paths[0].select(&doc, None) {
                    if u.lookup(&hit.value).is_some() {
                        return Err(LoadError::DuplicateKey {
                            constant: s.name.clone(),
                            key: hit.value.clone(),
                            first: "an element".into(),
                            second: "another element".into(),
                        });
                    }
                    u.intern(&hit.value);
                }
                provenance.insert(s.name.clone(), b.summary());
            }
        }
    }

    let mut values = BTreeMap::new();
    for c in &schema.constants {
        let b = bindings.iter().find(|b| b.constant == c.name).expect("checked by schema");
        let name = c.name.as_str();
        let last = c.cols.len() - 1;
        let conv = |i: usize, text: &str, path: &Path| {
            convert(c.cols[i], text, if i == last { b.scale } else { None }, &universes, name, path)
        };
        let p = &b.paths;
        let value = match c.kind {
            BindingKind::Set => unreachable!("carrier sets are not constants"),
            BindingKind::Subset => {
                let elems = p[0]
                    .select(&doc, None)
                    .iter()
                    .map(|h| conv(0, &h.value, &p[0]))
                    .collect::<Result<Vec<_>, _>>()?;
                Value::set_from(elems)
            }
            BindingKind::Scalar => {
                let hits = p[0].select(&doc, None);
                if hits.len() != 1 {
                    return Err(LoadError::ScalarSelection {
                        constant: c.name.clone(),
                        path: p[0].to_string(),
                        count: hits.len(),
                    });
                }
                conv(0, &hits[0].value, &p[0])?
            }
            BindingKind::Function | BindingKind::Relation => {
                let mut pairs = Vec::new();
                for d in p[0].select(&doc, None) {
                    let key = conv(0, &d.value, &p[0])?;
                    for r in p[1].select(&doc, Some(d.owner)) {
                        pairs.push(Value::pair(key.clone(), conv(1, &r.value, &p[1])?));
                    }
                }
                pairs.sort_unstable();
                pairs.dedup();
                if c.kind == BindingKind::Function {
                    check_functional(name, &pairs, &universes)?;
                }
                Value::set_from_sorted(pairs)
            }
            BindingKind::FunFun => {
                let mut outer: BTreeMap<Value, Vec<Value>> = BTreeMap::new();
                for o in p[0].select(&doc, None) {
                    let key = conv(0, &o.value, &p[0])?;
                    let inner = outer.entry(key).or_default();
                    for i in p[1].select(&doc, Some(o.owner)) {
                        let ikey = conv(1, &i.value, &p[1])?;
                        for r in p[2].select(&doc, Some(i.owner)) {
                            inner.push(Value::pair(ikey.clone(), conv(2, &r.value, &p[2])?));
                        }
                    }
                }
                let mut out = Vec::with_capacity(outer.len());
                for (key, mut inner) in outer {
                    inner.sort_unstable();
                    inner.dedup();
                    check_functional(name, &inner, &universes)?;
                    out.push(Value::pair(key, Value::set_from_sorted(inner)));
                }
                Value::set_from_sorted(out)
            }
        };
        values.insert(c.name.clone(), value);
        provenance.insert(c.name.clone(), b.summary());
    }

    Ok(Dataset {
        schema,
        universes,
        values,
        provenance,
    })
}
