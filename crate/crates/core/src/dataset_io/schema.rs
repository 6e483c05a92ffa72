use std::fmt;

use super::bindings::{BindingKind, BindingSpec};
use super::LoadError;
use crate::spec_lang::{SpecModel, Type};

/// Type of one scalar column of a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ColType {
    Int,
    Bool,
    /// Atom of the carrier set with this id.
    Atom(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSchema {
    pub name: String,
    /// Elements of an enumerated set, in declaration order.
    pub enumerated: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstSchema {
    pub name: String,
    pub kind: BindingKind,
    pub cols: Vec<ColType>,
}

/// Shape of a dataset: its carrier sets (sorted by name) and constants
/// (sorted by name).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    pub sets: Vec<SetSchema>,
    pub constants: Vec<ConstSchema>,
}

impl Schema {
    pub fn set_id(&self, name: &str) -> Option<u32> {
        self.sets
            .binary_search_by(|s| s.name.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    pub fn constant(&self, name: &str) -> Option<&ConstSchema> {
        self.constants
            .binary_search_by(|c| c.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.constants[i])
    }

    pub fn col_name(&self, col: ColType) -> &str {
        match col {
            ColType::Int => "INT",
            ColType::Bool => "BOOL",
            ColType::Atom(id) => &self.sets[id as usize].name,
        }
    }

    pub fn parse_col(&self, name: &str) -> Option<ColType> {
        match name {
            "INT" => Some(ColType::Int),
            "BOOL" => Some(ColType::Bool),
            n => self.set_id(n).map(ColType::Atom),
        }
    }

    /// Derives the schema from a type-checked model and its bindings.
    pub fn from_model(model: &SpecModel, bindings: &[BindingSpec]) -> Result<Schema, LoadError> {
        let mut sets: Vec<SetSchema> = model
            .sets
            .iter()
            .map(|s| SetSchema {
                name: s.name.clone(),
                enumerated: s.elements.clone(),
            })
            .collect();
        sets.sort_by(|a, b| a.name.cmp(&b.name));
        let mut schema = Schema {
            sets,
            constants: Vec::new(),
        };

        for b in bindings {
            let known = model.set(&b.constant).is_some() || model.constant(&b.constant).is_some();
            if !known {
                return Err(LoadError::UnknownConstant { constant: b.constant.clone() });
            }
        }
        let binding = |name: &str| bindings.iter().find(|b| b.constant == name);

        for set in &model.sets {
            match (binding(&set.name), &set.elements) {
                (None, None) => return Err(LoadError::MissingBinding { constant: set.name.clone() }),
                (Some(b), None) if b.kind != BindingKind::Set => {
                    return Err(kind_mismatch(b, "a carrier set"));
                }
                (Some(b), Some(_)) => return Err(kind_mismatch(b, "an enumerated set, which takes no binding")),
                _ => {}
            }
        }

        for c in &model.constants {
            let b = binding(&c.name).ok_or_else(|| LoadError::MissingBinding { constant: c.name.clone() })?;
            let ty = c.ty.as_ref().expect("model is type-checked");
            let scalar = |t: &Type| -> Option<ColType> {
                match t {
                    Type::Int => Some(ColType::Int),
                    Type::Bool => Some(ColType::Bool),
                    Type::Given(n) => schema.set_id(n).map(ColType::Atom),
                    _ => None,
                }
            };
            let cols = match (b.kind, ty) {
                (BindingKind::Scalar, t) => scalar(t).map(|c| vec![c]),
                (BindingKind::Subset, Type::Set(e)) => scalar(e).map(|c| vec![c]),
                (BindingKind::Function | BindingKind::Relation, Type::Set(p)) => match &**p {
                    Type::Pair(a, r) => scalar(a).zip(scalar(r)).map(|(a, r)| vec![a, r]),
                    _ => None,
                },
                (BindingKind::FunFun, Type::Set(p)) => match &**p {
                    Type::Pair(a, inner) => match &**inner {
                        Type::Set(q) => match &**q {
                            Type::Pair(x, y) => match (scalar(a), scalar(x), scalar(y)) {
                                (Some(a), Some(x), Some(y)) => Some(vec![a, x, y]),
                                _ => None,
                            },
                            _ => None,
                        },
                        _ => None,
                    },
                    _ => None,
                },
                _ => None,
            };
            let cols = cols.ok_or_else(|| kind_mismatch(b, &format!("type {ty}")))?;
            if b.scale.is_some() && cols.last() != Some(&ColType::Int) {
                return Err(LoadError::ScaleNotNumeric { constant: c.name.clone() });
            }
            schema.constants.push(ConstSchema {
                name: c.name.clone(),
                kind: b.kind,
                cols,
            });
        }
        schema.constants.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(schema)
    }
}

fn kind_mismatch(b: &BindingSpec, what: &str) -> LoadError {
    LoadError::KindMismatch {
        constant: b.constant.clone(),
        kind: b.kind,
        expected: what.to_string(),
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sets {
            writeln!(f, "set {}", s.name)?;
        }
        for c in &self.constants {
            let cols: Vec<&str> = c.cols.iter().map(|col| self.col_name(*col)).collect();
            writeln!(f, "{} {} {}", c.kind, c.name, cols.join(" "))?;
        }
        Ok(())
    }
}
