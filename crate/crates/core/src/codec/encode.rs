use crate::dataset_io::{BindingKind, ColType, Dataset};
use crate::value::Value;

use super::EncodeError;

const MAGIC: &[u8; 4] = b"DVAL";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 20;

const KIND_SET: u8 = 0;
const KIND_ENUM_SET: u8 = 1;

fn kind_tag(kind: BindingKind) -> u8 {
    match kind {
        BindingKind::Scalar => 2,
        BindingKind::Subset => 3,
        BindingKind::Function => 4,
        BindingKind::Relation => 5,
        BindingKind::FunFun => 6,
        BindingKind::Set => unreachable!("sets are not constants"),
    }
}

fn col_tag(col: ColType) -> u16 {
    match col {
        ColType::Int => 0,
        ColType::Bool => 1,
        ColType::Atom(id) => 2 + id as u16,
    }
}

struct Section<'d> {
    name: &'d str,
    body: Body<'d>,
}

enum Body<'d> {
    Set { enumerated: bool, keys: &'d [String] },
    Const { kind: BindingKind, cols: &'d [ColType], value: &'d Value },
}

fn u16_of(n: usize, section: &str, what: &'static str) -> Result<u16, EncodeError> {
    u16::try_from(n).map_err(|_| EncodeError::TooLarge {
        section: section.to_string(),
        what,
    })
}

fn u32_of(n: usize, section: &str, what: &'static str) -> Result<u32, EncodeError> {
    u32::try_from(n).map_err(|_| EncodeError::TooLarge {
        section: section.to_string(),
        what,
    })
}

fn leaf(out: &mut Vec<u8>, v: &Value, constant: &str) -> Result<(), EncodeError> {
    match v {
        Value::Int(i) => {
            let x = i
                .to_i64()
                .and_then(|x| i32::try_from(x).ok())
                .ok_or_else(|| EncodeError::Overflow {
                    constant: constant.to_string(),
                    value: i.to_big().to_string(),
                })?;
            out.extend_from_slice(&x.to_le_bytes());
        }
        Value::Bool(b) => out.extend_from_slice(&u32::from(*b).to_le_bytes()),
        Value::Atom(a) => out.extend_from_slice(&a.index.to_le_bytes()),
        _ => unreachable!("records hold scalar leaves"),
    }
    Ok(())
}

fn pair(out: &mut Vec<u8>, p: &Value, constant: &str) -> Result<(), EncodeError> {
    let (d, r) = p.as_pair().expect("relation of pairs");
    leaf(out, d, constant)?;
    leaf(out, r, constant)
}

fn section(out: &mut Vec<u8>, s: &Section) -> Result<(), EncodeError> {
    let name = s.name;
    out.extend_from_slice(&u16_of(name.len(), name, "name length")?.to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    let mut body = Vec::new();
    let count = match &s.body {
        Body::Set { enumerated, keys } => {
            out.push(if *enumerated { KIND_ENUM_SET } else { KIND_SET });
            out.push(0);
            for k in keys.iter() {
                body.extend_from_slice(&u16_of(k.len(), name, "element name length")?.to_le_bytes());
                body.extend_from_slice(k.as_bytes());
            }
            keys.len()
        }
        Body::Const { kind, cols, value } => {
            out.push(kind_tag(*kind));
            out.push(cols.len() as u8);
            for c in cols.iter() {
                out.extend_from_slice(&col_tag(*c).to_le_bytes());
            }
            match kind {
                BindingKind::Scalar => {
                    leaf(&mut body, value, name)?;
                    1
                }
                BindingKind::Subset => {
                    let elems = value.as_set().expect("set-valued constant");
                    for e in elems {
                        leaf(&mut body, e, name)?;
                    }
                    elems.len()
                }
                BindingKind::Function | BindingKind::Relation => {
                    let elems = value.as_set().expect("set-valued constant");
                    for p in elems {
                        pair(&mut body, p, name)?;
                    }
                    elems.len()
                }
                BindingKind::FunFun => {
                    let elems = value.as_set().expect("set-valued constant");
                    for p in elems {
                        let (d, inner) = p.as_pair().expect("pair");
                        let inner = inner.as_set().expect("inner function");
                        leaf(&mut body, d, name)?;
                        body.extend_from_slice(&u32_of(inner.len(), name, "inner count")?.to_le_bytes());
                        for q in inner {
                            pair(&mut body, q, name)?;
                        }
                    }
                    elems.len()
                }
                BindingKind::Set => unreachable!("sets are not constants"),
            }
        }
    };
    out.extend_from_slice(&u32_of(count, name, "element count")?.to_le_bytes());
    out.extend_from_slice(&u32_of(body.len(), name, "section length")?.to_le_bytes());
    out.extend_from_slice(&body);
    Ok(())
}

/// Canonical message for a dataset.
pub fn encode(ds: &Dataset) -> Result<Vec<u8>, EncodeError> {
    let mut sections: Vec<Section> = Vec::new();
    for (id, u) in ds.universes.iter() {
        let set = &ds.schema.sets[id as usize];
        sections.push(Section {
            name: &set.name,
            body: Body::Set {
                enumerated: set.enumerated.is_some(),
                keys: u.keys(),
            },
        });
    }
    for c in &ds.schema.constants {
        sections.push(Section {
            name: &c.name,
            body: Body::Const {
                kind: c.kind,
                cols: &c.cols,
                value: ds.value(&c.name).expect("every constant has a value"),
            },
        });
    }
    sections.sort_by(|a, b| a.name.as_bytes().cmp(b.name.as_bytes()));

    let mut payload = Vec::new();
    for s in &sections {
        section(&mut payload, s)?;
    }
    let total = u32_of(HEADER_LEN + payload.len(), "header", "message length")?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&u32_of(sections.len(), "header", "section count")?.to_le_bytes());
    out.extend_from_slice(&total.to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}
