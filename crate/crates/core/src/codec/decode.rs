use std::collections::{BTreeMap, BTreeSet};

use crate::dataset_io::{BindingKind, ColType, ConstSchema, Dataset, Schema, SetSchema};
use crate::value::{Atom, Universes, Value};

use super::DecodeError;

const MAGIC: &[u8; 4] = b"DVAL";
const VERSION: u16 = 1;
const HEADER: usize = 20;

struct Reader<'b> {
    buf: &'b [u8],
    pos: usize,
    what: String,
}

impl<'b> Reader<'b> {
    fn new(buf: &'b [u8], what: String) -> Self {
        Reader { buf, pos: 0, what }
    }

    fn take(&mut self, n: usize) -> Result<&'b [u8], DecodeError> {
        if self.buf.len() - self.pos < n {
            return Err(DecodeError::Truncated(self.what.clone()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn malformed(section: &str, reason: impl Into<String>) -> DecodeError {
    DecodeError::Malformed {
        section: section.to_string(),
        reason: reason.into(),
    }
}

struct Raw<'b> {
    name: String,
    kind: u8,
    cols: Vec<u16>,
    count: u32,
    body: &'b [u8],
}

fn kind_of(tag: u8) -> Option<BindingKind> {
    Some(match tag {
        2 => BindingKind::Scalar,
        3 => BindingKind::Subset,
        4 => BindingKind::Function,
        5 => BindingKind::Relation,
        6 => BindingKind::FunFun,
        _ => return None,
    })
}

fn check_header(bytes: &[u8]) -> Result<u32, DecodeError> {
    if bytes.len() < MAGIC.len() {
        return Err(DecodeError::Truncated("header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    if bytes.len() < HEADER {
        return Err(DecodeError::Truncated("header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(DecodeError::Version(version));
    }
    if bytes[6] != 0 || bytes[7] != 0 {
        return Err(malformed("header", "reserved field is not zero"));
    }
    let declared = word(12);
    if declared as u64 != bytes.len() as u64 {
        return Err(DecodeError::Length {
            declared: declared as u64,
            actual: bytes.len() as u64,
        });
    }
    let crc = word(16);
    let actual = crc32fast::hash(&bytes[HEADER..]);
    if crc != actual {
        return Err(DecodeError::Crc { declared: crc, actual });
    }
    Ok(word(8))
}

fn raw_sections(payload: &[u8], count: u32) -> Result<Vec<Raw<'_>>, DecodeError> {
    let mut r = Reader::new(payload, String::new());
    let mut out = Vec::new();
    for i in 0..count {
        r.what = format!("section #{i}");
        let len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|_| malformed(&r.what, "name is not UTF-8"))?
            .to_string();
        r.what = format!("section `{name}`");
        let kind = r.u8()?;
        let ncols = r.u8()? as usize;
        let cols = (0..ncols).map(|_| r.u16()).collect::<Result<Vec<_>, _>>()?;
        let count = r.u32()?;
        let body_len = r.u32()? as usize;
        let body = r.take(body_len)?;
        out.push(Raw {
            name,
            kind,
            cols,
            count,
            body,
        });
    }
    if !r.done() {
        return Err(malformed("payload", "bytes after the last section"));
    }
    Ok(out)
}

fn set_keys(raw: &Raw) -> Result<Vec<String>, DecodeError> {
    if !raw.cols.is_empty() {
        return Err(malformed(&raw.name, "a set has no columns"));
    }
    let mut r = Reader::new(raw.body, format!("section `{}`", raw.name));
    let mut keys = Vec::new();
    let mut seen = BTreeSet::new();
    for _ in 0..raw.count {
        let len = r.u16()? as usize;
        let key = std::str::from_utf8(r.take(len)?).map_err(|_| malformed(&raw.name, "element name is not UTF-8"))?;
        if !seen.insert(key) {
            return Err(malformed(&raw.name, format!("duplicate element `{key}`")));
        }
        keys.push(key.to_string());
    }
    if !r.done() {
        return Err(malformed(&raw.name, "bytes after the last element"));
    }
    Ok(keys)
}

struct Leaves<'b, 'u> {
    r: Reader<'b>,
    name: &'b str,
    universes: &'u Universes,
}

impl Leaves<'_, '_> {
    fn leaf(&mut self, col: ColType) -> Result<Value, DecodeError> {
        let w = self.r.u32()?;
        match col {
            ColType::Int => Ok(Value::int(w as i32 as i64)),
            ColType::Bool => match w {
                0 => Ok(Value::Bool(false)),
                1 => Ok(Value::Bool(true)),
                _ => Err(malformed(self.name, format!("boolean word {w}"))),
            },
            ColType::Atom(set) => {
                let u = self.universes.get(set);
                if (w as usize) < u.len() {
                    Ok(Value::Atom(Atom { set, index: w }))
                } else {
                    Err(malformed(self.name, format!("index {w} outside `{}`", u.name)))
                }
            }
        }
    }

    fn pairs(&mut self, n: u32, d: ColType, r: ColType, functional: bool) -> Result<Value, DecodeError> {
        let mut out = Vec::new();
        for _ in 0..n {
            out.push(Value::pair(self.leaf(d)?, self.leaf(r)?));
        }
        self.canonical(out, functional)
    }

    /// Set of the decoded elements; rejects duplicates, and two pairs with
    /// one left component when `functional`.
    fn canonical(&self, elems: Vec<Value>, functional: bool) -> Result<Value, DecodeError> {
        let n = elems.len();
        let v = Value::set_from(elems);
        let s = v.as_set().expect("set");
        if s.len() != n {
            return Err(malformed(self.name, "duplicate record"));
        }
        if functional && s.windows(2).any(|w| w[0].as_pair().map(|p| p.0) == w[1].as_pair().map(|p| p.0)) {
            return Err(malformed(self.name, "two images for one element"));
        }
        Ok(v)
    }
}

/// Decodes a message. Hostile input yields an error, never a panic.
pub fn decode(bytes: &[u8]) -> Result<Dataset, DecodeError> {
    let count = check_header(bytes)?;
    let raws = raw_sections(&bytes[HEADER..], count)?;
    let mut names = BTreeSet::new();
    for raw in &raws {
        if !names.insert(raw.name.as_str()) {
            return Err(malformed(&raw.name, "duplicate section name"));
        }
    }

    let mut sets: Vec<(&Raw, bool)> = Vec::new();
    let mut consts: Vec<(&Raw, BindingKind)> = Vec::new();
    for raw in &raws {
        match raw.kind {
            0 | 1 => sets.push((raw, raw.kind == 1)),
            k => consts.push((raw, kind_of(k).ok_or_else(|| malformed(&raw.name, format!("unknown kind {k}")))?)),
        }
    }
    sets.sort_by(|a, b| a.0.name.cmp(&b.0.name));
    let mut universes = Universes::new(sets.iter().map(|(r, _)| r.name.as_str()));
    let mut schema = Schema::default();
    for (id, (raw, enumerated)) in sets.iter().enumerate() {
        let keys = set_keys(raw)?;
        let u = universes.get_mut(id as u32);
        for k in &keys {
            u.intern(k);
        }
        schema.sets.push(SetSchema {
            name: raw.name.clone(),
            enumerated: enumerated.then_some(keys),
        });
    }

    let mut values = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    for (raw, kind) in consts {
        let name = raw.name.as_str();
        if raw.cols.len() != kind.arity() {
            return Err(malformed(name, format!("{kind} needs {} column(s)", kind.arity())));
        }
        let cols = raw
            .cols
            .iter()
            .map(|&c| match c {
                0 => Ok(ColType::Int),
                1 => Ok(ColType::Bool),
                c if ((c - 2) as usize) < sets.len() => Ok(ColType::Atom((c - 2) as u32)),
                c => Err(malformed(name, format!("column type {c}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut l = Leaves {
            r: Reader::new(raw.body, format!("section `{name}`")),
            name,
            universes: &universes,
        };
        let value = match kind {
            BindingKind::Scalar => {
                if raw.count != 1 {
                    return Err(malformed(name, "a scalar has one record"));
                }
                l.leaf(cols[0])?
            }
            BindingKind::Subset => {
                let mut out = Vec::new();
                for _ in 0..raw.count {
                    out.push(l.leaf(cols[0])?);
                }
                l.canonical(out, false)?
            }
            BindingKind::Function | BindingKind::Relation => {
                l.pairs(raw.count, cols[0], cols[1], kind == BindingKind::Function)?
            }
            BindingKind::FunFun => {
                let mut out = Vec::new();
                for _ in 0..raw.count {
                    let d = l.leaf(cols[0])?;
                    let n = l.r.u32()?;
                    out.push(Value::pair(d, l.pairs(n, cols[1], cols[2], true)?));
                }
                l.canonical(out, true)?
            }
            BindingKind::Set => unreachable!("sets are decoded above"),
        };
        if !l.r.done() {
            return Err(malformed(name, "bytes after the last record"));
        }
        schema.constants.push(ConstSchema {
            name: name.to_string(),
            kind,
            cols,
        });
        provenance.insert(name.to_string(), "binary".to_string());
        values.insert(name.to_string(), value);
    }
    schema.constants.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(Dataset::from_parts(schema, universes, values, provenance))
}
