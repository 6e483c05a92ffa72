//! Model-independent XML layout for datasets, used by the binary codec.
//!
//! ```text
//! <dataset>
//!   <set name="t_block"><e k="b1"/>...</set>
//!   <set name="t_dir" enumerated="true"><e k="c_upward"/>...</set>
//!   <const name="k" kind="scalar" cols="INT"><v x="5"/></const>
//!   <const name="s" kind="subset" cols="t_block"><v x="b1"/></const>
//!   <const name="f" kind="function" cols="t_block INT"><p d="b1" r="10"/></const>
//!   <const name="g" kind="funfun" cols="A B C"><p d="a"><q d="b" r="c"/></p></const>
//! </dataset>
//! ```
//!
//! Integers are written raw (already scaled).

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{check_functional, BindingKind, ColType, ConstSchema, Dataset, LoadError, Schema, SetSchema};
use crate::value::{Atom, Int, Universes, Value};

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn leaf(v: &Value, u: &Universes) -> String {
    escape(&v.display(u).to_string())
}

pub fn write_canonical(ds: &Dataset) -> String {
    let u = &ds.universes;
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<dataset>\n");
    for (id, s) in ds.schema.sets.iter().enumerate() {
        let enumerated = if s.enumerated.is_some() { " enumerated=\"true\"" } else { "" };
        let _ = write!(out, "  <set name=\"{}\"{enumerated}>", escape(&s.name));
        for k in u.get(id as u32).keys() {
            let _ = write!(out, "<e k=\"{}\"/>", escape(k));
        }
        out.push_str("</set>\n");
    }
    for c in &ds.schema.constants {
        let cols: Vec<&str> = c.cols.iter().map(|col| ds.schema.col_name(*col)).collect();
        let _ = writeln!(
            out,
            "  <const name=\"{}\" kind=\"{}\" cols=\"{}\">",
            escape(&c.name),
            c.kind,
            escape(&cols.join(" "))
        );
        let value = ds.value(&c.name).expect("every constant has a value");
        let elems: Vec<&Value> = match c.kind {
            BindingKind::Scalar => vec![value],
            _ => value.as_set().expect("set-valued constant").iter().collect(),
        };
        for e in elems {
            match c.kind {
                BindingKind::Scalar | BindingKind::Subset => {
                    let _ = writeln!(out, "    <v x=\"{}\"/>", leaf(e, u));
                }
                BindingKind::Function | BindingKind::Relation => {
                    let (d, r) = e.as_pair().expect("pair");
                    let _ = writeln!(out, "    <p d=\"{}\" r=\"{}\"/>", leaf(d, u), leaf(r, u));
                }
                BindingKind::FunFun => {
                    let (d, inner) = e.as_pair().expect("pair");
                    let _ = write!(out, "    <p d=\"{}\">", leaf(d, u));
                    for q in inner.as_set().expect("inner function") {
                        let (x, y) = q.as_pair().expect("pair");
                        let _ = write!(out, "<q d=\"{}\" r=\"{}\"/>", leaf(x, u), leaf(y, u));
                    }
                    out.push_str("</p>\n");
                }
                BindingKind::Set => unreachable!(),
            }
        }
        out.push_str("  </const>\n");
    }
    out.push_str("</dataset>\n");
    out
}

fn bad(msg: impl Into<String>) -> LoadError {
    LoadError::Canonical(msg.into())
}

fn attr<'a>(n: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str, LoadError> {
    n.attribute(name)
        .ok_or_else(|| bad(format!("<{}> without `{name}` attribute", n.tag_name().name())))
}

fn parse_leaf(col: ColType, text: &str, u: &Universes, constant: &str) -> Result<Value, LoadError> {
    match col {
        ColType::Int => text
            .parse::<num_bigint::BigInt>()
            .map(|b| Value::Int(Int::from_big(b)))
            .map_err(|_| bad(format!("`{constant}`: bad integer `{text}`"))),
        ColType::Bool => match text {
            "TRUE" => Ok(Value::Bool(true)),
            "FALSE" => Ok(Value::Bool(false)),
            _ => Err(bad(format!("`{constant}`: bad boolean `{text}`"))),
        },
        ColType::Atom(id) => u
            .get(id)
            .lookup(text)
            .map(|index| Value::Atom(Atom { set: id, index }))
            .ok_or_else(|| bad(format!("`{constant}`: `{text}` is not in {}", u.get(id).name))),
    }
}

fn elements<'a, 'i>(n: roxmltree::Node<'a, 'i>) -> impl Iterator<Item = roxmltree::Node<'a, 'i>> {
    n.children().filter(|c| c.is_element())
}

pub fn read_canonical(xml: &str) -> Result<Dataset, LoadError> {
    let doc = roxmltree::Document::parse(xml)?;
    let root = doc.root_element();
    if root.tag_name().name() != "dataset" {
        return Err(bad("root element must be <dataset>"));
    }
    let set_nodes: Vec<_> = elements(root).filter(|n| n.tag_name().name() == "set").collect();
    let const_nodes: Vec<_> = elements(root).filter(|n| n.tag_name().name() == "const").collect();
    if let Some(other) = elements(root).find(|n| !matches!(n.tag_name().name(), "set" | "const")) {
        return Err(bad(format!("unexpected <{}>", other.tag_name().name())));
    }

    let mut schema = Schema::default();
    let mut set_keys: Vec<(String, Vec<String>)> = Vec::new();
    for n in &set_nodes {
        let name = attr(*n, "name")?.to_string();
        let keys = elements(*n).map(|e| attr(e, "k").map(str::to_string)).collect::<Result<Vec<_>, _>>()?;
        let enumerated = match n.attribute("enumerated") {
            None => None,
            Some("true") => Some(keys.clone()),
            Some(v) => return Err(bad(format!("bad enumerated flag `{v}`"))),
        };
        schema.sets.push(SetSchema {
            name: name.clone(),
            enumerated,
        });
        set_keys.push((name, keys));
    }
    schema.sets.sort_by(|a, b| a.name.cmp(&b.name));
    if schema.sets.windows(2).any(|w| w[0].name == w[1].name) {
        return Err(bad("duplicate set name"));
    }
    let mut universes = Universes::new(schema.sets.iter().map(|s| s.name.as_str()));
    for (name, keys) in &set_keys {
        let u = universes.get_mut(universes.id(name).expect("declared"));
        for k in keys {
            if u.lookup(k).is_some() {
                return Err(bad(format!("duplicate element `{k}` in set `{name}`")));
            }
            u.intern(k);
        }
    }

    let mut values = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    for n in &const_nodes {
        let name = attr(*n, "name")?.to_string();
        let kind = BindingKind::parse(attr(*n, "kind")?)
            .filter(|k| *k != BindingKind::Set)
            .ok_or_else(|| bad(format!("`{name}`: bad kind")))?;
        let cols = attr(*n, "cols")?
            .split_whitespace()
            .map(|c| schema.parse_col(c).ok_or_else(|| bad(format!("`{name}`: unknown column type `{c}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if cols.len() != kind.arity() {
            return Err(bad(format!("`{name}`: {kind} needs {} column(s)", kind.arity())));
        }
        if values.contains_key(&name) || schema.set_id(&name).is_some() {
            return Err(bad(format!("duplicate name `{name}`")));
        }
        let leafof = |i: usize, node: roxmltree::Node, a: &str| parse_leaf(cols[i], attr(node, a)?, &universes, &name);
        let recs: Vec<_> = elements(*n).collect();
        let value = match kind {
            BindingKind::Scalar => {
                if recs.len() != 1 {
                    return Err(bad(format!("`{name}`: scalar needs exactly one <v>")));
                }
                leafof(0, recs[0], "x")?
            }
            BindingKind::Subset => Value::set_from(recs.iter().map(|r| leafof(0, *r, "x")).collect::<Result<_, _>>()?),
            BindingKind::Function | BindingKind::Relation => {
                let pairs = recs
                    .iter()
                    .map(|r| Ok(Value::pair(leafof(0, *r, "d")?, leafof(1, *r, "r")?)))
                    .collect::<Result<Vec<_>, LoadError>>()?;
                let v = Value::set_from(pairs);
                if kind == BindingKind::Function {
                    check_functional(&name, v.as_set().expect("set"), &universes)?;
                }
                v
            }
            BindingKind::FunFun => {
                let mut outer = Vec::new();
                for r in &recs {
                    let d = leafof(0, *r, "d")?;
                    let inner = elements(*r)
                        .map(|q| Ok(Value::pair(leafof(1, q, "d")?, leafof(2, q, "r")?)))
                        .collect::<Result<Vec<_>, LoadError>>()?;
                    let inner = Value::set_from(inner);
                    check_functional(&name, inner.as_set().expect("set"), &universes)?;
                    outer.push(Value::pair(d, inner));
                }
                let v = Value::set_from(outer);
                check_functional(&name, v.as_set().expect("set"), &universes)?;
                v
            }
            BindingKind::Set => unreachable!(),
        };
        schema.constants.push(ConstSchema {
            name: name.clone(),
            kind,
            cols,
        });
        provenance.insert(name.clone(), "canonical".to_string());
        values.insert(name, value);
    }
    schema.constants.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(Dataset::from_parts(schema, universes, values, provenance))
}
