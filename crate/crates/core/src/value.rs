//! Canonical runtime values shared by both evaluators and the data layer.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

/// Unbounded integer that stays inline while it fits in an `i64`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Int {
    Small(i64),
    /// Always outside the `i64` range.
    Big(Arc<BigInt>),
}

impl Int {
    pub fn from_big(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(Arc::new(b)),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => (**b).clone(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Int::Small(v) => Some(*v),
            Int::Big(_) => None,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Int::Small(v) => *v < 0,
            Int::Big(b) => b.is_negative(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    fn binop(
        &self,
        other: &Int,
        small: impl Fn(i64, i64) -> Option<i64>,
        big: impl Fn(&BigInt, &BigInt) -> BigInt,
    ) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if let Some(r) = small(*a, *b) {
                return Int::Small(r);
            }
        }
        Int::from_big(big(&self.to_big(), &other.to_big()))
    }

    pub fn add(&self, o: &Int) -> Int {
        self.binop(o, i64::checked_add, |a, b| a + b)
    }

    pub fn sub(&self, o: &Int) -> Int {
        self.binop(o, i64::checked_sub, |a, b| a - b)
    }

    pub fn mul(&self, o: &Int) -> Int {
        self.binop(o, i64::checked_mul, |a, b| a * b)
    }

    pub fn neg(&self) -> Int {
        Int::Small(0).sub(self)
    }

    /// Floor division; `None` on a zero divisor.
    pub fn div_floor(&self, o: &Int) -> Option<Int> {
        if o.is_zero() {
            return None;
        }
        Some(self.binop(
            o,
            |a, b| a.checked_div_euclid(b).map(|_| Integer::div_floor(&a, &b)),
            Integer::div_floor,
        ))
    }

    /// Remainder with the sign of the divisor; `None` on a zero divisor.
    pub fn mod_floor(&self, o: &Int) -> Option<Int> {
        if o.is_zero() {
            return None;
        }
        Some(self.binop(
            o,
            |a, b| a.checked_rem_euclid(b).map(|_| Integer::mod_floor(&a, &b)),
            Integer::mod_floor,
        ))
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::Small(v)
    }
}

impl From<BigInt> for Int {
    fn from(v: BigInt) -> Self {
        Int::from_big(v)
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => write!(f, "{v}"),
            Int::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An element of a carrier set, identified by set id and intern index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub set: u32,
    pub index: u32,
}

/// A fully evaluated, canonical value. Set elements are sorted and
/// deduplicated, so derived equality is set equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Value {
    Int(Int),
    Bool(bool),
    Atom(Atom),
    Pair(Arc<(Value, Value)>),
    Set(Arc<Vec<Value>>),
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Int(Int::Small(v))
    }

    pub fn pair(l: Value, r: Value) -> Value {
        Value::Pair(Arc::new((l, r)))
    }

    pub fn empty_set() -> Value {
        Value::Set(Arc::new(Vec::new()))
    }

    /// Builds a set from arbitrary elements, sorting and deduplicating.
    pub fn set_from(mut elems: Vec<Value>) -> Value {
        elems.sort_unstable();
        elems.dedup();
        Value::Set(Arc::new(elems))
    }

    /// Builds a set from elements already in strictly ascending order.
    pub fn set_from_sorted(elems: Vec<Value>) -> Value {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        Value::Set(Arc::new(elems))
    }

    pub fn as_int(&self) -> Option<&Int> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<Atom> {
        match self {
            Value::Atom(a) => Some(*a),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&[Value]> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    /// Membership in a finite set value.
    pub fn set_contains(&self, v: &Value) -> bool {
        self.as_set().is_some_and(|s| s.binary_search(v).is_ok())
    }

    /// Number of scalar leaves (integers, booleans and atoms) in the value.
    pub fn leaf_count(&self) -> usize {
        match self {
            Value::Int(_) | Value::Bool(_) | Value::Atom(_) => 1,
            Value::Pair(p) => p.0.leaf_count() + p.1.leaf_count(),
            Value::Set(s) => s.iter().map(Value::leaf_count).sum(),
        }
    }

    /// Rendering cut off after roughly `max` bytes, with a trailing `...`.
    pub fn render_bounded(&self, universes: &Universes, max: usize) -> String {
        struct Capped {
            out: String,
            max: usize,
        }
        impl fmt::Write for Capped {
            fn write_str(&mut self, s: &str) -> fmt::Result {
                if self.out.len() + s.len() > self.max {
                    let room = self.max.saturating_sub(self.out.len());
                    let cut = (0..=room.min(s.len())).rev().find(|i| s.is_char_boundary(*i)).unwrap_or(0);
                    self.out.push_str(&s[..cut]);
                    return Err(fmt::Error);
                }
                self.out.push_str(s);
                Ok(())
            }
        }
        let mut c = Capped {
            out: String::new(),
            max,
        };
        if fmt::write(&mut c, format_args!("{}", self.display(universes))).is_err() {
            c.out.push_str("...");
        }
        c.out
    }

    pub fn display<'a>(&'a self, universes: &'a Universes) -> DisplayValue<'a> {
        DisplayValue {
            value: self,
            universes,
        }
    }
}

/// Range of pairs in a sorted relation whose left component equals `x`.
pub fn relation_slice<'a>(rel: &'a [Value], x: &Value) -> &'a [Value] {
    fn left(p: &Value) -> Option<&Value> {
        p.as_pair().map(|(l, _)| l)
    }
    let start = rel.partition_point(|p| left(p).is_some_and(|l| l < x));
    let len = rel[start..].partition_point(|p| left(p) == Some(x));
    &rel[start..start + len]
}

pub struct DisplayValue<'a> {
    value: &'a Value,
    universes: &'a Universes,
}

impl fmt::Display for DisplayValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Atom(a) => f.write_str(&self.universes.atom_key(*a)),
            Value::Pair(p) => write!(
                f,
                "({} |-> {})",
                p.0.display(self.universes),
                p.1.display(self.universes)
            ),
            Value::Set(s) => {
                f.write_str("{")?;
                for (i, e) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", e.display(self.universes))?;
                }
                f.write_str("}")
            }
        }
    }
}

/// The atoms of one carrier set, in intern order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Universe {
    pub name: String,
    keys: Vec<String>,
    index: HashMap<String, u32>,
}

impl Universe {
    pub fn new(name: &str) -> Self {
        Universe {
            name: name.to_string(),
            ..Default::default()
        }
    }

    /// Interns a key, returning its index.
    pub fn intern(&mut self, key: &str) -> u32 {
        if let Some(i) = self.index.get(key) {
            return *i;
        }
        let i = self.keys.len() as u32;
        self.keys.push(key.to_string());
        self.index.insert(key.to_string(), i);
        i
    }

    pub fn lookup(&self, key: &str) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub fn key(&self, index: u32) -> Option<&str> {
        self.keys.get(index as usize).map(String::as_str)
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// All carrier sets of a model. Set ids follow the alphabetical order of set
/// names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Universes {
    sets: Vec<Universe>,
}

impl Universes {
    pub fn new<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let mut names: Vec<&str> = names.into_iter().collect();
        names.sort_unstable();
        names.dedup();
        Universes {
            sets: names.into_iter().map(Universe::new).collect(),
        }
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.sets
            .binary_search_by(|u| u.name.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    pub fn get(&self, id: u32) -> &Universe {
        &self.sets[id as usize]
    }

    pub fn get_mut(&mut self, id: u32) -> &mut Universe {
        &mut self.sets[id as usize]
    }

    pub fn by_name(&self, name: &str) -> Option<&Universe> {
        self.id(name).map(|i| self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Universe)> {
        self.sets.iter().enumerate().map(|(i, u)| (i as u32, u))
    }

    /// Every atom of a carrier set as a canonical set value.
    pub fn set_value(&self, id: u32) -> Value {
        let n = self.get(id).len() as u32;
        Value::set_from_sorted((0..n).map(|index| Value::Atom(Atom { set: id, index })).collect())
    }

    pub fn atom_key(&self, a: Atom) -> String {
        self.sets
            .get(a.set as usize)
            .and_then(|u| u.key(a.index))
            .map(str::to_string)
            .unwrap_or_else(|| format!("#{}:{}", a.set, a.index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_arithmetic_promotes_and_demotes() {
        let max = Int::from(i64::MAX);
        let big = max.add(&Int::from(1));
        assert!(matches!(big, Int::Big(_)));
        assert_eq!(big.sub(&Int::from(1)), max);
        assert!(big > max);
        assert!(Int::from(i64::MIN).neg() > Int::from(0));
        assert_eq!(Int::from(-7).div_floor(&Int::from(2)), Some(Int::from(-4)));
        assert_eq!(Int::from(-7).mod_floor(&Int::from(2)), Some(Int::from(1)));
        assert_eq!(Int::from(7).mod_floor(&Int::from(-2)), Some(Int::from(-1)));
        assert_eq!(Int::from(i64::MIN).div_floor(&Int::from(-1)), Some(Int::from(i64::MAX).add(&Int::from(1))));
        assert_eq!(Int::from(1).div_floor(&Int::from(0)), None);
    }

    #[test]
    fn sets_are_canonical() {
        let a = Value::set_from(vec![Value::int(3), Value::int(1), Value::int(3)]);
        let b = Value::set_from(vec![Value::int(1), Value::int(3)]);
        assert_eq!(a, b);
        assert!(a.set_contains(&Value::int(3)));
        assert!(!a.set_contains(&Value::int(2)));
    }

    #[test]
    fn relation_slice_finds_images() {
        let rel = Value::set_from(vec![
            Value::pair(Value::int(1), Value::int(5)),
            Value::pair(Value::int(2), Value::int(6)),
            Value::pair(Value::int(2), Value::int(7)),
            Value::pair(Value::int(4), Value::int(8)),
        ]);
        let s = rel.as_set().unwrap();
        assert_eq!(relation_slice(s, &Value::int(2)).len(), 2);
        assert_eq!(relation_slice(s, &Value::int(3)).len(), 0);
        assert_eq!(relation_slice(s, &Value::int(4)).len(), 1);
    }

    #[test]
    fn universes_render_keys() {
        let mut u = Universes::new(["t_dir", "t_block"]);
        let blk = u.id("t_block").unwrap();
        assert_eq!(blk, 0);
        let i = u.get_mut(blk).intern("b7");
        let v = Value::pair(Value::Atom(Atom { set: blk, index: i }), Value::Bool(true));
        assert_eq!(v.display(&u).to_string(), "(b7 |-> TRUE)");
    }
}
