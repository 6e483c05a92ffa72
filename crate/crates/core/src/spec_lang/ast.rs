//! Syntax tree for models, expressions and predicates.
//!
//! Equality on [`Expr`] and [`Pred`] is structural and ignores source
//! locations and type annotations, so a re-parsed pretty-printed tree
//! compares equal to the original.

use std::fmt;

use num_bigint::BigInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Types of the language. Tuples are left-nested pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    Given(String),
    Pair(Box<Type>, Box<Type>),
    Set(Box<Type>),
    /// Unconstrained element type, e.g. of `{}` used on its own.
    Var(u32),
}

impl Type {
    pub fn set(elem: Type) -> Type {
        Type::Set(Box::new(elem))
    }

    pub fn pair(l: Type, r: Type) -> Type {
        Type::Pair(Box::new(l), Box::new(r))
    }

    pub fn relation(l: Type, r: Type) -> Type {
        Type::set(Type::pair(l, r))
    }

    pub fn given(name: &str) -> Type {
        Type::Given(name.to_string())
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "INTEGER"),
            Type::Bool => write!(f, "BOOL"),
            Type::Given(n) => write!(f, "{n}"),
            Type::Pair(l, r) => write!(f, "({l} * {r})"),
            Type::Set(e) => write!(f, "POW({e})"),
            Type::Var(v) => write!(f, "?{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Union,
    Inter,
    /// Set difference or integer subtraction, resolved by operand values.
    Minus,
    /// Cartesian product or integer multiplication.
    Times,
    Plus,
    Div,
    Mod,
    FComp,
    PProd,
    DomRes,
    RanRes,
    Rel,
    PFun,
    TFun,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Union => "\\/",
            BinOp::Inter => "/\\",
            BinOp::Minus => "-",
            BinOp::Times => "*",
            BinOp::Plus => "+",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::FComp => ";",
            BinOp::PProd => "||",
            BinOp::DomRes => "<|",
            BinOp::RanRes => "|>",
            BinOp::Rel => "<->",
            BinOp::PFun => "+->",
            BinOp::TFun => "-->",
        }
    }

    pub fn is_arrow(self) -> bool {
        matches!(self, BinOp::Rel | BinOp::PFun | BinOp::TFun)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Inverse,
    Dom,
    Ran,
    Closure1,
    Card,
    Min,
    Max,
}

/// Built-in infinite or type-level sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinSet {
    Integer,
    Natural,
    Natural1,
    Bool,
}

impl BuiltinSet {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinSet::Integer => "INTEGER",
            BuiltinSet::Natural => "NATURAL",
            BuiltinSet::Natural1 => "NATURAL1",
            BuiltinSet::Bool => "BOOL",
        }
    }

    pub fn is_infinite(self) -> bool {
        !matches!(self, BuiltinSet::Bool)
    }
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: Loc,
    /// Filled in by the type checker.
    pub ty: Option<Type>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(BigInt),
    Bool(bool),
    Ident(String),
    Builtin(BuiltinSet),
    Pair(Box<Expr>, Box<Expr>),
    SetExt(Vec<Expr>),
    Interval(Box<Expr>, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Iterate(Box<Expr>, Box<Expr>),
    Image(Box<Expr>, Box<Expr>),
    Apply(Box<Expr>, Box<Expr>),
    /// `%(x,y).(P | E)`: the argument is the left-nested pair of `params`.
    Lambda {
        params: Vec<String>,
        constraint: Box<Pred>,
        body: Box<Expr>,
    },
    /// `{x,y | P}` when `output` is `None`, `{x,y . P | E}` otherwise.
    Comprehension {
        vars: Vec<String>,
        constraint: Box<Pred>,
        output: Option<Box<Expr>>,
    },
    BoolOf(Box<Pred>),
}

impl Expr {
    pub fn new(kind: ExprKind, loc: Loc) -> Self {
        Expr { kind, loc, ty: None }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Ident(n) => Some(n),
            _ => None,
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Member,
    NotMember,
    Subset,
    NotSubset,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Member => ":",
            CmpOp::NotMember => "/:",
            CmpOp::Subset => "<:",
            CmpOp::NotSubset => "/<:",
            CmpOp::Eq => "=",
            CmpOp::Neq => "/=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Pred {
    pub kind: PredKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredKind {
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Implies(Box<Pred>, Box<Pred>),
    Equiv(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    /// `!(x,y).(D => P)`; the body is always an implication.
    ForAll(Vec<String>, Box<Pred>),
    /// `#(x,y).(P)`.
    Exists(Vec<String>, Box<Pred>),
}

impl Pred {
    pub fn new(kind: PredKind, loc: Loc) -> Self {
        Pred { kind, loc }
    }

    /// Flattens nested conjunctions left to right.
    pub fn conjuncts(&self) -> Vec<&Pred> {
        let mut out = Vec::new();
        fn walk<'a>(p: &'a Pred, out: &mut Vec<&'a Pred>) {
            match &p.kind {
                PredKind::And(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                _ => out.push(p),
            }
        }
        walk(self, &mut out);
        out
    }
}

impl PartialEq for Pred {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetDecl {
    pub name: String,
    /// Elements of an enumerated set, `None` for a deferred carrier set.
    pub elements: Option<Vec<String>>,
    pub loc: Loc,
}

/// An interface constant with its typing conjunct.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantDecl {
    pub name: String,
    pub typing: Pred,
    pub ty: Option<Type>,
}

impl ConstantDecl {
    /// The set expression on the right of the typing `:` or `<:`.
    pub fn typing_set(&self) -> &Expr {
        match &self.typing.kind {
            PredKind::Cmp(_, _, set) => set,
            _ => unreachable!("typing conjuncts are comparisons"),
        }
    }

    pub fn is_subset_typing(&self) -> bool {
        matches!(self.typing.kind, PredKind::Cmp(CmpOp::Subset, _, _))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub name: String,
    pub description: String,
    pub body: Expr,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub name: String,
    pub requirement: String,
    pub description: String,
    pub pred: Pred,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpecModel {
    pub sets: Vec<SetDecl>,
    pub constants: Vec<ConstantDecl>,
    /// Conjuncts of the CONSTANTS clause that are not typing conjuncts.
    pub constraints: Vec<Pred>,
    pub definitions: Vec<Definition>,
    pub properties: Vec<Property>,
}

impl SpecModel {
    pub fn set(&self, name: &str) -> Option<&SetDecl> {
        self.sets.iter().find(|s| s.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<&ConstantDecl> {
        self.constants.iter().find(|c| c.name == name)
    }

    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.name == name)
    }

    pub fn property(&self, name: &str) -> Option<&Property> {
        self.properties.iter().find(|p| p.name == name)
    }

    /// Enumerated set owning `element`, if any.
    pub fn enum_owner(&self, element: &str) -> Option<&SetDecl> {
        self.sets.iter().find(|s| {
            s.elements
                .as_ref()
                .is_some_and(|els| els.iter().any(|e| e == element))
        })
    }
}

/// Variables of a binder pattern such as `x` or `(a |-> b) |-> c`, or `None`
/// when the expression is not built only from identifiers and `|->`.
pub fn pattern_vars(e: &Expr) -> Option<Vec<&str>> {
    fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) -> bool {
        match &e.kind {
            ExprKind::Ident(n) => {
                out.push(n);
                true
            }
            ExprKind::Pair(l, r) => walk(l, out) && walk(r, out),
            _ => false,
        }
    }
    let mut out = Vec::new();
    walk(e, &mut out).then_some(out)
}
