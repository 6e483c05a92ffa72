//! Recursive descent parser for model files, expressions and predicates.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

pub type ParseResult<T> = Result<T, ParseError>;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(source: &str) -> ParseResult<Self> {
        Ok(Parser {
            tokens: tokenize(source)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn loc(&self) -> Loc {
        self.tokens[self.pos].loc
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::new(self.loc(), expected, &self.peek().to_string())
    }

    fn expect(&mut self, tok: Tok) -> ParseResult<Loc> {
        if self.peek() == &tok {
            Ok(self.advance().loc)
        } else {
            Err(self.error(&tok.to_string()))
        }
    }

    fn ident(&mut self) -> ParseResult<(String, Loc)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let loc = self.advance().loc;
                Ok((name, loc))
            }
            _ => Err(self.error("identifier")),
        }
    }

    pub fn at_end(&self) -> bool {
        self.peek() == &Tok::Eof
    }

    pub fn expect_end(&self) -> ParseResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    // ---- model clauses ------------------------------------------------

    pub fn parse_model_syntax(&mut self) -> ParseResult<RawModel> {
        let mut raw = RawModel::default();
        if self.eat(&Tok::Sets) {
            loop {
                raw.sets.push(self.set_decl()?);
                if !self.eat(&Tok::Semi) {
                    break;
                }
            }
        }
        if self.eat(&Tok::Constants) {
            raw.constants = Some(self.parse_pred()?);
        }
        if self.eat(&Tok::Definitions) {
            while matches!(self.peek(), Tok::Annot(_) | Tok::Ident(_)) {
                let annots = self.annotations()?;
                let (name, loc) = self.ident()?;
                self.expect(Tok::DefEq)?;
                let body = self.parse_expr()?;
                raw.definitions.push((annots, name, body, loc));
            }
        }
        if self.eat(&Tok::Properties) {
            while matches!(self.peek(), Tok::Annot(_) | Tok::Ident(_)) {
                let annots = self.annotations()?;
                let (name, loc) = self.ident()?;
                self.expect(Tok::DefEq)?;
                let pred = self.parse_pred()?;
                raw.properties.push((annots, name, pred, loc));
            }
        }
        if !self.at_end() {
            return Err(self.error("clause keyword, annotation or end of input"));
        }
        Ok(raw)
    }

    fn set_decl(&mut self) -> ParseResult<SetDecl> {
        let (name, loc) = self.ident()?;
        let elements = if self.eat(&Tok::Eq) {
            self.expect(Tok::LBrace)?;
            let mut els = vec![self.ident()?.0];
            while self.eat(&Tok::Comma) {
                els.push(self.ident()?.0);
            }
            self.expect(Tok::RBrace)?;
            Some(els)
        } else {
            None
        };
        Ok(SetDecl { name, elements, loc })
    }

    fn annotations(&mut self) -> ParseResult<Annotations> {
        let mut a = Annotations::default();
        while let Tok::Annot(kind) = self.peek().clone() {
            let loc = self.advance().loc;
            match kind.as_str() {
                "desc" => match self.advance().tok {
                    Tok::Str(s) => a.desc = Some(s),
                    other => return Err(ParseError::new(loc, "description string", &other.to_string())),
                },
                "req" => match self.advance().tok {
                    Tok::Str(s) | Tok::Ident(s) => a.req = Some(s),
                    other => return Err(ParseError::new(loc, "requirement tag", &other.to_string())),
                },
                other => return Err(ParseError::new(loc, "`@desc` or `@req`", &format!("`@{other}`"))),
            }
        }
        Ok(a)
    }

    // ---- predicates ---------------------------------------------------

    pub fn parse_pred(&mut self) -> ParseResult<Pred> {
        let mut left = self.implies()?;
        while self.peek() == &Tok::Equiv {
            let loc = self.advance().loc;
            let right = self.implies()?;
            left = Pred::new(PredKind::Equiv(Box::new(left), Box::new(right)), loc);
        }
        Ok(left)
    }

    fn implies(&mut self) -> ParseResult<Pred> {
        let left = self.or()?;
        if self.peek() == &Tok::Implies {
            let loc = self.advance().loc;
            let right = self.implies()?;
            return Ok(Pred::new(PredKind::Implies(Box::new(left), Box::new(right)), loc));
        }
        Ok(left)
    }

    fn or(&mut self) -> ParseResult<Pred> {
        let mut left = self.and()?;
        while self.peek() == &Tok::Or {
            let loc = self.advance().loc;
            let right = self.and()?;
            left = Pred::new(PredKind::Or(Box::new(left), Box::new(right)), loc);
        }
        Ok(left)
    }

    fn and(&mut self) -> ParseResult<Pred> {
        let mut left = self.pred_unary()?;
        while self.peek() == &Tok::Amp {
            let loc = self.advance().loc;
            let right = self.pred_unary()?;
            left = Pred::new(PredKind::And(Box::new(left), Box::new(right)), loc);
        }
        Ok(left)
    }

    fn pred_unary(&mut self) -> ParseResult<Pred> {
        let loc = self.loc();
        match self.peek() {
            Tok::Not => {
                self.advance();
                let inner = self.pred_unary()?;
                Ok(Pred::new(PredKind::Not(Box::new(inner)), loc))
            }
            Tok::Bang | Tok::Hash => {
                let universal = self.advance().tok == Tok::Bang;
                let vars = self.binder_vars()?;
                self.expect(Tok::Dot)?;
                self.expect(Tok::LParen)?;
                let body = self.parse_pred()?;
                self.expect(Tok::RParen)?;
                if universal {
                    if !matches!(body.kind, PredKind::Implies(..)) {
                        return Err(ParseError::new(body.loc, "`=>` in universal quantifier body", "no implication"));
                    }
                    Ok(Pred::new(PredKind::ForAll(vars, Box::new(body)), loc))
                } else {
                    Ok(Pred::new(PredKind::Exists(vars, Box::new(body)), loc))
                }
            }
            Tok::LParen => {
                let save = self.pos;
                let attempt = (|| {
                    self.advance();
                    let p = self.parse_pred()?;
                    self.expect(Tok::RParen)?;
                    Ok::<_, ParseError>(p)
                })();
                match attempt {
                    Ok(p) if !continues_expression(self.peek()) => Ok(p),
                    first => {
                        let after_first = self.pos;
                        self.pos = save;
                        match self.comparison() {
                            Ok(p) => Ok(p),
                            Err(e2) => match first {
                                Err(e1) if e1.loc > e2.loc => Err(e1),
                                Ok(_) if self.tokens[after_first].loc > e2.loc => {
                                    self.pos = after_first;
                                    Err(self.error("logical connective"))
                                }
                                _ => Err(e2),
                            },
                        }
                    }
                }
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> ParseResult<Pred> {
        let left = self.parse_expr()?;
        let op = match self.peek() {
            Tok::Colon => CmpOp::Member,
            Tok::NotMember => CmpOp::NotMember,
            Tok::Subset => CmpOp::Subset,
            Tok::NotSubset => CmpOp::NotSubset,
            Tok::Eq => CmpOp::Eq,
            Tok::Neq => CmpOp::Neq,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Err(self.error("comparison operator")),
        };
        let loc = self.advance().loc;
        let right = self.parse_expr()?;
        Ok(Pred::new(PredKind::Cmp(op, Box::new(left), Box::new(right)), loc))
    }

    fn binder_vars(&mut self) -> ParseResult<Vec<String>> {
        if self.eat(&Tok::LParen) {
            let mut vars = vec![self.ident()?.0];
            while self.eat(&Tok::Comma) {
                vars.push(self.ident()?.0);
            }
            self.expect(Tok::RParen)?;
            Ok(vars)
        } else {
            let mut vars = vec![self.ident()?.0];
            while self.eat(&Tok::Maps) {
                vars.push(self.ident()?.0);
            }
            Ok(vars)
        }
    }

    // ---- expressions --------------------------------------------------

    pub fn parse_expr(&mut self) -> ParseResult<Expr> {
        let left = self.maps()?;
        let op = match self.peek() {
            Tok::RelArrow => BinOp::Rel,
            Tok::PFunArrow => BinOp::PFun,
            Tok::TFunArrow => BinOp::TFun,
            _ => return Ok(left),
        };
        let loc = self.advance().loc;
        let right = self.parse_expr()?;
        Ok(Expr::new(ExprKind::Binary(op, Box::new(left), Box::new(right)), loc))
    }

    fn maps(&mut self) -> ParseResult<Expr> {
        let mut left = self.set_ops()?;
        while self.peek() == &Tok::Maps {
            let loc = self.advance().loc;
            let right = self.set_ops()?;
            left = Expr::new(ExprKind::Pair(Box::new(left), Box::new(right)), loc);
        }
        Ok(left)
    }

    fn set_ops(&mut self) -> ParseResult<Expr> {
        let mut left = self.interval()?;
        loop {
            let op = match self.peek() {
                Tok::Union => BinOp::Union,
                Tok::Inter => BinOp::Inter,
                Tok::Semi => BinOp::FComp,
                Tok::PProd => BinOp::PProd,
                Tok::DomRes => BinOp::DomRes,
                Tok::RanRes => BinOp::RanRes,
                _ => return Ok(left),
            };
            let loc = self.advance().loc;
            let right = self.interval()?;
            left = Expr::new(ExprKind::Binary(op, Box::new(left), Box::new(right)), loc);
        }
    }

    fn interval(&mut self) -> ParseResult<Expr> {
        let left = self.additive()?;
        if self.peek() == &Tok::DotDot {
            let loc = self.advance().loc;
            let right = self.additive()?;
            return Ok(Expr::new(ExprKind::Interval(Box::new(left), Box::new(right)), loc));
        }
        Ok(left)
    }

    fn additive(&mut self) -> ParseResult<Expr> {
        let mut left = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Plus,
                Tok::Minus => BinOp::Minus,
                _ => return Ok(left),
            };
            let loc = self.advance().loc;
            let right = self.multiplicative()?;
            left = Expr::new(ExprKind::Binary(op, Box::new(left), Box::new(right)), loc);
        }
    }

    fn multiplicative(&mut self) -> ParseResult<Expr> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Times,
                Tok::Slash => BinOp::Div,
                Tok::Mod => BinOp::Mod,
                _ => return Ok(left),
            };
            let loc = self.advance().loc;
            let right = self.unary()?;
            left = Expr::new(ExprKind::Binary(op, Box::new(left), Box::new(right)), loc);
        }
    }

    fn unary(&mut self) -> ParseResult<Expr> {
        if self.peek() == &Tok::Minus {
            let loc = self.advance().loc;
            if let Tok::Int(n) = self.peek().clone() {
                self.advance();
                let lit = Expr::new(ExprKind::Int(-n), loc);
                return self.postfix(lit);
            }
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(inner)), loc));
        }
        let prim = self.primary()?;
        self.postfix(prim)
    }

    fn postfix(&mut self, mut e: Expr) -> ParseResult<Expr> {
        loop {
            match self.peek() {
                Tok::Tilde => {
                    let loc = self.advance().loc;
                    e = Expr::new(ExprKind::Unary(UnOp::Inverse, Box::new(e)), loc);
                }
                Tok::LParen => {
                    let loc = self.advance().loc;
                    let mut arg = self.parse_expr()?;
                    while self.peek() == &Tok::Comma {
                        let cloc = self.advance().loc;
                        let next = self.parse_expr()?;
                        arg = Expr::new(ExprKind::Pair(Box::new(arg), Box::new(next)), cloc);
                    }
                    self.expect(Tok::RParen)?;
                    e = Expr::new(ExprKind::Apply(Box::new(e), Box::new(arg)), loc);
                }
                Tok::LBracket => {
                    let loc = self.advance().loc;
                    let arg = self.parse_expr()?;
                    self.expect(Tok::RBracket)?;
                    e = Expr::new(ExprKind::Image(Box::new(e), Box::new(arg)), loc);
                }
                _ => return Ok(e),
            }
        }
    }

    fn primary(&mut self) -> ParseResult<Expr> {
        let loc = self.loc();
        let kind = match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                ExprKind::Int(n)
            }
            Tok::True => {
                self.advance();
                ExprKind::Bool(true)
            }
            Tok::False => {
                self.advance();
                ExprKind::Bool(false)
            }
            Tok::Ident(n) => {
                self.advance();
                ExprKind::Ident(n)
            }
            Tok::Integer | Tok::Natural | Tok::Natural1 | Tok::BoolSet => {
                let b = match self.advance().tok {
                    Tok::Integer => BuiltinSet::Integer,
                    Tok::Natural => BuiltinSet::Natural,
                    Tok::Natural1 => BuiltinSet::Natural1,
                    _ => BuiltinSet::Bool,
                };
                ExprKind::Builtin(b)
            }
            Tok::LParen => {
                self.advance();
                let mut e = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                e.loc = loc;
                return Ok(e);
            }
            Tok::LBrace => return self.braces(),
            Tok::Percent => {
                self.advance();
                let params = self.binder_vars()?;
                self.expect(Tok::Dot)?;
                self.expect(Tok::LParen)?;
                let constraint = self.parse_pred()?;
                self.expect(Tok::Bar)?;
                let body = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                ExprKind::Lambda {
                    params,
                    constraint: Box::new(constraint),
                    body: Box::new(body),
                }
            }
            Tok::BoolFn => {
                self.advance();
                self.expect(Tok::LParen)?;
                let p = self.parse_pred()?;
                self.expect(Tok::RParen)?;
                ExprKind::BoolOf(Box::new(p))
            }
            Tok::Iterate => {
                self.advance();
                self.expect(Tok::LParen)?;
                let r = self.parse_expr()?;
                self.expect(Tok::Comma)?;
                let n = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                ExprKind::Iterate(Box::new(r), Box::new(n))
            }
            Tok::Closure1 | Tok::Dom | Tok::Ran | Tok::Card | Tok::Min | Tok::Max => {
                let op = match self.advance().tok {
                    Tok::Closure1 => UnOp::Closure1,
                    Tok::Dom => UnOp::Dom,
                    Tok::Ran => UnOp::Ran,
                    Tok::Card => UnOp::Card,
                    Tok::Min => UnOp::Min,
                    _ => UnOp::Max,
                };
                self.expect(Tok::LParen)?;
                let arg = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                ExprKind::Unary(op, Box::new(arg))
            }
            _ => return Err(self.error("expression")),
        };
        Ok(Expr::new(kind, loc))
    }

    fn braces(&mut self) -> ParseResult<Expr> {
        let loc = self.expect(Tok::LBrace)?;
        if self.eat(&Tok::RBrace) {
            return Ok(Expr::new(ExprKind::SetExt(Vec::new()), loc));
        }
        // `{x, y | P}` or `{x, y . P | E}`
        let mut k = 0;
        while matches!(self.peek_at(k), Tok::Ident(_)) {
            k += 1;
            if self.peek_at(k) == &Tok::Comma {
                k += 1;
            } else {
                break;
            }
        }
        if k > 0 && matches!(self.peek_at(k), Tok::Bar | Tok::Dot) && matches!(self.peek_at(k - 1), Tok::Ident(_)) {
            let mut vars = vec![self.ident()?.0];
            while self.eat(&Tok::Comma) {
                vars.push(self.ident()?.0);
            }
            let with_output = self.advance().tok == Tok::Dot;
            let constraint = self.parse_pred()?;
            let output = if with_output {
                self.expect(Tok::Bar)?;
                Some(Box::new(self.parse_expr()?))
            } else {
                None
            };
            self.expect(Tok::RBrace)?;
            return Ok(Expr::new(
                ExprKind::Comprehension {
                    vars,
                    constraint: Box::new(constraint),
                    output,
                },
                loc,
            ));
        }
        let mut items = vec![self.parse_expr()?];
        while self.eat(&Tok::Comma) {
            items.push(self.parse_expr()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(Expr::new(ExprKind::SetExt(items), loc))
    }
}

fn continues_expression(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::Colon
            | Tok::NotMember
            | Tok::Subset
            | Tok::NotSubset
            | Tok::Eq
            | Tok::Neq
            | Tok::Lt
            | Tok::Le
            | Tok::Gt
            | Tok::Ge
            | Tok::Maps
            | Tok::Union
            | Tok::Inter
            | Tok::Minus
            | Tok::Plus
            | Tok::Star
            | Tok::Slash
            | Tok::Mod
            | Tok::Semi
            | Tok::PProd
            | Tok::DomRes
            | Tok::RanRes
            | Tok::DotDot
            | Tok::Tilde
            | Tok::LBracket
            | Tok::LParen
            | Tok::RelArrow
            | Tok::PFunArrow
            | Tok::TFunArrow
    )
}

#[derive(Debug, Default)]
pub struct Annotations {
    pub desc: Option<String>,
    pub req: Option<String>,
}

/// Model as parsed, before name resolution.
#[derive(Debug, Default)]
pub struct RawModel {
    pub sets: Vec<SetDecl>,
    pub constants: Option<Pred>,
    pub definitions: Vec<(Annotations, String, Expr, Loc)>,
    pub properties: Vec<(Annotations, String, Pred, Loc)>,
}

pub fn parse_expr(source: &str) -> ParseResult<Expr> {
    let mut p = Parser::new(source)?;
    let e = p.parse_expr()?;
    p.expect_end()?;
    Ok(e)
}

pub fn parse_pred(source: &str) -> ParseResult<Pred> {
    let mut p = Parser::new(source)?;
    let e = p.parse_pred()?;
    p.expect_end()?;
    Ok(e)
}
