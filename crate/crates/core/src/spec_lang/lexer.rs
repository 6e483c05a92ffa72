//! Tokenizer for the model language.

use std::fmt;

use num_bigint::BigInt;

use super::ast::Loc;
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Str(String),
    Annot(String),
    // clause keywords
    Sets,
    Constants,
    Definitions,
    Properties,
    // expression keywords
    True,
    False,
    BoolFn,
    Closure1,
    Iterate,
    Dom,
    Ran,
    Card,
    Min,
    Max,
    Mod,
    Or,
    Not,
    Integer,
    Natural,
    Natural1,
    BoolSet,
    // punctuation and operators
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    DotDot,
    Bar,
    Maps,
    RelArrow,
    PFunArrow,
    TFunArrow,
    Union,
    Inter,
    Minus,
    Plus,
    Star,
    Slash,
    Semi,
    PProd,
    Tilde,
    DomRes,
    RanRes,
    Percent,
    Bang,
    Hash,
    Colon,
    NotMember,
    Subset,
    NotSubset,
    Eq,
    DefEq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Amp,
    Implies,
    Equiv,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(n) => return write!(f, "integer `{n}`"),
            Tok::Str(s) => return write!(f, "string {s:?}"),
            Tok::Annot(s) => return write!(f, "`@{s}`"),
            Tok::Sets => "SETS",
            Tok::Constants => "CONSTANTS",
            Tok::Definitions => "DEFINITIONS",
            Tok::Properties => "PROPERTIES",
            Tok::True => "TRUE",
            Tok::False => "FALSE",
            Tok::BoolFn => "bool",
            Tok::Closure1 => "closure1",
            Tok::Iterate => "iterate",
            Tok::Dom => "dom",
            Tok::Ran => "ran",
            Tok::Card => "card",
            Tok::Min => "min",
            Tok::Max => "max",
            Tok::Mod => "mod",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::Integer => "INTEGER",
            Tok::Natural => "NATURAL",
            Tok::Natural1 => "NATURAL1",
            Tok::BoolSet => "BOOL",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Bar => "|",
            Tok::Maps => "|->",
            Tok::RelArrow => "<->",
            Tok::PFunArrow => "+->",
            Tok::TFunArrow => "-->",
            Tok::Union => "\\/",
            Tok::Inter => "/\\",
            Tok::Minus => "-",
            Tok::Plus => "+",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Semi => ";",
            Tok::PProd => "||",
            Tok::Tilde => "~",
            Tok::DomRes => "<|",
            Tok::RanRes => "|>",
            Tok::Percent => "%",
            Tok::Bang => "!",
            Tok::Hash => "#",
            Tok::Colon => ":",
            Tok::NotMember => "/:",
            Tok::Subset => "<:",
            Tok::NotSubset => "/<:",
            Tok::Eq => "=",
            Tok::DefEq => "==",
            Tok::Neq => "/=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Amp => "&",
            Tok::Implies => "=>",
            Tok::Equiv => "<=>",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "SETS" => Tok::Sets,
        "CONSTANTS" => Tok::Constants,
        "DEFINITIONS" => Tok::Definitions,
        "PROPERTIES" => Tok::Properties,
        "TRUE" => Tok::True,
        "FALSE" => Tok::False,
        "bool" => Tok::BoolFn,
        "closure1" => Tok::Closure1,
        "iterate" => Tok::Iterate,
        "dom" => Tok::Dom,
        "ran" => Tok::Ran,
        "card" => Tok::Card,
        "min" => Tok::Min,
        "max" => Tok::Max,
        "mod" => Tok::Mod,
        "or" => Tok::Or,
        "not" => Tok::Not,
        "INTEGER" => Tok::Integer,
        "NATURAL" => Tok::Natural,
        "NATURAL1" => Tok::Natural1,
        "BOOL" => Tok::BoolSet,
        _ => return None,
    })
}

// Longest match first.
const OPERATORS: &[(&str, Tok)] = &[
    ("/<:", Tok::NotSubset),
    ("|->", Tok::Maps),
    ("<->", Tok::RelArrow),
    ("+->", Tok::PFunArrow),
    ("-->", Tok::TFunArrow),
    ("<=>", Tok::Equiv),
    ("\\/", Tok::Union),
    ("/\\", Tok::Inter),
    ("||", Tok::PProd),
    ("<|", Tok::DomRes),
    ("|>", Tok::RanRes),
    ("/:", Tok::NotMember),
    ("<:", Tok::Subset),
    ("==", Tok::DefEq),
    ("/=", Tok::Neq),
    ("<=", Tok::Le),
    (">=", Tok::Ge),
    ("=>", Tok::Implies),
    ("..", Tok::DotDot),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    (",", Tok::Comma),
    (".", Tok::Dot),
    ("|", Tok::Bar),
    ("-", Tok::Minus),
    ("+", Tok::Plus),
    ("*", Tok::Star),
    ("/", Tok::Slash),
    (";", Tok::Semi),
    ("~", Tok::Tilde),
    ("%", Tok::Percent),
    ("!", Tok::Bang),
    ("#", Tok::Hash),
    (":", Tok::Colon),
    ("=", Tok::Eq),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("&", Tok::Amp),
];

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let mut line = 1u32;
    let mut line_start = 0usize;

    while pos < bytes.len() {
        let c = bytes[pos];
        let loc = Loc {
            line,
            col: (pos - line_start + 1) as u32,
        };
        if c == b'\n' {
            pos += 1;
            line += 1;
            line_start = pos;
            continue;
        }
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if source[pos..].starts_with("//") {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            let word = &source[start..pos];
            let tok = keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()));
            tokens.push(Token { tok, loc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let n: BigInt = source[start..pos].parse().expect("digits");
            tokens.push(Token { tok: Tok::Int(n), loc });
            continue;
        }
        if c == b'@' {
            let start = pos + 1;
            pos += 1;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            if pos == start {
                return Err(ParseError::new(loc, "annotation name", "`@`"));
            }
            tokens.push(Token {
                tok: Tok::Annot(source[start..pos].to_string()),
                loc,
            });
            continue;
        }
        if c == b'"' {
            pos += 1;
            let mut text = String::new();
            loop {
                match source[pos..].chars().next() {
                    None | Some('\n') => {
                        return Err(ParseError::new(loc, "closing `\"`", "end of line"));
                    }
                    Some('"') => {
                        pos += 1;
                        break;
                    }
                    Some('\\') if source[pos + 1..].starts_with('"') => {
                        text.push('"');
                        pos += 2;
                    }
                    Some(ch) => {
                        text.push(ch);
                        pos += ch.len_utf8();
                    }
                }
            }
            tokens.push(Token { tok: Tok::Str(text), loc });
            continue;
        }
        match OPERATORS.iter().find(|(op, _)| source[pos..].starts_with(op)) {
            Some((op, tok)) => {
                pos += op.len();
                tokens.push(Token { tok: tok.clone(), loc });
            }
            None => {
                let ch = source[pos..].chars().next().unwrap_or('?');
                return Err(ParseError::new(loc, "token", &format!("character {ch:?}")));
            }
        }
    }
    let loc = Loc {
        line,
        col: (pos - line_start + 1) as u32,
    };
    tokens.push(Token { tok: Tok::Eof, loc });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn longest_operator_wins() {
        assert_eq!(
            kinds("a |-> b |> c || d | e"),
            vec![
                Tok::Ident("a".into()),
                Tok::Maps,
                Tok::Ident("b".into()),
                Tok::RanRes,
                Tok::Ident("c".into()),
                Tok::PProd,
                Tok::Ident("d".into()),
                Tok::Bar,
                Tok::Ident("e".into()),
                Tok::Eof
            ]
        );
        assert_eq!(kinds("<=> <= <: <-> <|")[..5], [Tok::Equiv, Tok::Le, Tok::Subset, Tok::RelArrow, Tok::DomRes]);
    }

    #[test]
    fn comments_and_locations() {
        let toks = tokenize("// header\n  x1 : INTEGER").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("x1".into()));
        assert_eq!(toks[0].loc, Loc { line: 2, col: 3 });
        assert_eq!(toks[2].tok, Tok::Integer);
    }

    #[test]
    fn strings_and_annotations() {
        assert_eq!(
            kinds("@desc \"say \\\"hi\\\"\""),
            vec![Tok::Annot("desc".into()), Tok::Str("say \"hi\"".into()), Tok::Eof]
        );
        assert!(tokenize("\"open").is_err());
        assert!(tokenize("a $ b").is_err());
    }
}
