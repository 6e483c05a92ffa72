//! Binding files.
//!
//! One binding per line: `name kind path [path ...] [scale N]`. Blank lines
//! and lines starting with `#` are ignored. Paths may contain spaces only
//! inside quoted filter values.

use std::fmt;

use super::path::Path;
use super::LoadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BindingKind {
    Set,
    Subset,
    Scalar,
    Function,
    Relation,
    FunFun,
}

impl BindingKind {
    pub const ALL: [BindingKind; 6] = [
        BindingKind::Set,
        BindingKind::Subset,
        BindingKind::Scalar,
        BindingKind::Function,
        BindingKind::Relation,
        BindingKind::FunFun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BindingKind::Set => "set",
            BindingKind::Subset => "subset",
            BindingKind::Scalar => "scalar",
            BindingKind::Function => "function",
            BindingKind::Relation => "relation",
            BindingKind::FunFun => "funfun",
        }
    }

    pub fn parse(s: &str) -> Option<BindingKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn path_count(self) -> usize {
        match self {
            BindingKind::Set | BindingKind::Subset | BindingKind::Scalar => 1,
            BindingKind::Function | BindingKind::Relation => 2,
            BindingKind::FunFun => 3,
        }
    }

    /// Number of scalar columns in a record of this kind.
    pub fn arity(self) -> usize {
        match self {
            BindingKind::Set | BindingKind::Subset | BindingKind::Scalar => 1,
            BindingKind::Function | BindingKind::Relation => 2,
            BindingKind::FunFun => 3,
        }
    }
}

impl fmt::Display for BindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingSpec {
    pub constant: String,
    pub kind: BindingKind,
    pub paths: Vec<Path>,
    /// Fixed-point multiplier applied to the last column.
    pub scale: Option<u64>,
    pub line: usize,
}

impl BindingSpec {
    pub fn summary(&self) -> String {
        let paths: Vec<&str> = self.paths.iter().map(Path::as_str).collect();
        let mut s = format!("{} {}", self.kind, paths.join(" "));
        if let Some(scale) = self.scale {
            s.push_str(&format!(" scale {scale}"));
        }
        s
    }
}

fn words(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut quote: Option<char> = None;
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None if c == '\'' || c == '"' => quote = Some(c),
            None if c.is_whitespace() => {
                if let Some(s) = start.take() {
                    out.push(&line[s..i]);
                }
                continue;
            }
            None => {}
        }
        start.get_or_insert(i);
    }
    if let Some(s) = start {
        out.push(&line[s..]);
    }
    out
}

pub fn parse_bindings(text: &str) -> Result<Vec<BindingSpec>, LoadError> {
    let mut specs: Vec<BindingSpec> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| LoadError::Bindings { line, message };
        let mut w = words(trimmed);
        let mut scale = None;
        if w.len() >= 2 && w[w.len() - 2] == "scale" {
            let n = w[w.len() - 1];
            let v: u64 = n.parse().map_err(|_| err(format!("bad scale `{n}`")))?;
            super::fixed::scale_digits(v).map_err(|e| err(e.to_string()))?;
            scale = Some(v);
            w.truncate(w.len() - 2);
        }
        if w.len() < 2 {
            return Err(err("expected `name kind path...`".into()));
        }
        let kind = BindingKind::parse(w[1]).ok_or_else(|| err(format!("unknown binding kind `{}`", w[1])))?;
        let paths = &w[2..];
        if paths.len() != kind.path_count() {
            return Err(err(format!(
                "a {kind} binding takes {} path(s), found {}",
                kind.path_count(),
                paths.len()
            )));
        }
        if scale.is_some() && kind == BindingKind::Set {
            return Err(err("scale is not allowed on a carrier-set binding".into()));
        }
        if specs.iter().any(|s| s.constant == w[0]) {
            return Err(err(format!("duplicate binding for `{}`", w[0])));
        }
        specs.push(BindingSpec {
            constant: w[0].to_string(),
            kind,
            paths: paths.iter().map(|p| Path::parse(p)).collect::<Result<_, _>>()?,
            scale,
            line,
        });
    }
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_kinds() {
        let text = "# blocks\n\
            t_block set /n/block/@id\n\
            s_man subset /n/signal[@type='man oeuvre']/@id\n\
            k_eps scalar /n/params/@eps scale 1000\n\
            f_len function /n/block/@id @len\n\
            r_x relation /n/block/@id next/@ref\n\
            f_ff funfun /n/a/@id b/@id @v\n";
        let specs = parse_bindings(text).unwrap();
        assert_eq!(specs.len(), 6);
        assert_eq!(specs[1].paths[0].as_str(), "/n/signal[@type='man oeuvre']/@id");
        assert_eq!(specs[2].scale, Some(1000));
        assert_eq!(specs[5].kind, BindingKind::FunFun);
        assert_eq!(specs[3].line, 5);
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in [
            "f function /n/@id",
            "f function /n/a/@id @b @c",
            "f wibble /n/a/@id",
            "f scalar /n/a/@id scale 12",
            "t set /n/a/@id scale 10",
            "f",
            "a scalar /n/@x\na scalar /n/@y",
        ] {
            assert!(parse_bindings(bad).is_err(), "{bad}");
        }
    }
}
