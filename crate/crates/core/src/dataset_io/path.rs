//! A small path language over XML documents.
//!
//! Grammar: `['/'] step ('/' step)* '/' leaf` where a step is `name`, `*`,
//! `..` or `.`, optionally followed by `[@attr='value']` filters, and the
//! leaf is `@attr` or `text()`. Absolute paths start at the document root.

use std::fmt;

use roxmltree::{Node, NodeId};

use super::LoadError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Step {
    Child { name: Option<String>, filters: Vec<(String, String)> },
    Parent,
    Current,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Leaf {
    Attr(String),
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    source: String,
    absolute: bool,
    steps: Vec<Step>,
    leaf: Leaf,
}

/// A selected leaf value together with the element that owns it.
#[derive(Debug, Clone)]
pub struct Hit<'a, 'input> {
    pub owner: Node<'a, 'input>,
    pub value: String,
}

fn syntax(path: &str, reason: impl Into<String>) -> LoadError {
    LoadError::PathSyntax {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn split_steps(src: &str) -> Result<Vec<&str>, LoadError> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut quote: Option<char> = None;
    let mut start = 0;
    for (i, c) in src.char_indices() {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '\'' | '"') => quote = Some(c),
            (None, '[') => depth += 1,
            (None, ']') => depth = depth.checked_sub(1).ok_or_else(|| syntax(src, "unbalanced `]`"))?,
            (None, '/') if depth == 0 => {
                parts.push(&src[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if quote.is_some() || depth != 0 {
        return Err(syntax(src, "unterminated filter or quote"));
    }
    parts.push(&src[start..]);
    Ok(parts)
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn parse_filters(src: &str, mut rest: &str) -> Result<Vec<(String, String)>, LoadError> {
    let mut filters = Vec::new();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix("[@")
            .ok_or_else(|| syntax(src, format!("expected `[@attr='value']`, found `{rest}`")))?;
        let (attr, after) = inner
            .split_once('=')
            .ok_or_else(|| syntax(src, "filter without `=`"))?;
        let q = after.chars().next().filter(|c| *c == '\'' || *c == '"');
        let q = q.ok_or_else(|| syntax(src, "filter value must be quoted"))?;
        let body = &after[1..];
        let end = body.find(q).ok_or_else(|| syntax(src, "unterminated quote"))?;
        let value = &body[..end];
        rest = body[end + 1..]
            .strip_prefix(']')
            .ok_or_else(|| syntax(src, "expected `]` after filter value"))?;
        let attr = attr.trim();
        if !is_name(attr) {
            return Err(syntax(src, format!("bad attribute name `{attr}`")));
        }
        filters.push((attr.to_string(), value.to_string()));
    }
    Ok(filters)
}

impl Path {
    pub fn parse(src: &str) -> Result<Path, LoadError> {
        let (absolute, body) = match src.strip_prefix('/') {
            Some(b) => (true, b),
            None => (false, src),
        };
        let mut parts = split_steps(body)?;
        let last = parts.pop().filter(|p| !p.is_empty()).ok_or_else(|| syntax(src, "missing leaf"))?;
        let leaf = if last == "text()" {
            Leaf::Text
        } else if let Some(attr) = last.strip_prefix('@').filter(|a| is_name(a)) {
            Leaf::Attr(attr.to_string())
        } else {
            return Err(syntax(src, "path must end in `@attr` or `text()`"));
        };
        let mut steps = Vec::new();
        for part in parts {
            let step = match part {
                "" => return Err(syntax(src, "empty step")),
                ".." => Step::Parent,
                "." => Step::Current,
                _ => {
                    let split = part.find('[').unwrap_or(part.len());
                    let (name, filters) = part.split_at(split);
                    let name = match name {
                        "*" => None,
                        n if is_name(n) => Some(n.to_string()),
                        n => return Err(syntax(src, format!("bad element name `{n}`"))),
                    };
                    Step::Child {
                        name,
                        filters: parse_filters(src, filters)?,
                    }
                }
            };
            if absolute && !matches!(step, Step::Child { .. }) && steps.is_empty() {
                return Err(syntax(src, "absolute path must start with an element step"));
            }
            steps.push(step);
        }
        if absolute && steps.is_empty() {
            return Err(syntax(src, "absolute path needs at least one element step"));
        }
        Ok(Path {
            source: src.to_string(),
            absolute,
            steps,
            leaf,
        })
    }

    pub fn is_absolute(&self) -> bool {
        self.absolute
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// Evaluates the path. Absolute paths ignore `context` and start from the
    /// document; relative paths start from `context`.
    pub fn select<'a, 'input>(&self, doc: &'a roxmltree::Document<'input>, context: Option<Node<'a, 'input>>) -> Vec<Hit<'a, 'input>> {
        let start = if self.absolute {
            doc.root()
        } else {
            context.unwrap_or_else(|| doc.root_element())
        };
        let mut current: Vec<Node<'a, 'input>> = vec![start];
        for step in &self.steps {
            let mut next = Vec::new();
            for node in &current {
                match step {
                    Step::Current => next.push(*node),
                    Step::Parent => next.extend(node.parent_element()),
                    Step::Child { name, filters } => {
                        next.extend(node.children().filter(|c| {
                            c.is_element()
                                && name.as_ref().is_none_or(|n| c.tag_name().name() == n)
                                && filters.iter().all(|(a, v)| c.attribute(a.as_str()) == Some(v.as_str()))
                        }));
                    }
                }
            }
            dedup_nodes(&mut next);
            current = next;
        }
        current
            .into_iter()
            .filter_map(|owner| {
                let value = match &self.leaf {
                    Leaf::Attr(a) => owner.attribute(a.as_str())?.to_string(),
                    Leaf::Text => owner.text().unwrap_or("").trim().to_string(),
                };
                Some(Hit { owner, value })
            })
            .collect()
    }
}

fn dedup_nodes(nodes: &mut Vec<Node<'_, '_>>) {
    if nodes.len() < 2 {
        return;
    }
    let mut seen: std::collections::HashSet<NodeId> = std::collections::HashSet::new();
    nodes.retain(|n| seen.insert(n.id()));
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const XML: &str = r#"<network>
        <block id="b1" len="10"><kp>1.5</kp></block>
        <block id="b2" len="12" kind="x"><kp>2</kp></block>
        <signal id="s1" type="manoeuvre"><at block="b1"/></signal>
        <signal id="s2" type="spacing"><at block="b2"/></signal>
    </network>"#;

    fn values(path: &str, doc: &roxmltree::Document) -> Vec<String> {
        Path::parse(path).unwrap().select(doc, None).into_iter().map(|h| h.value).collect()
    }

    #[test]
    fn absolute_selection() {
        let doc = roxmltree::Document::parse(XML).unwrap();
        assert_eq!(values("/network/block/@id", &doc), ["b1", "b2"]);
        assert_eq!(values("/network/block/kp/text()", &doc), ["1.5", "2"]);
        assert_eq!(values("/network/signal[@type='manoeuvre']/@id", &doc), ["s1"]);
        assert_eq!(values("/network/*/@id", &doc), ["b1", "b2", "s1", "s2"]);
        assert_eq!(values("/network/block/@kind", &doc), ["x"]);
        assert!(values("/other/block/@id", &doc).is_empty());
    }

    #[test]
    fn relative_selection_from_owner() {
        let doc = roxmltree::Document::parse(XML).unwrap();
        let sigs = Path::parse("/network/signal/@id").unwrap().select(&doc, None);
        let rel = Path::parse("at/@block").unwrap();
        let up = Path::parse("../block[@id='b2']/@len").unwrap();
        let got: Vec<_> = sigs.iter().map(|h| rel.select(&doc, Some(h.owner))[0].value.clone()).collect();
        assert_eq!(got, ["b1", "b2"]);
        assert_eq!(up.select(&doc, Some(sigs[0].owner))[0].value, "12");
        assert_eq!(Path::parse("@id").unwrap().select(&doc, Some(sigs[1].owner))[0].value, "s2");
    }

    #[test]
    fn syntax_errors() {
        for bad in ["/network/block", "/@id", "/network//@id", "a[@x=1]/@id", "a[@x='1'/@id", "/../@id", "a/@", "a/@1x"] {
            assert!(Path::parse(bad).is_err(), "{bad}");
        }
        assert!(Path::parse("a[@x='a/b'][@y=\"c\"]/@id").is_ok());
    }
}
