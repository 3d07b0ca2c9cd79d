//! Nested text form: `(q i (subtree0) (subtree1))`, `(leaf)`, `(leaf s)`.

use std::fmt;

use super::{DecisionTree, Node, NodeId};
use crate::error::{Error, Result};

impl DecisionTree {
    fn write_node(&self, v: NodeId, out: &mut String) {
        match self.node(v) {
            Node::Leaf { label: None } => out.push_str("(leaf)"),
            Node::Leaf { label: Some(s) } => {
                out.push_str("(leaf ");
                out.push_str(s);
                out.push(')');
            }
            Node::Query { index, children } => {
                out.push_str(&format!("(q {index} "));
                self.write_node(children[0], out);
                out.push(' ');
                self.write_node(children[1], out);
                out.push(')');
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_node(0, &mut s);
        s
    }

    /// Parses the nested text form. When `arity` is `None` the largest
    /// queried index is used.
    pub fn parse(text: &str, arity: Option<usize>) -> Result<DecisionTree> {
        let tokens = tokenize(text)?;
        let mut pos = 0;
        let max_index = tokens
            .windows(2)
            .filter(|w| w[0] == "q")
            .filter_map(|w| w[1].parse::<usize>().ok())
            .max()
            .unwrap_or(0);
        let arity = arity.unwrap_or(max_index);
        let tree = parse_node(&tokens, &mut pos, arity)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("trailing input after tree at token {pos}")));
        }
        Ok(tree)
    }
}

impl fmt::Display for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn tokenize(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    if out.is_empty() {
        return Err(Error::Parse("empty tree".into()));
    }
    Ok(out)
}

fn expect(tokens: &[String], pos: &mut usize, want: &str) -> Result<()> {
    match tokens.get(*pos) {
        Some(t) if t == want => {
            *pos += 1;
            Ok(())
        }
        Some(t) => Err(Error::Parse(format!("expected `{want}`, found `{t}`"))),
        None => Err(Error::Parse(format!("expected `{want}`, found end of input"))),
    }
}

fn parse_node(tokens: &[String], pos: &mut usize, arity: usize) -> Result<DecisionTree> {
    expect(tokens, pos, "(")?;
    let head = tokens
        .get(*pos)
        .ok_or_else(|| Error::Parse("unexpected end of input".into()))?
        .clone();
    *pos += 1;
    let tree = match head.as_str() {
        "leaf" => match tokens.get(*pos).map(String::as_str) {
            Some(")") => DecisionTree::leaf(arity, None),
            Some("(") | None => return Err(Error::Parse("malformed leaf".into())),
            Some(label) => {
                *pos += 1;
                DecisionTree::labeled_leaf(arity, label)
            }
        },
        "q" => {
            let index: usize = tokens
                .get(*pos)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse("query needs an index".into()))?;
            *pos += 1;
            let zero = parse_node(tokens, pos, arity)?;
            let one = parse_node(tokens, pos, arity)?;
            DecisionTree::branch(index, zero, one).map_err(|e| Error::Parse(e.to_string()))?
        }
        other => return Err(Error::Parse(format!("unknown node kind `{other}`"))),
    };
    expect(tokens, pos, ")")?;
    Ok(tree)
}
