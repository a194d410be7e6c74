//! Concrete syntax for terms: `f(t1,...,tn)`, constants, variables and the
//! rational binder `rec X = <expr> [in <expr>]`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::{Node, NodeId, Signature, Term};
use crate::error::{Error, Result};

pub const CUT_GLYPH: &str = "▢";

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Cut,
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            '▢' | '□' => Some(Tok::Cut),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line, col });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                col,
            });
        } else {
            return Err(Error::parse(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// A parsed term together with the graph nodes named by `rec` binders.
#[derive(Clone, Debug)]
pub struct ParsedTerm {
    pub term: Term,
    pub binders: BTreeMap<String, NodeId>,
}

/// Parses a term. Identifiers resolve, in order, to an enclosing `rec`
/// binder, a declared symbol, or (if lowercase) a variable.
pub fn parse_term(src: &str, sig: &Signature) -> Result<Term> {
    parse_term_with_binders(src, sig).map(|p| p.term)
}

pub fn parse_term_with_binders(src: &str, sig: &Signature) -> Result<ParsedTerm> {
    parse_term_at(src, sig, 1, 1)
}

pub(crate) fn parse_term_at(src: &str, sig: &Signature, line: usize, col: usize) -> Result<ParsedTerm> {
    let toks = lex(src, line, col)?;
    let mut p = Parser {
        toks: &toks,
        at: 0,
        sig,
        nodes: Vec::new(),
        scope: Vec::new(),
        pending: HashSet::new(),
        binders: BTreeMap::new(),
        end: (line, col + src.chars().count()),
    };
    let root = p.expr()?;
    if let Some(t) = p.toks.get(p.at) {
        return Err(Error::parse(t.line, t.col, format!("unexpected trailing {:?}", t.tok)));
    }
    let (term, map) = Term {
        nodes: p.nodes,
        root,
    }
    .compact_with_map();
    let binders = p
        .binders
        .into_iter()
        .filter_map(|(name, id)| map.get(&id).map(|&n| (name, n)))
        .collect();
    Ok(ParsedTerm { term, binders })
}

struct Parser<'a> {
    toks: &'a [Spanned],
    at: usize,
    sig: &'a Signature,
    nodes: Vec<Node>,
    scope: Vec<(String, NodeId)>,
    pending: HashSet<NodeId>,
    binders: BTreeMap<String, NodeId>,
    end: (usize, usize),
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.at).map(|s| (s.line, s.col)).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(Error::parse(l, c, msg))
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {tok:?}"))
        }
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn expr(&mut self) -> Result<NodeId> {
        let name = match self.peek() {
            Some(Tok::Cut) => {
                self.at += 1;
                return Ok(self.push(Node::Cut));
            }
            Some(Tok::Ident(s)) => s.clone(),
            _ => return self.err("expected a term"),
        };
        let (line, col) = self.here();
        self.at += 1;
        if name == "rec" {
            return self.rec_binder();
        }
        if let Some(&(_, id)) = self.scope.iter().rev().find(|(n, _)| *n == name) {
            return Ok(id);
        }
        let has_args = self.peek() == Some(&Tok::LParen);
        let mut args = Vec::new();
        if has_args {
            self.at += 1;
            if self.peek() != Some(&Tok::RParen) {
                args.push(self.expr()?);
                while self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                    args.push(self.expr()?);
                }
            }
            self.expect(Tok::RParen)?;
        }
        match self.sig.arity(&name) {
            Some(a) if a == args.len() => Ok(self.push(Node::App(Arc::from(name.as_str()), args))),
            Some(a) => Err(Error::parse(
                line,
                col,
                format!("symbol `{name}` has arity {a} but got {} arguments", args.len()),
            )),
            None if !has_args && name.chars().next().is_some_and(|c| c.is_lowercase()) => {
                Ok(self.push(Node::Var(Arc::from(name.as_str()))))
            }
            None => Err(Error::parse(line, col, format!("undeclared symbol `{name}`"))),
        }
    }

    fn rec_binder(&mut self) -> Result<NodeId> {
        let name = match self.peek() {
            Some(Tok::Ident(s)) if s.chars().next().is_some_and(|c| c.is_uppercase()) => s.clone(),
            _ => return self.err("expected an uppercase recursion variable after `rec`"),
        };
        if self.sig.contains(&name) {
            return self.err(format!("recursion variable `{name}` clashes with a declared symbol"));
        }
        self.at += 1;
        self.expect(Tok::Eq)?;
        let me = self.push(Node::Cut);
        self.pending.insert(me);
        self.scope.push((name.clone(), me));
        let body = self.expr()?;
        if self.pending.contains(&body) {
            return self.err(format!("unguarded recursion for `{name}`"));
        }
        self.nodes[me] = self.nodes[body].clone();
        self.pending.remove(&me);
        self.binders.insert(name.clone(), me);
        let result = if self.peek() == Some(&Tok::Ident("in".into())) {
            self.at += 1;
            self.expr()?
        } else {
            me
        };
        self.scope.pop();
        Ok(result)
    }
}

/// Renders a term; cycles are printed with `rec` binders.
pub(crate) fn render(t: &Term) -> String {
    let mut names: HashMap<NodeId, String> = HashMap::new();
    let mut stack = Vec::new();
    let mut out = String::new();
    render_node(t, t.root, &mut stack, &mut names, &mut out);
    out
}

fn binder_name(k: usize) -> String {
    const BASE: [&str; 6] = ["X", "Y", "Z", "W", "V", "U"];
    if k < BASE.len() {
        BASE[k].to_string()
    } else {
        format!("X{}", k - BASE.len() + 1)
    }
}

fn render_node(
    t: &Term,
    id: NodeId,
    stack: &mut Vec<NodeId>,
    names: &mut HashMap<NodeId, String>,
    out: &mut String,
) {
    if stack.contains(&id) {
        let k = names.len();
        let name = names.entry(id).or_insert_with(|| binder_name(k));
        out.push_str(name);
        return;
    }
    match &t.nodes[id] {
        Node::Var(x) => out.push_str(x),
        Node::Cut => out.push_str(CUT_GLYPH),
        Node::App(f, cs) => {
            stack.push(id);
            let mut body = String::new();
            body.push_str(f);
            if !cs.is_empty() {
                body.push('(');
                for (i, &c) in cs.iter().enumerate() {
                    if i > 0 {
                        body.push(',');
                    }
                    render_node(t, c, stack, names, &mut body);
                }
                body.push(')');
            }
            stack.pop();
            if let Some(name) = names.get(&id) {
                out.push_str("rec ");
                out.push_str(name);
                out.push_str(" = ");
            }
            out.push_str(&body);
        }
    }
}
