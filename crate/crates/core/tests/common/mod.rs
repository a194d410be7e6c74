//! Test-side oracles: a plain tree rewriter for finite terms, an
//! eventually periodic word rewriter for unary terms, and seeded
//! generators. None of this goes through the library's matcher.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wo_core::redex::Redex;
use wo_core::term::Term;
use wo_core::trs::Trs;

pub const SP_TRS: &str = "sig S/1 P/1\nrule PS : P(S(x)) -> x\nrule SP : S(P(x)) -> x\n";
pub const SP_E_TRS: &str = "sig S/1 P/1 e/1\nrule PS : P(S(x)) -> e(x)\nrule SP : S(P(x)) -> e(x)\n";
pub const A3_TRS: &str = "sig A/1\nrule AAA : A(A(A(x))) -> A(x)\n";
pub const SWAP_TRS: &str =
    "sig f/1 g/2 a/0\nrule r1 : f(g(x,y)) -> f(g(y,x))\nrule r2 : g(a,a) -> g(a,a)\nrule r3 : a -> a\n";
pub const COLLAPSE_TRS: &str = "sig f/2 a/0 b/0\nrule F : f(x,y) -> x\n";
pub const OR_TRS: &str =
    "sig or/2 true/0 c/0 p/2\nrule L : or(true,x) -> true\nrule R : or(x,true) -> true\nrule C : c -> or(true,c)\n";
pub const STREAM_TRS: &str =
    "sig a/0 g/1 h/1 k/1 k2/1 r/1\nrule AG : a -> g(a)\nrule HK : h(x) -> k(x)\nrule KK : k(x) -> k2(x)\nrule RR : r(x) -> r(x)\n";

pub fn trs(src: &str) -> Trs {
    Trs::parse(src).expect("fixture TRS parses")
}

pub fn arc_trs(src: &str) -> Arc<Trs> {
    Arc::new(trs(src))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Finite trees

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Var(String),
    App(String, Vec<Tree>),
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Var(x) => write!(f, "{x}"),
            Tree::App(s, args) if args.is_empty() => write!(f, "{s}"),
            Tree::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Symbol table of an oracle signature.
#[derive(Clone, Debug)]
pub struct Sig(pub Vec<(&'static str, usize)>);

impl Sig {
    fn arity(&self, s: &str) -> Option<usize> {
        self.0.iter().find(|(n, _)| *n == s).map(|&(_, a)| a)
    }
}

/// Parses `f(a,x)`-style text; identifiers outside `sig` are variables.
pub fn parse_tree(src: &str, sig: &Sig) -> Tree {
    fn go(s: &[u8], i: &mut usize, sig: &Sig) -> Tree {
        while s[*i] == b' ' {
            *i += 1;
        }
        let start = *i;
        while *i < s.len() && (s[*i].is_ascii_alphanumeric() || s[*i] == b'_' || s[*i] == b'\'') {
            *i += 1;
        }
        let name = std::str::from_utf8(&s[start..*i]).unwrap().to_string();
        let mut args = Vec::new();
        if *i < s.len() && s[*i] == b'(' {
            *i += 1;
            while s[*i] != b')' {
                args.push(go(s, i, sig));
                while s[*i] == b' ' || s[*i] == b',' {
                    *i += 1;
                }
            }
            *i += 1;
        }
        match sig.arity(&name) {
            Some(a) => {
                assert_eq!(a, args.len(), "arity of {name}");
                Tree::App(name, args)
            }
            None => {
                assert!(args.is_empty(), "variable {name} applied");
                Tree::Var(name)
            }
        }
    }
    let mut i = 0;
    go(src.as_bytes(), &mut i, sig)
}

impl Tree {
    pub fn size(&self) -> usize {
        match self {
            Tree::Var(_) => 1,
            Tree::App(_, a) => 1 + a.iter().map(Tree::size).sum::<usize>(),
        }
    }

    pub fn at(&self, p: &[usize]) -> Option<&Tree> {
        match p.split_first() {
            None => Some(self),
            Some((&i, rest)) => match self {
                Tree::App(_, a) => a.get(i - 1)?.at(rest),
                Tree::Var(_) => None,
            },
        }
    }

    pub fn replace(&self, p: &[usize], u: Tree) -> Tree {
        match p.split_first() {
            None => u,
            Some((&i, rest)) => match self {
                Tree::App(s, a) => {
                    let mut a = a.clone();
                    a[i - 1] = a[i - 1].replace(rest, u);
                    Tree::App(s.clone(), a)
                }
                Tree::Var(_) => panic!("position below a variable"),
            },
        }
    }

    /// All positions, 1-based paths, in pre-order.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        if let Tree::App(_, a) = self {
            for (i, c) in a.iter().enumerate() {
                for mut p in c.positions() {
                    p.insert(0, i + 1);
                    out.push(p);
                }
            }
        }
        out
    }

    /// Positions of function symbols.
    pub fn app_positions(&self) -> Vec<Vec<usize>> {
        self.positions()
            .into_iter()
            .filter(|p| matches!(self.at(p), Some(Tree::App(..))))
            .collect()
    }

    pub fn vars_in_order(&self, out: &mut Vec<String>) {
        match self {
            Tree::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone())
                }
            }
            Tree::App(_, a) => a.iter().for_each(|c| c.vars_in_order(out)),
        }
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Tree {
        match self {
            Tree::Var(x) => Tree::Var(f(x)),
            Tree::App(s, a) => Tree::App(s.clone(), a.iter().map(|c| c.rename(f)).collect()),
        }
    }

    pub fn subst(&self, s: &BTreeMap<String, Tree>) -> Tree {
        match self {
            Tree::Var(x) => s.get(x).cloned().unwrap_or_else(|| self.clone()),
            Tree::App(f, a) => Tree::App(f.clone(), a.iter().map(|c| c.subst(s)).collect()),
        }
    }

    /// Truncation at depth `d`: nodes below become the cut symbol, while
    /// leaves at depth `d` stay.
    pub fn truncate(&self, d: usize) -> Tree {
        match self {
            Tree::App(s, a) if !a.is_empty() => {
                if d == 0 {
                    Tree::App("▢".into(), vec![])
                } else {
                    Tree::App(s.clone(), a.iter().map(|c| c.truncate(d - 1)).collect())
                }
            }
            _ => self.clone(),
        }
    }
}

/// Renames variables to `v0, v1, ...` jointly across `ts` in order of first
/// occurrence.
pub fn canonical_vars(ts: &[Tree]) -> Vec<Tree> {
    let mut order = Vec::new();
    for t in ts {
        t.vars_in_order(&mut order);
    }
    let f = |x: &str| format!("v{}", order.iter().position(|y| y == x).unwrap());
    ts.iter().map(|t| t.rename(&f)).collect()
}

/// Syntactic matching against a linear pattern.
pub fn match_tree(pat: &Tree, t: &Tree, s: &mut BTreeMap<String, Tree>) -> bool {
    match (pat, t) {
        (Tree::Var(x), _) => {
            s.insert(x.clone(), t.clone());
            true
        }
        (Tree::App(f, pa), Tree::App(g, ta)) => {
            f == g && pa.len() == ta.len() && pa.iter().zip(ta).all(|(p, u)| match_tree(p, u, s))
        }
        _ => false,
    }
}

#[derive(Clone, Debug)]
pub struct ORule {
    pub name: String,
    pub lhs: Tree,
    pub rhs: Tree,
}

/// An oracle copy of a rule system, built from the same text by a separate
/// parser.
#[derive(Clone, Debug)]
pub struct OTrs {
    pub sig: Sig,
    pub rules: Vec<ORule>,
}

impl OTrs {
    pub fn new(sig: Sig, rules: &[(&str, &str, &str)]) -> OTrs {
        let rules = rules
            .iter()
            .map(|(n, l, r)| ORule {
                name: n.to_string(),
                lhs: parse_tree(l, &sig),
                rhs: parse_tree(r, &sig),
            })
            .collect();
        OTrs { sig, rules }
    }

    pub fn sp() -> OTrs {
        OTrs::new(Sig(vec![("S", 1), ("P", 1)]), &[("PS", "P(S(x))", "x"), ("SP", "S(P(x))", "x")])
    }

    pub fn sp_e() -> OTrs {
        OTrs::new(
            Sig(vec![("S", 1), ("P", 1), ("e", 1)]),
            &[("PS", "P(S(x))", "e(x)"), ("SP", "S(P(x))", "e(x)")],
        )
    }

    pub fn a3() -> OTrs {
        OTrs::new(Sig(vec![("A", 1)]), &[("AAA", "A(A(A(x)))", "A(x)")])
    }

    pub fn swap() -> OTrs {
        OTrs::new(
            Sig(vec![("f", 1), ("g", 2), ("a", 0)]),
            &[("r1", "f(g(x,y))", "f(g(y,x))"), ("r2", "g(a,a)", "g(a,a)"), ("r3", "a", "a")],
        )
    }

    pub fn collapse() -> OTrs {
        OTrs::new(Sig(vec![("f", 2), ("a", 0), ("b", 0)]), &[("F", "f(x,y)", "x")])
    }

    pub fn or() -> OTrs {
        OTrs::new(
            Sig(vec![("or", 2), ("true", 0), ("c", 0), ("p", 2)]),
            &[("L", "or(true,x)", "true"), ("R", "or(x,true)", "true"), ("C", "c", "or(true,c)")],
        )
    }

    pub fn stream() -> OTrs {
        OTrs::new(
            Sig(vec![("a", 0), ("g", 1), ("h", 1), ("k", 1), ("k2", 1), ("r", 1)]),
            &[("AG", "a", "g(a)"), ("HK", "h(x)", "k(x)"), ("KK", "k(x)", "k2(x)"), ("RR", "r(x)", "r(x)")],
        )
    }

    pub fn rule(&self, name: &str) -> usize {
        self.rules.iter().position(|r| r.name == name).expect("rule")
    }

    /// Every `(position, rule)` with a match, sorted.
    pub fn redexes(&self, t: &Tree) -> Vec<ORedex> {
        let mut out = Vec::new();
        for p in t.positions() {
            let sub = t.at(&p).unwrap();
            for (i, r) in self.rules.iter().enumerate() {
                if match_tree(&r.lhs, sub, &mut BTreeMap::new()) {
                    out.push(ORedex { pos: p.clone(), rule: i });
                }
            }
        }
        out.sort();
        out
    }

    pub fn contract(&self, t: &Tree, r: &ORedex) -> Option<Tree> {
        let rule = &self.rules[r.rule];
        let mut s = BTreeMap::new();
        if !match_tree(&rule.lhs, t.at(&r.pos)?, &mut s) {
            return None;
        }
        Some(t.replace(&r.pos, rule.rhs.subst(&s)))
    }

    /// Distinct redexes whose patterns share a position.
    pub fn overlap(&self, a: &ORedex, b: &ORedex) -> bool {
        if a == b {
            return false;
        }
        let (hi, lo) = if a.pos.len() <= b.pos.len() { (a, b) } else { (b, a) };
        if !lo.pos.starts_with(&hi.pos) {
            return false;
        }
        let offset = &lo.pos[hi.pos.len()..];
        self.rules[hi.rule].lhs.app_positions().iter().any(|q| q == offset)
    }

    /// Complete development of pairwise non-overlapping redexes, deepest
    /// first so that shallower positions stay put.
    pub fn develop(&self, t: &Tree, rs: &[ORedex]) -> Tree {
        let mut rs = rs.to_vec();
        rs.sort_by_key(|r| std::cmp::Reverse(r.pos.len()));
        let mut t = t.clone();
        for r in &rs {
            t = self.contract(&t, r).expect("development redex matches");
        }
        t
    }

    pub fn is_parallel(rs: &[ORedex]) -> bool {
        rs.iter().enumerate().all(|(i, a)| {
            rs[i + 1..]
                .iter()
                .all(|b| !a.pos.starts_with(&b.pos) && !b.pos.starts_with(&a.pos))
        })
    }

    pub fn lib_redex(&self, lib: &Trs, r: &ORedex) -> Redex {
        Redex::parse(&r.display(self), lib).expect("redex literal")
    }

    pub fn from_lib(&self, lib: &Trs, r: &Redex) -> ORedex {
        ORedex {
            pos: r.position.path().to_vec(),
            rule: self.rule(lib.rule(r.rule).name()),
        }
    }

    /// Critical pairs by superposition of linear, variable-disjoint
    /// left-hand sides; root self-overlaps excluded.
    pub fn critical_pairs(&self) -> Vec<OCriticalPair> {
        let mut out = Vec::new();
        for (i, outer) in self.rules.iter().enumerate() {
            for q in outer.lhs.app_positions() {
                for (j, inner) in self.rules.iter().enumerate() {
                    if i == j && q.is_empty() {
                        continue;
                    }
                    let inner_lhs = inner.lhs.rename(&|x| format!("{x}'"));
                    let inner_rhs = inner.rhs.rename(&|x| format!("{x}'"));
                    let mut s = BTreeMap::new();
                    if !unify_linear(outer.lhs.at(&q).unwrap(), &inner_lhs, &mut s) {
                        continue;
                    }
                    let peak = outer.lhs.subst(&s);
                    let left = outer.rhs.subst(&s);
                    let right = peak.replace(&q, inner_rhs.subst(&s));
                    out.push(OCriticalPair {
                        outer: outer.name.clone(),
                        inner: inner.name.clone(),
                        pos: q.clone(),
                        peak,
                        left,
                        right,
                    });
                }
            }
        }
        out
    }
}

/// Unification of two linear terms with disjoint variables: every variable
/// is bound at most once, so no occurs check or merging is needed.
fn unify_linear(a: &Tree, b: &Tree, s: &mut BTreeMap<String, Tree>) -> bool {
    match (a, b) {
        (Tree::Var(x), t) | (t, Tree::Var(x)) => {
            s.insert(x.clone(), t.clone());
            true
        }
        (Tree::App(f, fa), Tree::App(g, ga)) => {
            f == g && fa.len() == ga.len() && fa.iter().zip(ga).all(|(x, y)| unify_linear(x, y, s))
        }
    }
}

#[derive(Clone, Debug)]
pub struct OCriticalPair {
    pub outer: String,
    pub inner: String,
    pub pos: Vec<usize>,
    pub peak: Tree,
    pub left: Tree,
    pub right: Tree,
}

impl OCriticalPair {
    pub fn trivial(&self) -> bool {
        self.left == self.right
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ORedex {
    pub pos: Vec<usize>,
    pub rule: usize,
}

impl ORedex {
    pub fn display(&self, o: &OTrs) -> String {
        format!("{}:{}", show_pos(&self.pos), o.rules[self.rule].name)
    }
}

pub fn show_pos(p: &[usize]) -> String {
    if p.is_empty() {
        "ε".into()
    } else {
        p.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
    }
}

/// All finite trees of exactly `n` nodes whose leaves come from the
/// nullary symbols and `vars`.
pub fn trees_of_size(sig: &Sig, vars: &[&str], n: usize) -> Vec<Tree> {
    fn go(sig: &Sig, vars: &[&str], n: usize, memo: &mut BTreeMap<usize, Vec<Tree>>) -> Vec<Tree> {
        if let Some(v) = memo.get(&n) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend(vars.iter().map(|x| Tree::Var(x.to_string())));
        }
        for &(f, a) in &sig.0 {
            if a == 0 {
                if n == 1 {
                    out.push(Tree::App(f.into(), vec![]));
                }
                continue;
            }
            for split in compositions(n - 1, a) {
                let mut acc: Vec<Vec<Tree>> = vec![vec![]];
                for &k in &split {
                    let kids = go(sig, vars, k, memo);
                    acc = acc
                        .into_iter()
                        .flat_map(|pre| {
                            kids.iter().map(move |c| {
                                let mut v = pre.clone();
                                v.push(c.clone());
                                v
                            })
                        })
                        .collect();
                }
                out.extend(acc.into_iter().map(|args| Tree::App(f.into(), args)));
            }
        }
        memo.insert(n, out.clone());
        out
    }
    go(sig, vars, n, &mut BTreeMap::new())
}

/// Ordered splits of `n` into `k` positive parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    (1..=n)
        .flat_map(|first| {
            compositions(n - first, k - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

pub fn trees_up_to(sig: &Sig, vars: &[&str], n: usize) -> Vec<Tree> {
    (1..=n).flat_map(|k| trees_of_size(sig, vars, k)).collect()
}

/// A random finite tree with at most `budget` function nodes.
pub fn random_tree(rng: &mut ChaCha8Rng, sig: &Sig, leaves: &[&str], budget: usize) -> Tree {
    let inner: Vec<_> = sig.0.iter().filter(|(_, a)| *a > 0).collect();
    let consts: Vec<Tree> = sig
        .0
        .iter()
        .filter(|(_, a)| *a == 0)
        .map(|(f, _)| Tree::App(f.to_string(), vec![]))
        .chain(leaves.iter().map(|x| Tree::Var(x.to_string())))
        .collect();
    fn go(rng: &mut ChaCha8Rng, inner: &[&(&str, usize)], consts: &[Tree], budget: &mut usize) -> Tree {
        if *budget == 0 || inner.is_empty() || rng.gen_bool(0.3) {
            return consts.choose(rng).unwrap().clone();
        }
        *budget -= 1;
        let &&(f, a) = inner.choose(rng).unwrap();
        let args = (0..a).map(|_| go(rng, inner, consts, budget)).collect();
        Tree::App(f.to_string(), args)
    }
    let mut b = budget;
    go(rng, &inner, &consts, &mut b)
}

/// A random set of pairwise non-overlapping redexes of `t`.
pub fn random_development(rng: &mut ChaCha8Rng, o: &OTrs, t: &Tree) -> Vec<ORedex> {
    let mut all = o.redexes(t);
    all.shuffle(rng);
    let mut chosen: Vec<ORedex> = Vec::new();
    for r in all {
        if rng.gen_bool(0.6) && chosen.iter().all(|c| !o.overlap(c, &r) && c != &r) {
            chosen.push(r);
        }
    }
    if chosen.is_empty() && rng.gen_bool(0.8) {
        chosen.extend(o.redexes(t).choose(rng).cloned());
    }
    chosen.sort();
    chosen
}

/// A random parallel step: pairwise disjoint redex positions.
pub fn random_parallel(rng: &mut ChaCha8Rng, o: &OTrs, t: &Tree) -> Vec<ORedex> {
    let mut all = o.redexes(t);
    all.shuffle(rng);
    let mut chosen: Vec<ORedex> = Vec::new();
    for r in all {
        if rng.gen_bool(0.5) && chosen.iter().all(|c| !c.pos.starts_with(&r.pos) && !r.pos.starts_with(&c.pos)) {
            chosen.push(r);
        }
    }
    if chosen.is_empty() && rng.gen_bool(0.8) {
        chosen.extend(o.redexes(t).choose(rng).cloned());
    }
    chosen.sort();
    chosen
}

/// Every subset of `rs` with pairwise disjoint positions.
pub fn parallel_subsets(rs: &[ORedex]) -> Vec<Vec<ORedex>> {
    let mut out = vec![vec![]];
    for r in rs {
        let extra: Vec<Vec<ORedex>> = out
            .iter()
            .filter(|s: &&Vec<ORedex>| s.iter().all(|c| !c.pos.starts_with(&r.pos) && !r.pos.starts_with(&c.pos)))
            .map(|s| {
                let mut s = s.clone();
                s.push(r.clone());
                s
            })
            .collect();
        out.extend(extra);
    }
    out
}

pub fn lib_term(lib: &Trs, t: &Tree) -> Term {
    lib.parse_term(&t.to_string()).expect("oracle tree renders to a library term")
}

/// Library term (finite) back into an oracle tree.
pub fn tree_of(lib_t: &Term, sig: &Sig) -> Tree {
    parse_tree(&lib_t.to_string(), sig)
}

// ---------------------------------------------------------------------------
// Unary words: `prefix · cycle^ω`, or `prefix · x` when the cycle is empty.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    pub prefix: Vec<&'static str>,
    pub cycle: Vec<&'static str>,
}

impl Word {
    pub fn finite(prefix: Vec<&'static str>) -> Word {
        Word { prefix, cycle: vec![] }
    }

    pub fn letter(&self, i: usize) -> Option<&'static str> {
        if i < self.prefix.len() {
            Some(self.prefix[i])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(i - self.prefix.len()) % self.cycle.len()])
        }
    }

    /// Library syntax; distinct binder names per cycle node.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.prefix {
            s.push_str(l);
            s.push('(');
        }
        if self.cycle.is_empty() {
            s.push('x');
        } else {
            for (i, l) in self.cycle.iter().enumerate() {
                s.push_str(&format!("rec X{i} = {l}("));
            }
            s.push_str("X0");
            s.push_str(&")".repeat(self.cycle.len()));
        }
        s.push_str(&")".repeat(self.prefix.len()));
        s
    }

    /// Replaces the letters `at..at+lhs.len()` by `rhs`, when they match.
    pub fn rewrite(&self, at: usize, lhs: &[&str], rhs: &[&'static str]) -> Option<Word> {
        for (k, l) in lhs.iter().enumerate() {
            if self.letter(at + k)? != *l {
                return None;
            }
        }
        let end = at + lhs.len();
        let mut prefix: Vec<&'static str> = (0..at).map(|i| self.letter(i).unwrap()).collect();
        prefix.extend_from_slice(rhs);
        if self.cycle.is_empty() {
            prefix.extend_from_slice(&self.prefix[end..]);
            return Some(Word::finite(prefix));
        }
        // keep the remaining letters up to the next cycle boundary
        let pl = self.prefix.len();
        let boundary = if end <= pl {
            pl
        } else {
            pl + (end - pl).div_ceil(self.cycle.len()) * self.cycle.len()
        };
        prefix.extend((end..boundary).map(|i| self.letter(i).unwrap()));
        Some(Word {
            prefix,
            cycle: self.cycle.clone(),
        })
    }
}

/// Unary rules as letter strings, `lhs -> rhs`.
pub fn unary_rules(o: &OTrs) -> Vec<(String, Vec<&'static str>, Vec<&'static str>)> {
    fn letters(t: &Tree) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut cur = t;
        while let Tree::App(f, a) = cur {
            out.push(&*Box::leak(f.clone().into_boxed_str()));
            cur = &a[0];
        }
        out
    }
    o.rules.iter().map(|r| (r.name.clone(), letters(&r.lhs), letters(&r.rhs))).collect()
}

pub fn all_words(alphabet: &[&'static str], max_len: usize) -> Vec<Vec<&'static str>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<&'static str>| {
                alphabet.iter().map(move |l| {
                    let mut v = w.clone();
                    v.push(*l);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

// ---------------------------------------------------------------------------
// S/P strings

/// Weight of an S/P letter given as a byte.
pub fn weight(c: u8) -> i64 {
    if c == b'S' {
        1
    } else {
        -1
    }
}

pub fn prefix_sums(w: &[u8]) -> Vec<i64> {
    let mut s = vec![0];
    for &c in w {
        s.push(s.last().unwrap() + weight(c));
    }
    s
}

/// Every word reachable from `w` by deleting adjacent `SP` or `PS` pairs.
pub fn sp_reducts(w: &[u8]) -> HashSet<Vec<u8>> {
    let mut seen: HashSet<Vec<u8>> = HashSet::from([w.to_vec()]);
    let mut queue = VecDeque::from([w.to_vec()]);
    while let Some(cur) = queue.pop_front() {
        for i in 0..cur.len().saturating_sub(1) {
            if cur[i] != cur[i + 1] {
                let mut next = cur[..i].to_vec();
                next.extend_from_slice(&cur[i + 2..]);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen
}

/// Longest leading `S` run and longest leading `P` run over all reducts of
/// `w` (at most 64 letters). Same search as [`sp_reducts`] on words packed
/// into bits, `S` as 1, first letter lowest.
pub fn sp_reach(w: &[u8]) -> (usize, usize) {
    assert!(w.len() <= 64);
    let bits = w.iter().enumerate().fold(0u64, |b, (i, &c)| if c == b'S' { b | 1 << i } else { b });
    let start = (bits, w.len() as u32);
    let mut seen: HashSet<(u64, u32)> = HashSet::from([start]);
    let mut stack = vec![start];
    let (mut best_s, mut best_p) = (0u32, 0u32);
    while let Some((b, n)) = stack.pop() {
        best_s = best_s.max(b.trailing_ones().min(n));
        best_p = best_p.max(b.trailing_zeros().min(n));
        for i in 0..n.saturating_sub(1) {
            if (b >> i & 1) != (b >> (i + 1) & 1) {
                let low = b & ((1u64 << i) - 1);
                let high = if i + 2 >= 64 { 0 } else { b >> (i + 2) };
                let next = (low | high << i, n - 2);
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
    }
    (best_s as usize, best_p as usize)
}

pub fn leading_run(w: &[u8], c: u8) -> usize {
    w.iter().take_while(|&&x| x == c).count()
}

/// Letters of `q = S P² S³ P⁴ ...`, generated directly.
pub fn q_letters(n: usize) -> Vec<u8> {
    let mut out = Vec::new();
    let mut k = 1;
    while out.len() < n {
        let c = if k % 2 == 1 { b'S' } else { b'P' };
        out.extend(std::iter::repeat(c).take(k));
        k += 1;
    }
    out.truncate(n);
    out
}

/// Letters of `r = S P S² P² S³ P³ ...`, generated directly.
pub fn r_letters(n: usize) -> Vec<u8> {
    let mut out = Vec::new();
    let mut k = 1;
    while out.len() < n {
        out.extend(std::iter::repeat(b'S').take(k));
        out.extend(std::iter::repeat(b'P').take(k));
        k += 1;
    }
    out.truncate(n);
    out
}

pub fn word_str(w: &[u8]) -> String {
    String::from_utf8(w.to_vec()).unwrap()
}

/// Identical redex sets regardless of order.
pub fn same_set(a: &[Redex], b: &[Redex]) -> bool {
    let x: BTreeSet<String> = a.iter().map(|r| format!("{}:{}", r.position, r.rule)).collect();
    let y: BTreeSet<String> = b.iter().map(|r| format!("{}:{}", r.position, r.rule)).collect();
    x == y
}
