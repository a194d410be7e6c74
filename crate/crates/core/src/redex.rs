//! Redexes, redex sets, parallel steps and developments.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::term::{match_at, match_node, NodeId, ParsedTerm, Position, Term};
use crate::trs::{RuleId, Trs};

/// A rule occurrence at a position of a term's unfolding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Redex {
    pub position: Position,
    pub rule: RuleId,
}

impl Redex {
    pub fn new(position: Position, rule: RuleId) -> Self {
        Redex { position, rule }
    }

    pub fn depth(&self) -> usize {
        self.position.depth()
    }

    /// Positions of the non-variable lhs nodes, translated into the term.
    pub fn pattern_positions(&self, trs: &Trs) -> Vec<Position> {
        trs.rule(self.rule)
            .pattern()
            .iter()
            .map(|q| self.position.concat(q))
            .collect()
    }

    pub fn display<'a>(&'a self, trs: &'a Trs) -> impl fmt::Display + 'a {
        RedexDisplay(self, trs)
    }

    /// Parses `POS:RULE`.
    pub fn parse(src: &str, trs: &Trs) -> Result<Redex> {
        let (p, r) = src
            .rsplit_once(':')
            .ok_or_else(|| Error::parse(1, 1, format!("expected POSITION:RULE, got `{src}`")))?;
        Ok(Redex::new(p.trim().parse()?, trs.rule_id(r.trim())?))
    }
}

/// Depth first, then left-most, then rule index.
impl Ord for Redex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.position
            .cmp(&other.position)
            .then(self.rule.cmp(&other.rule))
    }
}

impl PartialOrd for Redex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct RedexDisplay<'a>(&'a Redex, &'a Trs);

impl fmt::Display for RedexDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.0.position, self.1.rule(self.0.rule).name())
    }
}

/// Innermost-first order used by developments: deepest first, left-most
/// among equal depths.
pub fn innermost_order(a: &Redex, b: &Redex) -> Ordering {
    b.depth()
        .cmp(&a.depth())
        .then_with(|| a.position.path().cmp(b.position.path()))
        .then(a.rule.cmp(&b.rule))
}

/// All redexes rooted at depth `< d`, sorted by depth, then left-most, then rule.
pub fn find_redexes(trs: &Trs, t: &Term, d: usize) -> Vec<Redex> {
    let mut out = Vec::new();
    for (p, id) in t.positions(d) {
        for (r, rule) in trs.rules().iter().enumerate() {
            if match_node(rule.lhs(), t, id).is_some() {
                out.push(Redex::new(p.clone(), r));
            }
        }
    }
    out.sort();
    out
}

pub fn is_redex(trs: &Trs, t: &Term, r: &Redex) -> bool {
    matches!(match_at(trs.rule(r.rule).lhs(), t, &r.position), Ok(Some(_)))
}

pub fn apply_step(trs: &Trs, t: &Term, r: &Redex) -> Result<Term> {
    trs.contract(t, &r.position, r.rule)
}

/// The patterns of the two redexes share a position. Reflexive and symmetric.
pub fn overlap(trs: &Trs, a: &Redex, b: &Redex) -> bool {
    let (upper, lower) = if a.position.is_prefix_of(&b.position) {
        (a, b)
    } else if b.position.is_prefix_of(&a.position) {
        (b, a)
    } else {
        return false;
    };
    // Lhs non-variable positions are prefix closed, so it suffices that the
    // lower root lands on a pattern node of the upper redex.
    let q = upper.position.strip_prefix_of(&lower.position).expect("prefix");
    trs.rule(upper.rule).pattern().contains(&q)
}

/// Partition of `redexes` into classes of the transitive closure of overlap.
pub fn overlap_clusters(trs: &Trs, redexes: &[Redex]) -> Vec<Vec<Redex>> {
    let n = redexes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if overlap(trs, &redexes[i], &redexes[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Redex>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(redexes[i].clone());
    }
    groups
        .into_values()
        .map(|mut g| {
            g.sort();
            g
        })
        .collect()
}

/// A cluster with its Y verdict and, when it holds, a disjoint pair.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub members: Vec<Redex>,
    pub disjoint_pair: Option<(Redex, Redex)>,
}

#[derive(Clone, Debug)]
pub struct YReport {
    pub clusters: Vec<Cluster>,
    pub y_redexes: BTreeSet<Redex>,
}

/// Y-redexes relative to the given set: members of clusters that contain
/// two redexes at disjoint positions.
pub fn y_redexes(trs: &Trs, redexes: &[Redex]) -> YReport {
    let mut unique: Vec<Redex> = redexes.to_vec();
    unique.sort();
    unique.dedup();
    let clusters: Vec<Cluster> = overlap_clusters(trs, &unique)
        .into_iter()
        .map(|members| {
            let disjoint_pair = members.iter().enumerate().find_map(|(i, a)| {
                members[i + 1..]
                    .iter()
                    .find(|b| a.position.is_disjoint(&b.position))
                    .map(|b| (a.clone(), b.clone()))
            });
            Cluster {
                members,
                disjoint_pair,
            }
        })
        .collect();
    let y_redexes = clusters
        .iter()
        .filter(|c| c.disjoint_pair.is_some())
        .flat_map(|c| c.members.iter().cloned())
        .collect();
    YReport { clusters, y_redexes }
}

/// A finite set of explicit redexes plus periodic node markings. A marking
/// `(node, rule)` denotes every unfolding occurrence of that graph node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RedexSet {
    pub explicit: BTreeSet<Redex>,
    pub periodic: BTreeSet<(NodeId, RuleId)>,
}

impl RedexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_redexes(rs: impl IntoIterator<Item = Redex>) -> Self {
        RedexSet {
            explicit: rs.into_iter().collect(),
            periodic: BTreeSet::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty() && self.periodic.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        !self.periodic.is_empty()
    }

    /// The denoted redexes rooted at depth `< d`, sorted.
    pub fn denote(&self, t: &Term, d: usize) -> Vec<Redex> {
        let mut out: BTreeSet<Redex> = self.explicit.iter().filter(|r| r.depth() < d).cloned().collect();
        if !self.periodic.is_empty() {
            for (p, id) in t.positions(d) {
                for &(n, r) in &self.periodic {
                    if n == id {
                        out.insert(Redex::new(p.clone(), r));
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Parses `{POS:RULE, ...}` and `{node X : RULE}` items; binder names
    /// are resolved against the parsed source term.
    pub fn parse(src: &str, trs: &Trs, source: &ParsedTerm) -> Result<RedexSet> {
        let inner = src
            .trim()
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| Error::parse(1, 1, "redex set must be enclosed in braces"))?;
        let mut set = RedexSet::new();
        for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some(rest) = item.strip_prefix("node ") {
                let (name, rule) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(1, 1, format!("expected `node X : RULE`, got `{item}`")))?;
                let name = name.trim();
                let node = *source
                    .binders
                    .get(name)
                    .ok_or_else(|| Error::parse(1, 1, format!("unknown binder `{name}`")))?;
                set.periodic.insert((node, trs.rule_id(rule.trim())?));
            } else {
                set.explicit.insert(Redex::parse(item, trs)?);
            }
        }
        Ok(set)
    }

    pub fn display<'a>(&'a self, trs: &'a Trs) -> impl fmt::Display + 'a {
        SetDisplay(self, trs)
    }
}

struct SetDisplay<'a>(&'a RedexSet, &'a Trs);

impl fmt::Display for SetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = self.0.explicit.iter().map(|r| r.display(self.1).to_string()).collect();
        items.extend(
            self.0
                .periodic
                .iter()
                .map(|(n, r)| format!("node #{n} : {}", self.1.rule(*r).name())),
        );
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// Renders a list of redexes as a set literal.
pub fn show_redexes(trs: &Trs, rs: &[Redex]) -> String {
    let items: Vec<String> = rs.iter().map(|r| r.display(trs).to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

/// Simultaneous contraction of finitely many pairwise disjoint redexes.
#[derive(Clone, Debug)]
pub struct ParallelStep {
    source: Term,
    redexes: Vec<Redex>,
}

impl ParallelStep {
    pub fn new(trs: &Trs, source: Term, redexes: impl IntoIterator<Item = Redex>) -> Result<ParallelStep> {
        let mut redexes: Vec<Redex> = redexes.into_iter().collect();
        redexes.sort();
        redexes.dedup();
        for (i, a) in redexes.iter().enumerate() {
            if !is_redex(trs, &source, a) {
                return Err(Error::InvalidParallelStep(format!("{} is not a redex", a.display(trs))));
            }
            if let Some(b) = redexes[i + 1..].iter().find(|b| !a.position.is_disjoint(&b.position)) {
                return Err(Error::InvalidParallelStep(format!(
                    "{} and {} are not at disjoint positions",
                    a.display(trs),
                    b.display(trs)
                )));
            }
        }
        Ok(ParallelStep { source, redexes })
    }

    pub fn empty(source: Term) -> ParallelStep {
        ParallelStep {
            source,
            redexes: Vec::new(),
        }
    }

    pub fn source(&self) -> &Term {
        &self.source
    }

    pub fn redexes(&self) -> &[Redex] {
        &self.redexes
    }

    pub fn is_empty(&self) -> bool {
        self.redexes.is_empty()
    }

    /// Minimal redex depth; `None` for the empty step.
    pub fn min_depth(&self) -> Option<usize> {
        self.redexes.iter().map(Redex::depth).min()
    }

    pub fn target(&self, trs: &Trs) -> Result<Term> {
        let mut t = self.source.clone();
        for r in &self.redexes {
            // disjoint positions are unaffected by each other's contraction
            t = apply_step(trs, &t, r)?;
        }
        Ok(t)
    }

    pub fn display<'a>(&'a self, trs: &'a Trs) -> impl fmt::Display + 'a {
        ListDisplay(&self.redexes, trs)
    }
}

struct ListDisplay<'a>(&'a [Redex], &'a Trs);

impl fmt::Display for ListDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&show_redexes(self.1, self.0))
    }
}

/// A set of pairwise non-overlapping redexes (nesting allowed).
#[derive(Clone, Debug)]
pub struct Development {
    source: Term,
    redexes: RedexSet,
}

/// Truncation depth ceiling for periodic developments.
const MAX_TRUNCATION: usize = 1 << 12;
/// Node ceiling for truncations of branching terms.
const MAX_TRUNCATION_NODES: usize = 1 << 21;

impl Development {
    pub fn new(trs: &Trs, source: Term, redexes: RedexSet) -> Result<Development> {
        for &(n, r) in &redexes.periodic {
            if n >= source.num_nodes() || match_node(trs.rule(r).lhs(), &source, n).is_none() {
                return Err(Error::InvalidDevelopment(format!(
                    "node #{n} is not a {}-redex",
                    trs.rule(r).name()
                )));
            }
        }
        let dev = Development { source, redexes };
        // Any overlap among periodic occurrences shows up with its upper
        // redex rooted at a node's first visit.
        let probe = dev.source.num_nodes() + 2 * trs.max_pattern_depth() + 1;
        let max_explicit = dev.redexes.explicit.iter().map(Redex::depth).max().map_or(0, |m| m + 1);
        let rs = dev.redexes.denote(&dev.source, probe.max(max_explicit));
        check_development(trs, &dev.source, &rs)?;
        Ok(dev)
    }

    pub fn from_redexes(trs: &Trs, source: Term, redexes: impl IntoIterator<Item = Redex>) -> Result<Development> {
        Development::new(trs, source, RedexSet::from_redexes(redexes))
    }

    pub fn source(&self) -> &Term {
        &self.source
    }

    pub fn redex_set(&self) -> &RedexSet {
        &self.redexes
    }

    pub fn is_periodic(&self) -> bool {
        self.redexes.is_periodic()
    }

    /// Explicit redexes (periodic occurrences are listed to depth `< d`).
    pub fn redexes(&self, d: usize) -> Vec<Redex> {
        self.redexes.denote(&self.source, d)
    }

    /// The same development on the truncated source `unfold(source, big_d)`,
    /// keeping the denoted redexes whose patterns survive the truncation.
    pub fn truncated(&self, trs: &Trs, big_d: usize) -> Development {
        let t = self.source.unfold(big_d);
        let rs: Vec<Redex> = self
            .redexes
            .denote(&self.source, big_d)
            .into_iter()
            .filter(|r| is_redex(trs, &t, r))
            .collect();
        Development {
            source: t,
            redexes: RedexSet::from_redexes(rs),
        }
    }

    /// Complete development, innermost first. Exact for explicit sets;
    /// for periodic sets the result is the depth-`d` approximant.
    pub fn develop(&self, trs: &Trs, d: usize) -> Result<Term> {
        if !self.is_periodic() {
            let rs: Vec<Redex> = self.redexes.explicit.iter().cloned().collect();
            return develop_explicit(trs, &self.source, rs);
        }
        let pd = trs.max_pattern_depth();
        let mut big_d = d + pd + 1;
        loop {
            if unfold_size(&self.source, big_d) > MAX_TRUNCATION_NODES {
                break;
            }
            let trunc = self.truncated(trs, big_d);
            let rs: Vec<Redex> = trunc.redexes.explicit.iter().cloned().collect();
            let out = develop_explicit(trs, trunc.source(), rs)?;
            let valid = out.min_cut_depth().map_or(usize::MAX, |c| c.saturating_sub(pd));
            if valid >= d {
                return Ok(out.unfold(d));
            }
            big_d *= 2;
            if big_d > MAX_TRUNCATION {
                break;
            }
        }
        Err(Error::BudgetExhausted(format!(
            "development result not determined to depth {d} within truncation budget"
        )))
    }
}

/// Number of nodes of `unfold(t, d)`, computed without building it (saturating).
fn unfold_size(t: &Term, d: usize) -> usize {
    let mut counts = vec![1usize; t.num_nodes()];
    for _ in 0..d {
        counts = (0..t.num_nodes())
            .map(|i| {
                t.node(i)
                    .children()
                    .iter()
                    .fold(1usize, |acc, &c| acc.saturating_add(counts[c]))
            })
            .collect();
    }
    counts[t.root()]
}

/// Every redex matches and no two non-identical redexes overlap.
pub fn check_development(trs: &Trs, t: &Term, rs: &[Redex]) -> Result<()> {
    for (i, a) in rs.iter().enumerate() {
        if !is_redex(trs, t, a) {
            return Err(Error::InvalidDevelopment(format!("{} is not a redex", a.display(trs))));
        }
        if let Some(b) = rs[i + 1..].iter().find(|b| *b != a && overlap(trs, a, b)) {
            return Err(Error::InvalidDevelopment(format!(
                "{} and {} overlap",
                a.display(trs),
                b.display(trs)
            )));
        }
    }
    Ok(())
}

/// Contracts `rs` innermost first at their original positions. Contracting
/// a redex never moves positions above it or beside it, and the deeper
/// redexes nested in its variable part are already gone.
pub fn develop_explicit(trs: &Trs, t: &Term, mut rs: Vec<Redex>) -> Result<Term> {
    rs.sort_by(innermost_order);
    rs.dedup();
    let mut cur = t.clone();
    for r in &rs {
        cur = apply_step(trs, &cur, r).map_err(|e| match e {
            Error::NotARedex { .. } => Error::InvalidDevelopment(format!(
                "{} stops being a redex during development",
                r.display(trs)
            )),
            other => other,
        })?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term_with_binders;

    fn sp() -> Trs {
        Trs::parse("sig S/1 P/1\nrule PS : P(S(x)) -> x\nrule SP : S(P(x)) -> x\n").unwrap()
    }

    fn ex16() -> Trs {
        Trs::parse("sig f/1 g/2 a/0\nrule r1 : f(g(x,y)) -> f(g(y,x))\nrule r2 : g(a,a) -> g(a,a)\nrule r3 : a -> a\n")
            .unwrap()
    }

    fn red(trs: &Trs, s: &str) -> Redex {
        Redex::parse(s, trs).unwrap()
    }

    #[test]
    fn finds_sp_redexes() {
        let trs = sp();
        let t = trs.parse_term("S(P(S(P(x))))").unwrap();
        let rs = find_redexes(&trs, &t, 4);
        assert_eq!(show_redexes(&trs, &rs), "{ε:SP, 1:PS, 1.1:SP}");
    }

    #[test]
    fn example_sixteen_cluster_and_y_redexes() {
        let trs = ex16();
        let t = trs.parse_term("f(g(a,a))").unwrap();
        let rs = find_redexes(&trs, &t, 3);
        assert_eq!(show_redexes(&trs, &rs), "{ε:r1, 1:r2, 1.1:r3, 1.2:r3}");
        assert!(overlap(&trs, &rs[1], &rs[2]));
        assert!(!overlap(&trs, &rs[2], &rs[3]));
        assert_eq!(overlap_clusters(&trs, &rs).len(), 1);
        let y = y_redexes(&trs, &rs);
        assert!(y.y_redexes.contains(&rs[0]));
        assert_eq!(apply_step(&trs, &t, &rs[0]).unwrap(), t);
    }

    #[test]
    fn overlap_by_pattern_positions() {
        let trs = sp();
        let (e, one, oneone) = (red(&trs, "ε:SP"), red(&trs, "1:PS"), red(&trs, "1.1:SP"));
        assert!(overlap(&trs, &e, &one));
        assert!(overlap(&trs, &one, &e));
        assert!(!overlap(&trs, &e, &oneone));
        assert!(overlap(&trs, &e, &e));
    }

    #[test]
    fn sp_chain_has_no_y_redex() {
        let trs = sp();
        let t = trs.parse_term("S(P(S(P(S(P(x))))))").unwrap();
        let rs = find_redexes(&trs, &t, 10);
        assert_eq!(overlap_clusters(&trs, &rs).len(), 1);
        assert!(y_redexes(&trs, &rs).y_redexes.is_empty());
    }

    #[test]
    fn develop_innermost() {
        let trs = sp();
        let t = trs.parse_term("S(P(S(P(x))))").unwrap();
        let dev = Development::from_redexes(&trs, t, [red(&trs, "ε:SP"), red(&trs, "1.1:SP")]).unwrap();
        assert_eq!(dev.develop(&trs, 10).unwrap().to_string(), "x");
    }

    #[test]
    fn development_rejects_overlap() {
        let trs = sp();
        let t = trs.parse_term("S(P(S(P(x))))").unwrap();
        let e = Development::from_redexes(&trs, t, [red(&trs, "ε:SP"), red(&trs, "1:PS")]).unwrap_err();
        assert!(matches!(e, Error::InvalidDevelopment(_)));
    }

    #[test]
    fn parallel_step_rejects_nesting() {
        let trs = sp();
        let t = trs.parse_term("S(P(S(P(x))))").unwrap();
        assert!(ParallelStep::new(&trs, t, [red(&trs, "ε:SP"), red(&trs, "1.1:SP")]).is_err());
    }

    #[test]
    fn periodic_development_on_a_omega() {
        let trs = Trs::parse("sig A/1\nrule AAA : A(A(A(x))) -> A(x)\n").unwrap();
        let src = parse_term_with_binders("rec X = A(rec Y = A(rec Z = A(X)))", trs.signature()).unwrap();
        let blue = RedexSet::parse("{node X : AAA}", &trs, &src).unwrap();
        let dev = Development::new(&trs, src.term.clone(), blue).unwrap();
        let denoted = dev.redexes(7);
        assert_eq!(show_redexes(&trs, &denoted), "{ε:AAA, 1.1.1:AAA, 1.1.1.1.1.1:AAA}");
        let out = dev.develop(&trs, 10).unwrap();
        assert!(out.eq_to_depth(&Term::unary_cycle(&["A"]), 10));
        // blue and green together overlap
        let both = RedexSet::parse("{node X : AAA, node Y : AAA}", &trs, &src).unwrap();
        assert!(Development::new(&trs, src.term, both).is_err());
    }
}
