//! Finite and rational infinite first-order terms.
//!
//! A [`Term`] is a finite equation system: a vector of nodes, each either an
//! application of a symbol to child node ids, a variable, or the cut marker
//! `▢` produced by truncation. Cycles are allowed and denote rational
//! (regular) infinite trees. Since only applications have children, every
//! cycle passes through a function symbol, so the unfolding is always well
//! defined.
//!
//! All semantic operations (equality, positions, replacement) refer to the
//! tree unfolding, never to the sharing structure of the graph.

mod position;
mod rational;
pub(crate) mod syntax;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

pub use position::Position;
pub use syntax::{parse_term, parse_term_with_binders, ParsedTerm};

use crate::error::{Error, Result};

pub type Symbol = Arc<str>;
pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    App(Symbol, Vec<NodeId>),
    Var(Symbol),
    /// Truncation marker; matched by no pattern.
    Cut,
}

impl Node {
    pub fn children(&self) -> &[NodeId] {
        match self {
            Node::App(_, cs) => cs,
            _ => &[],
        }
    }

    /// The node's label without its children, used for comparisons.
    fn label(&self) -> Label<'_> {
        match self {
            Node::App(f, cs) => Label::App(f, cs.len()),
            Node::Var(x) => Label::Var(x),
            Node::Cut => Label::Cut,
        }
    }

    /// What survives of this node when truncation reaches it.
    fn truncated(&self) -> Node {
        if self.children().is_empty() {
            self.clone()
        } else {
            Node::Cut
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Label<'a> {
    App(&'a str, usize),
    Var(&'a str),
    Cut,
}

/// Function symbols with fixed arities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: BTreeMap<Symbol, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self> {
        let mut sig = Signature::new();
        for (name, arity) in pairs {
            sig.declare(name, arity)?;
        }
        Ok(sig)
    }

    /// Declares `name/arity`; redeclaring with a different arity is an error.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<()> {
        match self.symbols.get(name) {
            Some(&a) if a != arity => Err(Error::parse(
                1,
                1,
                format!("symbol `{name}` declared with arities {a} and {arity}"),
            )),
            Some(_) => Ok(()),
            None => {
                self.symbols.insert(Arc::from(name), arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.contains_key(name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.symbols.iter().map(|(s, &a)| (s, a))
    }

    /// Union of two signatures; conflicting arities are rejected.
    pub fn merged(&self, other: &Signature) -> Result<Signature> {
        let mut out = self.clone();
        for (s, a) in other.symbols() {
            out.declare(s, a)?;
        }
        Ok(out)
    }
}

/// Variable bindings produced by matching a (linear) pattern.
pub type Substitution = BTreeMap<Symbol, Term>;

/// A finite or rational term given as a rooted equation system.
#[derive(Clone, Debug)]
pub struct Term {
    nodes: Vec<Node>,
    root: NodeId,
}

impl PartialEq for Term {
    /// Equality of tree unfoldings (bisimilarity), not of representations.
    fn eq(&self, other: &Self) -> bool {
        self.eq_rational(other)
    }
}

impl Eq for Term {}

impl Term {
    /// Builds a term from raw nodes. Child ids must be in range.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId) -> Result<Term> {
        let n = nodes.len();
        if root >= n {
            return Err(Error::Invariant(format!("root {root} out of range ({n} nodes)")));
        }
        for (i, node) in nodes.iter().enumerate() {
            if let Some(&c) = node.children().iter().find(|&&c| c >= n) {
                return Err(Error::Invariant(format!("node {i} refers to undefined node {c}")));
            }
        }
        Ok(Term { nodes, root }.compact())
    }

    pub fn var(name: &str) -> Term {
        Term {
            nodes: vec![Node::Var(Arc::from(name))],
            root: 0,
        }
    }

    pub fn cut() -> Term {
        Term {
            nodes: vec![Node::Cut],
            root: 0,
        }
    }

    pub fn constant(name: &str) -> Term {
        Term::app(name, Vec::new())
    }

    /// `f(t1, ..., tn)`; the argument graphs are copied side by side.
    pub fn app(name: &str, args: Vec<Term>) -> Term {
        let mut nodes = vec![Node::Cut];
        let mut kids = Vec::with_capacity(args.len());
        for a in args {
            kids.push(append_graph(&mut nodes, &a));
        }
        nodes[0] = Node::App(Arc::from(name), kids);
        Term { nodes, root: 0 }
    }

    /// The rational term `rec X = f(..., X, ...)` for a unary-cycle spine:
    /// `spine` symbols applied in sequence, the last one pointing back to the first.
    /// Every symbol is taken as unary.
    pub fn unary_cycle(spine: &[&str]) -> Term {
        assert!(!spine.is_empty());
        let n = spine.len();
        let nodes = spine
            .iter()
            .enumerate()
            .map(|(i, s)| Node::App(Arc::from(*s), vec![(i + 1) % n]))
            .collect();
        Term { nodes, root: 0 }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root_node(&self) -> &Node {
        &self.nodes[self.root]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Head symbol of the root, if it is an application.
    pub fn head(&self) -> Option<&str> {
        match self.root_node() {
            Node::App(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self.root_node(), Node::Var(_))
    }

    /// The same term with only reachable nodes, renumbered in depth-first
    /// preorder from the root.
    pub fn compact(self) -> Term {
        self.compact_with_map().0
    }

    /// Like [`Term::compact`] but also returns the old-id → new-id map.
    pub(crate) fn compact_with_map(self) -> (Term, HashMap<NodeId, NodeId>) {
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        let mut order = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if map.contains_key(&id) {
                continue;
            }
            map.insert(id, order.len());
            order.push(id);
            for &c in self.nodes[id].children().iter().rev() {
                if !map.contains_key(&c) {
                    stack.push(c);
                }
            }
        }
        let nodes = order
            .iter()
            .map(|&old| match &self.nodes[old] {
                Node::App(f, cs) => Node::App(f.clone(), cs.iter().map(|c| map[c]).collect()),
                other => other.clone(),
            })
            .collect();
        (Term { nodes, root: 0 }, map)
    }

    /// The subterm rooted at graph node `id`.
    pub fn subterm(&self, id: NodeId) -> Term {
        Term {
            nodes: self.nodes.clone(),
            root: id,
        }
        .compact()
    }

    /// Graph node reached by following `p` through the unfolding.
    pub fn node_at(&self, p: &Position) -> Option<NodeId> {
        let mut cur = self.root;
        for &i in p.path() {
            cur = *self.nodes[cur].children().get(i.checked_sub(1)?)?;
        }
        Some(cur)
    }

    pub fn subterm_at(&self, p: &Position) -> Result<Term> {
        self.node_at(p)
            .map(|id| self.subterm(id))
            .ok_or_else(|| Error::PositionOutOfRange(p.clone()))
    }

    /// True iff the equation system is acyclic (the term is finite).
    pub fn is_finite(&self) -> bool {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        let mut stack: Vec<(NodeId, usize)> = vec![(self.root, 0)];
        state[self.root] = 1;
        while let Some(&mut (id, ref mut next)) = stack.last_mut() {
            let kids = self.nodes[id].children();
            if *next < kids.len() {
                let c = kids[*next];
                *next += 1;
                match state[c] {
                    1 => return false,
                    0 => {
                        state[c] = 1;
                        stack.push((c, 0));
                    }
                    _ => {}
                }
            } else {
                state[id] = 2;
                stack.pop();
            }
        }
        true
    }

    /// Height of a finite term (a constant or variable has height 0).
    /// `None` for infinite terms.
    pub fn height(&self) -> Option<usize> {
        if !self.is_finite() {
            return None;
        }
        let mut memo: HashMap<NodeId, usize> = HashMap::new();
        Some(self.height_of(self.root, &mut memo))
    }

    fn height_of(&self, id: NodeId, memo: &mut HashMap<NodeId, usize>) -> usize {
        if let Some(&h) = memo.get(&id) {
            return h;
        }
        let h = self.nodes[id]
            .children()
            .iter()
            .map(|&c| 1 + self.height_of(c, memo))
            .max()
            .unwrap_or(0);
        memo.insert(id, h);
        h
    }

    /// Number of symbol and variable occurrences of a finite term's tree.
    pub fn size(&self) -> Option<usize> {
        if !self.is_finite() {
            return None;
        }
        fn go(t: &Term, id: NodeId) -> usize {
            1 + t.nodes[id].children().iter().map(|&c| go(t, c)).sum::<usize>()
        }
        Some(go(self, self.root))
    }

    /// Variables occurring in the term (finitely many, as the graph is finite).
    pub fn vars(&self) -> BTreeSet<Symbol> {
        self.reachable()
            .into_iter()
            .filter_map(|id| match &self.nodes[id] {
                Node::Var(x) => Some(x.clone()),
                _ => None,
            })
            .collect()
    }

    fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id], true) {
                continue;
            }
            out.push(id);
            stack.extend(self.nodes[id].children().iter().copied());
        }
        out
    }

    /// True iff no variable occurs twice in the tree unfolding.
    pub fn is_linear(&self) -> bool {
        // A path to a variable that avoids repeating nodes has length < n; a
        // variable below a cycle shows up at least twice within depth 3n.
        let u = self.unfold(3 * self.nodes.len() + 1);
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for n in &u.nodes {
            if let Node::Var(x) = n {
                *counts.entry(x).or_insert(0) += 1;
            }
        }
        counts.values().all(|&n| n <= 1)
    }

    /// Positions of the unfolding at depth `< depth`, with their graph nodes,
    /// in (depth, left-to-right) order.
    pub fn positions(&self, depth: usize) -> Vec<(Position, NodeId)> {
        let mut out = Vec::new();
        if depth == 0 {
            return out;
        }
        let mut queue = VecDeque::from([(Position::root(), self.root)]);
        while let Some((p, id)) = queue.pop_front() {
            if p.depth() + 1 < depth {
                for (i, &c) in self.nodes[id].children().iter().enumerate() {
                    queue.push_back((p.child(i + 1), c));
                }
            }
            out.push((p, id));
        }
        out
    }

    /// Positions (depth-ordered) at which variable `x` occurs, down to depth `< depth`.
    pub fn var_positions(&self, x: &str, depth: usize) -> Vec<Position> {
        self.positions(depth)
            .into_iter()
            .filter(|(_, id)| matches!(&self.nodes[*id], Node::Var(y) if &**y == x))
            .map(|(p, _)| p)
            .collect()
    }

    /// Minimal depth at which a cut marker occurs in the unfolding.
    pub fn min_cut_depth(&self) -> Option<usize> {
        self.min_depths()
            .into_iter()
            .enumerate()
            .filter(|(id, d)| d.is_some() && matches!(self.nodes[*id], Node::Cut))
            .filter_map(|(_, d)| d)
            .min()
    }

    /// Shortest root distance of each node (BFS); `None` when unreachable.
    fn min_depths(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        dist[self.root] = Some(0);
        let mut queue = VecDeque::from([self.root]);
        while let Some(id) = queue.pop_front() {
            let d = dist[id].unwrap();
            for &c in self.nodes[id].children() {
                if dist[c].is_none() {
                    dist[c] = Some(d + 1);
                    queue.push_back(c);
                }
            }
        }
        dist
    }

    /// Tree unfolding truncated at depth `d`: nodes at depth `d` that have
    /// children are replaced by the cut marker; nullary leaves there are kept.
    pub fn unfold(&self, d: usize) -> Term {
        let mut nodes = Vec::new();
        self.unfold_into(self.root, d, &mut nodes);
        Term { nodes, root: 0 }
    }

    fn unfold_into(&self, id: NodeId, remaining: usize, out: &mut Vec<Node>) -> NodeId {
        let me = out.len();
        if remaining == 0 {
            out.push(self.nodes[id].truncated());
            return me;
        }
        match &self.nodes[id] {
            Node::App(f, cs) => {
                out.push(Node::Cut);
                let kids = cs
                    .iter()
                    .map(|&c| self.unfold_into(c, remaining - 1, out))
                    .collect();
                out[me] = Node::App(f.clone(), kids);
            }
            other => out.push(other.clone()),
        }
        me
    }

    /// `unfold(self, d) == unfold(other, d)`.
    pub fn eq_to_depth(&self, other: &Term, d: usize) -> bool {
        let mut level: BTreeSet<(NodeId, NodeId)> = BTreeSet::from([(self.root, other.root)]);
        let mut seen: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
        for _ in 0..d {
            if level.iter().all(|p| seen.contains(p)) {
                return true;
            }
            let mut next = BTreeSet::new();
            for &(a, b) in &level {
                let (na, nb) = (&self.nodes[a], &other.nodes[b]);
                if na.label() != nb.label() {
                    return false;
                }
                next.extend(na.children().iter().copied().zip(nb.children().iter().copied()));
                seen.insert((a, b));
            }
            level = next;
        }
        level
            .iter()
            .all(|&(a, b)| self.nodes[a].truncated() == other.nodes[b].truncated())
    }

    /// Replaces the subtree at `p` of the unfolding by `u`. Nodes along the
    /// path are unshared first, so only that single tree occurrence changes.
    pub fn replace_at(&self, p: &Position, u: &Term) -> Result<Term> {
        if p.is_root() {
            return Ok(u.clone());
        }
        let mut path_nodes = Vec::with_capacity(p.depth());
        let mut cur = self.root;
        for &i in p.path() {
            path_nodes.push(cur);
            cur = *self.nodes[cur]
                .children()
                .get(i - 1)
                .ok_or_else(|| Error::PositionOutOfRange(p.clone()))?;
        }
        let mut nodes = self.nodes.clone();
        let u_root = append_graph(&mut nodes, u);
        let first_copy = nodes.len();
        let k = path_nodes.len();
        for (j, &orig) in path_nodes.iter().enumerate() {
            let Node::App(f, cs) = &self.nodes[orig] else {
                unreachable!("path goes through applications only");
            };
            let mut cs = cs.clone();
            let target = if j + 1 < k { first_copy + j + 1 } else { u_root };
            cs[p.path()[j] - 1] = target;
            nodes.push(Node::App(f.clone(), cs));
        }
        Ok(Term {
            nodes,
            root: first_copy,
        }
        .compact())
    }

    /// Applies `sigma` to every variable occurrence; unbound variables stay.
    pub fn substitute(&self, sigma: &Substitution) -> Term {
        let mut nodes = self.nodes.clone();
        let mut redirect: HashMap<NodeId, NodeId> = HashMap::new();
        let mut placed: HashMap<&str, NodeId> = HashMap::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Var(x) = node {
                if let Some(val) = sigma.get(x) {
                    let r = *placed
                        .entry(x)
                        .or_insert_with(|| append_graph(&mut nodes, val));
                    redirect.insert(id, r);
                }
            }
        }
        let fix = |id: NodeId| *redirect.get(&id).unwrap_or(&id);
        for node in nodes.iter_mut().take(self.nodes.len()) {
            if let Node::App(_, cs) = node {
                for c in cs.iter_mut() {
                    *c = fix(*c);
                }
            }
        }
        Term {
            root: fix(self.root),
            nodes,
        }
        .compact()
    }

    /// Renames variables by `f`.
    pub fn rename_vars(&self, f: impl Fn(&str) -> String) -> Term {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Var(x) => Node::Var(Arc::from(f(x).as_str())),
                other => other.clone(),
            })
            .collect();
        Term {
            nodes,
            root: self.root,
        }
    }

    /// Checks that every application respects the signature.
    pub fn check_arities(&self, sig: &Signature) -> Result<()> {
        for id in self.reachable() {
            if let Node::App(f, cs) = &self.nodes[id] {
                match sig.arity(f) {
                    Some(a) if a == cs.len() => {}
                    Some(a) => {
                        return Err(Error::parse(
                            1,
                            1,
                            format!("symbol `{f}` has arity {a} but is applied to {} arguments", cs.len()),
                        ))
                    }
                    None => return Err(Error::parse(1, 1, format!("undeclared symbol `{f}`"))),
                }
            }
        }
        Ok(())
    }
}

/// Copies `t`'s nodes into `nodes` and returns the id of its root there.
fn append_graph(nodes: &mut Vec<Node>, t: &Term) -> NodeId {
    let off = nodes.len();
    nodes.extend(t.nodes.iter().map(|n| match n {
        Node::App(f, cs) => Node::App(f.clone(), cs.iter().map(|c| c + off).collect()),
        other => other.clone(),
    }));
    t.root + off
}

/// Matches a finite pattern against the subterm of `t` at `p`.
///
/// Returns `Ok(None)` on a symbol clash; cut markers never match.
pub fn match_at(pattern: &Term, t: &Term, p: &Position) -> Result<Option<Substitution>> {
    let at = t
        .node_at(p)
        .ok_or_else(|| Error::PositionOutOfRange(p.clone()))?;
    Ok(match_node(pattern, t, at))
}

/// Matches `pattern` against graph node `at` of `t`.
pub fn match_node(pattern: &Term, t: &Term, at: NodeId) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut stack = vec![(pattern.root, at)];
    while let Some((pn, tn)) = stack.pop() {
        match (&pattern.nodes[pn], &t.nodes[tn]) {
            (Node::Var(x), _) => {
                let val = t.subterm(tn);
                match sigma.get(x) {
                    Some(prev) if !prev.eq_rational(&val) => return None,
                    Some(_) => {}
                    None => {
                        sigma.insert(x.clone(), val);
                    }
                }
            }
            (Node::App(f, ps), Node::App(g, ts)) if f == g && ps.len() == ts.len() => {
                stack.extend(ps.iter().copied().zip(ts.iter().copied()));
            }
            _ => return None,
        }
    }
    Some(sigma)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::render(self))
    }
}
