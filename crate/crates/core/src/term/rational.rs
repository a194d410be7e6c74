//! Bisimilarity and canonical forms of rational terms.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::{Node, NodeId, Term};

impl Term {
    /// Equality of the (possibly infinite) tree unfoldings, decided by a
    /// worklist over node pairs of the product graph.
    pub fn eq_rational(&self, other: &Term) -> bool {
        let mut seen: HashSet<(NodeId, NodeId)> = HashSet::new();
        let mut work = vec![(self.root, other.root)];
        while let Some((a, b)) = work.pop() {
            if !seen.insert((a, b)) {
                continue;
            }
            let (na, nb) = (&self.nodes[a], &other.nodes[b]);
            if na.label() != nb.label() {
                return false;
            }
            work.extend(na.children().iter().copied().zip(nb.children().iter().copied()));
        }
        true
    }

    /// Depth at which bounded comparison is guaranteed to decide bisimilarity.
    pub fn bisimulation_depth(&self, other: &Term) -> usize {
        let arity = self
            .nodes
            .iter()
            .chain(other.nodes.iter())
            .map(|n| n.children().len())
            .max()
            .unwrap_or(0)
            .max(1);
        let n = self.nodes.len().max(other.nodes.len());
        n * n * arity + 1
    }

    /// The minimal equation system for this term's unfolding, numbered in
    /// depth-first preorder. Two terms are equal iff their canonical forms
    /// are identical node-for-node.
    pub fn canonical(&self) -> Term {
        let t = self.clone().compact();
        let n = t.nodes.len();
        // initial partition by label
        let mut class: Vec<usize> = {
            let mut ids: BTreeMap<_, usize> = BTreeMap::new();
            t.nodes
                .iter()
                .map(|node| {
                    let next = ids.len();
                    *ids.entry(node.label()).or_insert(next)
                })
                .collect()
        };
        loop {
            let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let refined: Vec<usize> = (0..n)
                .map(|i| {
                    let sig = (
                        class[i],
                        t.nodes[i].children().iter().map(|&c| class[c]).collect::<Vec<_>>(),
                    );
                    let next = ids.len();
                    *ids.entry(sig).or_insert(next)
                })
                .collect();
            let stable = ids.len() == class.iter().collect::<HashSet<_>>().len();
            class = refined;
            if stable {
                break;
            }
        }
        // one representative node per class
        let mut rep: HashMap<usize, NodeId> = HashMap::new();
        for i in 0..n {
            rep.entry(class[i]).or_insert(i);
        }
        let nodes: Vec<Node> = (0..n)
            .map(|i| match &t.nodes[rep[&class[i]]] {
                Node::App(f, cs) => Node::App(f.clone(), cs.iter().map(|&c| rep[&class[c]]).collect()),
                other => other.clone(),
            })
            .collect();
        Term {
            nodes,
            root: rep[&class[t.root]],
        }
        .compact()
    }

    /// A string uniquely identifying the unfolding; usable as a hash key.
    pub fn canonical_key(&self) -> String {
        use std::fmt::Write;
        let c = self.canonical();
        let mut out = String::new();
        for node in &c.nodes {
            match node {
                Node::App(f, cs) => {
                    let _ = write!(out, "{f}(");
                    for c in cs {
                        let _ = write!(out, "{c},");
                    }
                    out.push(')');
                }
                Node::Var(x) => {
                    let _ = write!(out, "${x}");
                }
                Node::Cut => out.push('#'),
            }
            out.push(';');
        }
        out
    }
}
