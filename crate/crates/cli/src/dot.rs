//! Graphviz output for overlap graphs and reduction diagrams.

use std::fmt::Write;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// An undirected graph or a directed diagram, built node by node.
pub struct Dot {
    directed: bool,
    name: String,
    body: String,
}

impl Dot {
    pub fn graph(name: &str) -> Dot {
        Dot {
            directed: false,
            name: name.to_string(),
            body: String::new(),
        }
    }

    pub fn digraph(name: &str) -> Dot {
        Dot {
            directed: true,
            name: name.to_string(),
            body: String::new(),
        }
    }

    pub fn node(&mut self, id: &str, label: &str, attrs: &[(&str, &str)]) -> &mut Dot {
        let mut a = format!("label={}", quote(label));
        for (k, v) in attrs {
            let _ = write!(a, ", {k}={}", quote(v));
        }
        let _ = writeln!(self.body, "  {} [{a}];", quote(id));
        self
    }

    pub fn edge(&mut self, from: &str, to: &str, label: &str) -> &mut Dot {
        let op = if self.directed { "->" } else { "--" };
        let _ = writeln!(self.body, "  {} {op} {} [label={}];", quote(from), quote(to), quote(label));
        self
    }

    /// Opens a cluster subgraph; close it with [`Dot::end_cluster`].
    pub fn begin_cluster(&mut self, id: &str, label: &str) -> &mut Dot {
        let _ = writeln!(self.body, "  subgraph {} {{\n  label={};", quote(&format!("cluster_{id}")), quote(label));
        self
    }

    pub fn end_cluster(&mut self) -> &mut Dot {
        self.body.push_str("  }\n");
        self
    }

    pub fn render(&self) -> String {
        let kind = if self.directed { "digraph" } else { "graph" };
        format!("{kind} {} {{\n  node [shape=box];\n{}}}\n", quote(&self.name), self.body)
    }
}
