use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use super::ChainError;

/// An edge with a unique name, joining vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub name: String,
    pub from: usize,
    pub to: usize,
}

fn check_names(edges: &[Edge]) -> Result<(), ChainError> {
    let mut seen = BTreeSet::new();
    for e in edges {
        if !seen.insert(e.name.as_str()) {
            return Err(ChainError::Graph(format!("edge name `{}` used twice", e.name)));
        }
    }
    Ok(())
}

/// A directed graph whose edges carry unique names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
}

impl Digraph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self, ChainError> {
        check_names(&edges)?;
        if edges.iter().any(|e| e.from >= vertices.len() || e.to >= vertices.len()) {
            return Err(ChainError::Graph("edge endpoint out of range".into()));
        }
        Ok(Digraph { vertices, edges })
    }

    /// Whether the selected edges give every vertex exactly one outgoing and
    /// one incoming edge.
    pub fn is_cycle_cover(&self, selected: impl Fn(usize) -> bool) -> bool {
        let mut out = vec![0u32; self.vertices.len()];
        let mut inc = vec![0u32; self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if selected(i) {
                out[e.from] += 1;
                inc[e.to] += 1;
            }
        }
        out.iter().chain(&inc).all(|&d| d == 1)
    }
}

/// A bipartite graph; `from` indexes `left` and `to` indexes `right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub edges: Vec<Edge>,
}

impl BipartiteGraph {
    pub fn new(left: Vec<String>, right: Vec<String>, edges: Vec<Edge>) -> Result<Self, ChainError> {
        check_names(&edges)?;
        if edges.iter().any(|e| e.from >= left.len() || e.to >= right.len()) {
            return Err(ChainError::Graph("edge endpoint out of range".into()));
        }
        Ok(BipartiteGraph { left, right, edges })
    }

    pub fn is_matching(&self, selected: impl Fn(usize) -> bool) -> bool {
        let mut l = vec![false; self.left.len()];
        let mut r = vec![false; self.right.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if selected(i) {
                if l[e.from] || r[e.to] {
                    return false;
                }
                l[e.from] = true;
                r[e.to] = true;
            }
        }
        true
    }

    pub fn is_perfect_matching(&self, selected: impl Fn(usize) -> bool) -> bool {
        let size = (0..self.edges.len()).filter(|&i| selected(i)).count();
        self.left.len() == self.right.len() && size == self.left.len() && self.is_matching(selected)
    }

    /// Unordered pairs of distinct edges sharing an endpoint, by edge index.
    pub fn conflicting_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            for (j, f) in self.edges.iter().enumerate().skip(i + 1) {
                if e.from == f.from || e.to == f.to {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Graph {
    Directed(Digraph),
    Bipartite(BipartiteGraph),
}

/// Reads a graph file:
///
/// ```text
/// digraph            # or: bigraph
/// vertex a b         # optional; for bigraph use `left ...` and `right ...`
/// e1 a b             # edge named e1 from a to b
/// ```
pub fn parse_graph(text: &str) -> Result<Graph, ChainError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| ChainError::Parse {
        line: 0,
        message: "missing `digraph` or `bigraph` header".into(),
    })?;
    let directed = match header {
        "digraph" => true,
        "bigraph" => false,
        other => {
            return Err(ChainError::Parse {
                line: 1,
                message: format!("unknown header `{other}`"),
            })
        }
    };
    let mut sides: [(Vec<String>, HashMap<String, usize>); 2] = Default::default();
    fn vertex(side: &mut (Vec<String>, HashMap<String, usize>), name: &str) -> usize {
        if let Some(&i) = side.1.get(name) {
            return i;
        }
        side.0.push(name.to_string());
        side.1.insert(name.to_string(), side.0.len() - 1);
        side.0.len() - 1
    }
    let mut edges = Vec::new();
    for (line, l) in lines {
        let words: Vec<&str> = l.split_whitespace().collect();
        let target = match (directed, words[0]) {
            (true, "vertex") | (false, "left") => Some(0),
            (false, "right") => Some(1),
            _ => None,
        };
        if let Some(s) = target {
            for w in &words[1..] {
                vertex(&mut sides[s], w);
            }
            continue;
        }
        let [name, u, v] = words[..] else {
            return Err(ChainError::Parse {
                line,
                message: format!("expected `NAME U V`, found `{l}`"),
            });
        };
        let from = vertex(&mut sides[0], u);
        let to = vertex(&mut sides[if directed { 0 } else { 1 }], v);
        edges.push(Edge {
            name: name.to_string(),
            from,
            to,
        });
    }
    let [(left, _), (right, _)] = sides;
    Ok(if directed {
        Graph::Directed(Digraph::new(left, edges)?)
    } else {
        Graph::Bipartite(BipartiteGraph::new(left, right, edges)?)
    })
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = String::new();
    match g {
        Graph::Directed(d) => {
            out.push_str("digraph\n");
            let _ = writeln!(out, "vertex {}", d.vertices.join(" "));
            for e in &d.edges {
                let _ = writeln!(out, "{} {} {}", e.name, d.vertices[e.from], d.vertices[e.to]);
            }
        }
        Graph::Bipartite(b) => {
            out.push_str("bigraph\n");
            let _ = writeln!(out, "left {}", b.left.join(" "));
            let _ = writeln!(out, "right {}", b.right.join(" "));
            for e in &b.edges {
                let _ = writeln!(out, "{} {} {}", e.name, b.left[e.from], b.right[e.to]);
            }
        }
    }
    out
}
