//! Unweighted graphs over named cities.
//!
//! Every unweighted graph in the crate (road graph, proximity graphs,
//! threshold graphs, per-run extractions) shares this representation so that
//! they can be intersected and compared by city name.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Looks up the drawing position of a node.
pub type PositionFn<'a> = &'a dyn Fn(&str) -> Option<(f64, f64)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("graphs are defined over different node sets")]
    NodeMismatch,
    #[error("malformed graph document: {0}")]
    Malformed(String),
    #[error("expected {expected} edge sets, got {got}")]
    RunCount { expected: u32, got: usize },
}

/// Unordered pair of city names, stored with the lexicographically smaller
/// name first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(String, String);

impl Edge {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn a(&self) -> &str {
        &self.0
    }

    pub fn b(&self) -> &str {
        &self.1
    }

    pub fn touches(&self, node: &str) -> bool {
        self.0 == node || self.1 == node
    }

    pub fn shares_endpoint(&self, other: &Edge) -> bool {
        self.touches(&other.0) || self.touches(&other.1)
    }

    pub fn pair(&self) -> [String; 2] {
        [self.0.clone(), self.1.clone()]
    }
}

impl Serialize for Edge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [&self.0, &self.1].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[String; 2]>::deserialize(d)?;
        Ok(Edge::new(a, b))
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}–{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CityGraph {
    nodes: Vec<String>,
    edges: BTreeSet<Edge>,
}

/// JSON edge-list document: `{"nodes": [...], "edges": [[a, b], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub nodes: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

impl CityGraph {
    /// Edgeless graph over `nodes`, keeping their order.
    pub fn new<I, S>(nodes: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for n in &nodes {
            if !seen.insert(n.as_str()) {
                return Err(GraphError::DuplicateNode(n.clone()));
            }
        }
        Ok(CityGraph {
            nodes,
            edges: BTreeSet::new(),
        })
    }

    pub fn with_edges<I, S>(mut self, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        for (a, b) in edges {
            self.add_edge(a, b)?;
        }
        Ok(self)
    }

    /// Graph with the same nodes and no edges.
    pub fn empty_like(&self) -> Self {
        CityGraph {
            nodes: self.nodes.clone(),
            edges: BTreeSet::new(),
        }
    }

    /// Adds `a–b`; returns false if it was already present.
    pub fn add_edge(
        &mut self,
        a: impl Into<String>,
        b: impl Into<String>,
    ) -> Result<bool, GraphError> {
        let (a, b) = (a.into(), b.into());
        for n in [&a, &b] {
            if !self.has_node(n) {
                return Err(GraphError::UnknownNode(n.clone()));
            }
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        Ok(self.edges.insert(Edge::new(a, b)))
    }

    pub fn insert(&mut self, edge: Edge) -> Result<bool, GraphError> {
        self.add_edge(edge.0, edge.1)
    }

    pub fn has_node(&self, n: &str) -> bool {
        self.nodes.iter().any(|m| m == n)
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.edges.contains(edge)
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.contains(&Edge::new(a, b))
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn degree(&self, n: &str) -> usize {
        self.edges.iter().filter(|e| e.touches(n)).count()
    }

    /// Same node set, ignoring order.
    pub fn same_nodes(&self, other: &CityGraph) -> bool {
        if self.nodes.len() != other.nodes.len() {
            return false;
        }
        let mine: HashSet<&str> = self.nodes.iter().map(String::as_str).collect();
        other.nodes.iter().all(|n| mine.contains(n.as_str()))
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            nodes: self.nodes.clone(),
            edges: self.edges.iter().map(Edge::pair).collect(),
        }
    }

    pub fn from_doc(doc: GraphDoc) -> Result<Self, GraphError> {
        let g = CityGraph::new(doc.nodes)?;
        g.with_edges(doc.edges.into_iter().map(|[a, b]| (a, b)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
        CityGraph::from_doc(doc)
    }

    /// Graphviz rendering. Positions, when given, are emitted as pinned
    /// `pos` attributes (lattice y grows downwards, DOT y grows upwards).
    pub fn to_dot(&self, name: &str, positions: Option<PositionFn<'_>>) -> String {
        let mut out = format!("graph \"{}\" {{\n", escape(name));
        for n in &self.nodes {
            match positions.and_then(|p| p(n)) {
                Some((x, y)) => out.push_str(&format!(
                    "  \"{}\" [pos=\"{},{}!\"];\n",
                    escape(n),
                    x,
                    -y
                )),
                None => out.push_str(&format!("  \"{}\";\n", escape(n))),
            }
        }
        for e in &self.edges {
            out.push_str(&format!("  \"{}\" -- \"{}\";\n", escape(e.a()), escape(e.b())));
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_are_unordered() {
        assert_eq!(Edge::new("Roma", "Capua"), Edge::new("Capua", "Roma"));
        assert_eq!(Edge::new("b", "a").a(), "a");
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = CityGraph::new(["a", "b"]).unwrap();
        assert_eq!(g.add_edge("a", "a"), Err(GraphError::SelfLoop("a".into())));
        assert_eq!(g.add_edge("a", "z"), Err(GraphError::UnknownNode("z".into())));
        assert_eq!(g.add_edge("b", "a"), Ok(true));
        assert_eq!(g.add_edge("a", "b"), Ok(false));
        assert_eq!(g.edge_count(), 1);
        assert!(matches!(
            CityGraph::new(["a", "a"]),
            Err(GraphError::DuplicateNode(_))
        ));
    }

    #[test]
    fn json_and_dot() {
        let g = CityGraph::new(["x", "y", "z"])
            .unwrap()
            .with_edges([("y", "x")])
            .unwrap();
        let back = CityGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let dot = g.to_dot("t", None);
        assert!(dot.contains("\"x\" -- \"y\""));
        assert!(dot.contains("\"z\";"));
    }
}
