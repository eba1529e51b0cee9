//! Weighted city graphs aggregated over repeated runs, threshold graphs, and
//! the inclusion/intersection analyses run on them.
//!
//! Weights and thresholds are exact fractions `count/k`, never floats, so a
//! comparison such as `12/28 ≥ 9/28` is decided exactly.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::geometry::{self, GeometryError, PointSet};
use crate::graph::{CityGraph, Edge, GraphError};

/// Non-negative rational `num/den` with `den ≥ 1`, compared by value.
#[derive(Debug, Clone, Copy)]
pub struct Fraction {
    num: u32,
    den: u32,
}

impl Fraction {
    pub fn new(num: u32, den: u32) -> Option<Self> {
        (den > 0).then_some(Fraction { num, den })
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Fraction {}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = String;

    /// Accepts `a/b` or a bare integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("`{s}` is not a fraction a/b"))
        };
        Fraction::new(parse(n)?, parse(d)?).ok_or_else(|| format!("`{s}` has a zero denominator"))
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Edge-occurrence counts over `k` runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedCityGraph {
    nodes: Vec<String>,
    k: u32,
    counts: BTreeMap<Edge, u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedEdgeDoc {
    pub a: String,
    pub b: String,
    pub count: u32,
    /// `count/k`; informational on input.
    #[serde(default, skip_deserializing)]
    pub weight: String,
    #[serde(default, skip_deserializing)]
    pub weight_decimal: f64,
}

/// JSON form of a [`WeightedCityGraph`]. Also accepted as input for
/// hand-transcribed laboratory matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedDoc {
    pub k: u32,
    pub nodes: Vec<String>,
    pub edges: Vec<WeightedEdgeDoc>,
}

impl WeightedCityGraph {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn count(&self, a: &str, b: &str) -> u32 {
        self.counts.get(&Edge::new(a, b)).copied().unwrap_or(0)
    }

    /// `count/k` for observed edges.
    pub fn weight(&self, a: &str, b: &str) -> Option<Fraction> {
        self.counts
            .get(&Edge::new(a, b))
            .map(|&c| Fraction { num: c, den: self.k })
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Edge, Fraction)> {
        self.counts
            .iter()
            .map(|(e, &c)| (e, Fraction { num: c, den: self.k }))
    }

    pub fn edge_count(&self) -> usize {
        self.counts.len()
    }

    pub fn to_doc(&self) -> WeightedDoc {
        WeightedDoc {
            k: self.k,
            nodes: self.nodes.clone(),
            edges: self
                .counts
                .iter()
                .map(|(e, &c)| WeightedEdgeDoc {
                    a: e.a().to_string(),
                    b: e.b().to_string(),
                    count: c,
                    weight: format!("{c}/{}", self.k),
                    weight_decimal: c as f64 / self.k as f64,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: WeightedDoc) -> Result<Self, GraphError> {
        if doc.k == 0 {
            return Err(GraphError::RunCount { expected: 1, got: 0 });
        }
        let base = CityGraph::new(doc.nodes.clone())?;
        let mut counts = BTreeMap::new();
        for e in doc.edges {
            for n in [&e.a, &e.b] {
                if !base.has_node(n) {
                    return Err(GraphError::UnknownNode(n.clone()));
                }
            }
            if e.a == e.b {
                return Err(GraphError::SelfLoop(e.a));
            }
            if e.count == 0 || e.count > doc.k {
                return Err(GraphError::Malformed(format!(
                    "count {} for {}–{} outside [1, {}]",
                    e.count, e.a, e.b, doc.k
                )));
            }
            counts.insert(Edge::new(e.a, e.b), e.count);
        }
        Ok(WeightedCityGraph {
            nodes: doc.nodes,
            k: doc.k,
            counts,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("weighted graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: WeightedDoc =
            serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
        WeightedCityGraph::from_doc(doc)
    }

    /// DOT with `count/k` edge labels.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph \"{name}\" {{\n");
        for n in &self.nodes {
            out.push_str(&format!("  \"{n}\";\n"));
        }
        for (e, &c) in &self.counts {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [label=\"{}/{}\"];\n",
                e.a(),
                e.b(),
                c,
                self.k
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Counts edge occurrences across `k` edge sets over the same nodes.
pub fn aggregate(edge_sets: &[CityGraph], k: u32) -> Result<WeightedCityGraph, GraphError> {
    if k == 0 || edge_sets.len() != k as usize {
        return Err(GraphError::RunCount {
            expected: k,
            got: edge_sets.len(),
        });
    }
    let first = &edge_sets[0];
    let mut counts = BTreeMap::new();
    for g in edge_sets {
        if !g.same_nodes(first) {
            return Err(GraphError::NodeMismatch);
        }
        for e in g.edges() {
            *counts.entry(e.clone()).or_insert(0) += 1;
        }
    }
    Ok(WeightedCityGraph {
        nodes: first.nodes().to_vec(),
        k,
        counts,
    })
}

/// Keeps edges with weight `≥ theta`; every node is kept.
pub fn threshold(p: &WeightedCityGraph, theta: Fraction) -> CityGraph {
    let mut g = CityGraph::new(p.nodes.iter().cloned()).expect("unique nodes");
    for (e, w) in p.edges() {
        if w >= theta {
            g.insert(e.clone()).expect("edge over graph nodes");
        }
    }
    g
}

/// The reference road network and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadGraph {
    pub graph: CityGraph,
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoadDoc {
    #[serde(default)]
    provenance: Option<String>,
    #[serde(default)]
    edges: Vec<[String; 2]>,
}

/// Parses a road edge list `{"provenance": "...", "edges": [[a, b], ...]}`
/// over `cities`. An empty document is the empty road graph.
pub fn load_road_graph(text: &str, cities: &[String]) -> Result<RoadGraph, GraphError> {
    let base = CityGraph::new(cities.iter().cloned())?;
    if text.trim().is_empty() {
        return Ok(RoadGraph {
            graph: base,
            provenance: None,
        });
    }
    let doc: RoadDoc =
        serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
    let graph = base.with_edges(doc.edges.into_iter().map(|[a, b]| (a, b)))?;
    Ok(RoadGraph {
        graph,
        provenance: doc.provenance,
    })
}

pub fn intersect(g1: &CityGraph, g2: &CityGraph) -> Result<CityGraph, GraphError> {
    if !g1.same_nodes(g2) {
        return Err(GraphError::NodeMismatch);
    }
    let mut out = g1.empty_like();
    for e in g1.edges().intersection(g2.edges()) {
        out.insert(e.clone())?;
    }
    Ok(out)
}

pub fn union(g1: &CityGraph, g2: &CityGraph) -> Result<CityGraph, GraphError> {
    if !g1.same_nodes(g2) {
        return Err(GraphError::NodeMismatch);
    }
    let mut out = g1.clone();
    for e in g2.edges() {
        out.insert(e.clone())?;
    }
    Ok(out)
}

/// Result of an edge-set inclusion test, with the edges of the left side
/// that are missing from the right side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inclusion {
    pub holds: bool,
    pub missing: Vec<Edge>,
}

/// Whether `edges(g1) ⊆ edges(g2)`.
pub fn is_subgraph(g1: &CityGraph, g2: &CityGraph) -> Result<Inclusion, GraphError> {
    if !g1.same_nodes(g2) {
        return Err(GraphError::NodeMismatch);
    }
    let missing: Vec<Edge> = g1.edges().difference(g2.edges()).cloned().collect();
    Ok(Inclusion {
        holds: missing.is_empty(),
        missing,
    })
}

/// Connected components, each listed in node order, ordered by their first
/// node.
pub fn components(g: &CityGraph) -> Vec<Vec<String>> {
    let idx: HashMap<&str, usize> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut parent: Vec<usize> = (0..g.node_count()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in g.edges() {
        let (a, b) = (find(&mut parent, idx[e.a()]), find(&mut parent, idx[e.b()]));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, n) in g.nodes().iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(n.clone());
    }
    let mut out: Vec<Vec<String>> = groups.into_values().collect();
    out.sort_by_key(|c| idx[c[0].as_str()]);
    out
}

pub fn isolated(g: &CityGraph) -> Vec<String> {
    g.nodes()
        .iter()
        .filter(|n| g.degree(n) == 0)
        .cloned()
        .collect()
}

/// Largest component size.
pub fn largest_component(g: &CityGraph) -> usize {
    components(g).iter().map(Vec::len).max().unwrap_or(0)
}

// ---- findings ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Skipped,
}

/// One named relation with its witnesses (edges violating it) when it fails.
#[derive(Debug, Clone, Serialize)]
pub struct Relation {
    pub name: String,
    pub status: Status,
    pub witnesses: Vec<Edge>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Relation {
    fn from_inclusion(name: String, inc: Inclusion) -> Self {
        Relation {
            name,
            status: if inc.holds { Status::Holds } else { Status::Fails },
            witnesses: inc.missing,
            tags: Vec::new(),
            note: None,
        }
    }

    fn skipped(name: String, note: &str) -> Self {
        Relation {
            name,
            status: Status::Skipped,
            witnesses: Vec::new(),
            tags: Vec::new(),
            note: Some(note.to_string()),
        }
    }

    fn tagged(mut self, tag: &str) -> Self {
        self.tags.push(tag.to_string());
        self
    }
}

/// Threshold graph statistics at one θ.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaEntry {
    pub theta: Fraction,
    pub theta_decimal: f64,
    pub edges: usize,
    pub planar: bool,
    pub crossings: Vec<(Edge, Edge)>,
    pub components: usize,
    pub largest_component: usize,
    pub connected: bool,
    pub isolated: Vec<String>,
    pub mst_included: bool,
    pub mst_missing: Vec<Edge>,
}

/// Change in component structure between consecutive θ values.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentEvent {
    pub theta: Fraction,
    pub components: usize,
    pub newly_isolated: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub graph: String,
    pub k: u32,
    pub entries: Vec<ThetaEntry>,
    /// Largest θ whose threshold graph is connected.
    pub last_connected: Option<Fraction>,
    pub events: Vec<ComponentEvent>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FindingsReport {
    pub relations: Vec<Relation>,
    pub sweeps: Vec<Sweep>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Inputs to [`findings_report`]. `lab` is a laboratory weighted graph,
/// `simulated` the aggregate of simulation runs, `road` the reference road
/// graph; any of them may be absent, in which case the relations that need
/// them are reported as skipped.
#[derive(Debug, Clone, Copy)]
pub struct FindingsInput<'a> {
    pub sites: &'a PointSet,
    pub lab: Option<&'a WeightedCityGraph>,
    pub simulated: Option<&'a WeightedCityGraph>,
    pub road: Option<&'a CityGraph>,
    /// Extra θ values to include in the sweeps besides every `c/k`.
    pub thetas: &'a [Fraction],
}

/// `⌊k/3⌋/k` (at least `1/k`): edges present in about a third of the runs.
pub fn strong_theta(k: u32) -> Fraction {
    Fraction {
        num: (k / 3).max(1),
        den: k,
    }
}

fn raw_theta(k: u32) -> Fraction {
    Fraction { num: 1, den: k }
}

fn half_theta(k: u32) -> Fraction {
    Fraction {
        num: k.div_ceil(2),
        den: k,
    }
}

fn sweep(
    label: &str,
    p: &WeightedCityGraph,
    mst: &CityGraph,
    sites: &PointSet,
    extra: &[Fraction],
) -> Result<Sweep, GeometryError> {
    let mut thetas: BTreeSet<Fraction> = (1..=p.k()).map(|c| Fraction { num: c, den: p.k() }).collect();
    thetas.extend(extra.iter().copied());
    let mut entries = Vec::with_capacity(thetas.len());
    let mut events = Vec::new();
    let mut prev: Option<(usize, Vec<String>)> = None;
    for theta in thetas {
        let g = threshold(p, theta);
        let plan = geometry::straightline_planar(&g, sites)?;
        let comps = components(&g);
        let iso = isolated(&g);
        let inc = is_subgraph(mst, &g).expect("same city set");
        let changed = prev.as_ref().is_none_or(|(c, _)| *c != comps.len());
        if changed {
            let newly: Vec<String> = iso
                .iter()
                .filter(|n| prev.as_ref().is_none_or(|(_, was)| !was.contains(n)))
                .cloned()
                .collect();
            events.push(ComponentEvent {
                theta,
                components: comps.len(),
                newly_isolated: newly,
            });
        }
        prev = Some((comps.len(), iso.clone()));
        entries.push(ThetaEntry {
            theta,
            theta_decimal: theta.to_f64(),
            edges: g.edge_count(),
            planar: plan.planar,
            crossings: plan.crossings,
            components: comps.len(),
            largest_component: comps.iter().map(Vec::len).max().unwrap_or(0),
            connected: comps.len() == 1,
            isolated: iso,
            mst_included: inc.holds,
            mst_missing: inc.missing,
        });
    }
    let last_connected = entries.iter().filter(|e| e.connected).map(|e| e.theta).max();
    Ok(Sweep {
        graph: label.to_string(),
        k: p.k(),
        entries,
        last_connected,
        events,
    })
}

/// Evaluates the proximity-graph hierarchy on the sites and the inclusion
/// relations between proximity graphs, the road graph and the weighted
/// graphs, plus a θ sweep of each weighted graph.
pub fn findings_report(input: FindingsInput<'_>) -> Result<FindingsReport, crate::Error> {
    let sites = input.sites;
    let mst = geometry::emst(sites);
    let rng = geometry::rng_graph(sites);
    let gg = geometry::gabriel_graph(sites);
    for w in [input.lab, input.simulated].into_iter().flatten() {
        let probe = CityGraph::new(w.nodes().iter().cloned())?;
        if !probe.same_nodes(&mst) {
            return Err(GraphError::NodeMismatch.into());
        }
    }
    if let Some(h) = input.road {
        if !h.same_nodes(&mst) {
            return Err(GraphError::NodeMismatch.into());
        }
    }

    let mut rel = Vec::new();
    let eq = {
        let a = is_subgraph(&mst, &rng)?;
        let b = is_subgraph(&rng, &mst)?;
        Inclusion {
            holds: a.holds && b.holds,
            missing: a.missing.into_iter().chain(b.missing).collect(),
        }
    };
    rel.push(Relation::from_inclusion("MST = RNG".into(), eq));
    rel.push(Relation::from_inclusion("MST ⊆ RNG".into(), is_subgraph(&mst, &rng)?));
    rel.push(Relation::from_inclusion("RNG ⊆ GG".into(), is_subgraph(&rng, &gg)?));

    let mut sweeps = Vec::new();
    for (label, w) in [("P", input.lab), ("V", input.simulated)] {
        let Some(w) = w else {
            let why = if label == "P" {
                "no laboratory graph supplied"
            } else {
                "no simulated graph supplied"
            };
            rel.push(Relation::skipped(format!("GG ⊆ {label}(raw)"), why));
            rel.push(Relation::skipped(format!("H ⊆ {label}(raw)"), why).tagged("fixture-dependent"));
            rel.push(Relation::skipped(format!("{label}(strong) ⊆ H"), why).tagged("fixture-dependent"));
            continue;
        };
        let raw = threshold(w, raw_theta(w.k()));
        let strong_t = strong_theta(w.k());
        let strong = threshold(w, strong_t);
        rel.push(Relation::from_inclusion(
            format!("GG ⊆ {label}({})", raw_theta(w.k())),
            is_subgraph(&gg, &raw)?,
        ));
        rel.push(Relation::from_inclusion(
            format!("MST ⊆ {label}({strong_t})"),
            is_subgraph(&mst, &strong)?,
        ));
        match input.road {
            Some(h) => {
                rel.push(
                    Relation::from_inclusion(
                        format!("H ⊆ {label}({})", raw_theta(w.k())),
                        is_subgraph(h, &raw)?,
                    )
                    .tagged("fixture-dependent"),
                );
                rel.push(
                    Relation::from_inclusion(
                        format!("{label}({strong_t}) ⊆ H"),
                        is_subgraph(&strong, h)?,
                    )
                    .tagged("fixture-dependent"),
                );
            }
            None => {
                rel.push(
                    Relation::skipped(format!("H ⊆ {label}(raw)"), "no road graph supplied")
                        .tagged("fixture-dependent"),
                );
                rel.push(
                    Relation::skipped(format!("{label}(strong) ⊆ H"), "no road graph supplied")
                        .tagged("fixture-dependent"),
                );
            }
        }
        sweeps.push(sweep(label, w, &mst, sites, input.thetas)?);
    }

    match (input.lab, input.simulated) {
        (Some(p), Some(v)) => {
            let ph = half_theta(p.k());
            let vt = Fraction { num: v.k(), den: v.k() };
            rel.push(Relation::from_inclusion(
                format!("P({ph}) ⊆ V({vt})"),
                is_subgraph(&threshold(p, ph), &threshold(v, vt))?,
            ));
        }
        _ => rel.push(Relation::skipped(
            "P(half) ⊆ V(unanimous)".into(),
            "needs both laboratory and simulated graphs",
        )),
    }

    if let Some(h) = input.road {
        let plan = geometry::straightline_planar(h, sites)?;
        rel.push(
            Relation {
                name: "H planar".into(),
                status: if plan.planar { Status::Holds } else { Status::Fails },
                witnesses: plan.crossings.into_iter().flat_map(|(a, b)| [a, b]).collect(),
                tags: Vec::new(),
                note: None,
            }
            .tagged("fixture-dependent"),
        );
    }

    Ok(FindingsReport {
        relations: rel,
        sweeps,
        notes: Vec::new(),
    })
}

impl FindingsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// Plain-text tables for terminals and logs.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out.push_str("relation                          status   witnesses\n");
        for r in &self.relations {
            let w: Vec<String> = r.witnesses.iter().map(ToString::to_string).collect();
            let mut name = r.name.clone();
            if !r.tags.is_empty() {
                name.push_str(&format!(" [{}]", r.tags.join(",")));
            }
            let status = match r.status {
                Status::Holds => "holds",
                Status::Fails => "FAILS",
                Status::Skipped => "skipped",
            };
            out.push_str(&format!("{name:<33} {status:<8} {}\n", w.join(", ")));
        }
        for s in &self.sweeps {
            out.push_str(&format!(
                "\n{} (k = {}), last connected θ = {}\n",
                s.graph,
                s.k,
                s.last_connected
                    .map_or_else(|| "none".to_string(), |t| t.to_string())
            ));
            out.push_str("θ        edges planar comps largest MST⊆  isolated\n");
            for e in &s.entries {
                out.push_str(&format!(
                    "{:<8} {:>5} {:<6} {:>5} {:>7} {:<5} {}\n",
                    e.theta.to_string(),
                    e.edges,
                    if e.planar { "yes" } else { "no" },
                    e.components,
                    e.largest_component,
                    if e.mst_included { "yes" } else { "no" },
                    e.isolated.join(" ")
                ));
            }
        }
        out
    }
}
