//! Planar proximity graphs over small point sets.
//!
//! All constructions are brute force (`O(n³)` at worst): city sets hold a few
//! dozen points at most. Distances are compared squared, in double precision,
//! without an epsilon. Points on the boundary of a Gabriel disc or an RNG
//! lune do not block an edge.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CityGraph, Edge};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point set is empty")]
    Empty,
    #[error("duplicate point id `{0}`")]
    DuplicateId(String),
    #[error("non-finite coordinate for `{0}`")]
    NonFinite(String),
    #[error("`{0}` and `{1}` share coordinates")]
    DuplicateCoordinates(String, String),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("zero-length segment")]
    ZeroLengthSegment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

impl Site {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Self {
        Site { id: id.into(), x, y }
    }

    fn dist2(&self, other: &Site) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }
}

/// Validated, ordered set of named points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    sites: Vec<Site>,
}

impl PointSet {
    pub fn new(sites: Vec<Site>) -> Result<Self, GeometryError> {
        if sites.is_empty() {
            return Err(GeometryError::Empty);
        }
        let mut ids = HashSet::new();
        let mut coords: HashMap<(u64, u64), &str> = HashMap::new();
        for s in &sites {
            if !s.x.is_finite() || !s.y.is_finite() {
                return Err(GeometryError::NonFinite(s.id.clone()));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(GeometryError::DuplicateId(s.id.clone()));
            }
            // +0.0 normalises -0.0 so the bit patterns compare as values.
            let key = ((s.x + 0.0).to_bits(), (s.y + 0.0).to_bits());
            if let Some(prev) = coords.insert(key, &s.id) {
                return Err(GeometryError::DuplicateCoordinates(
                    prev.to_string(),
                    s.id.clone(),
                ));
            }
        }
        Ok(PointSet { sites })
    }

    pub fn from_coords<S: Into<String>>(
        pts: impl IntoIterator<Item = (S, f64, f64)>,
    ) -> Result<Self, GeometryError> {
        PointSet::new(pts.into_iter().map(|(id, x, y)| Site::new(id, x, y)).collect())
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Site> {
        self.sites.iter().find(|s| s.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.sites.iter().map(|s| s.id.as_str())
    }

    fn empty_graph(&self) -> CityGraph {
        CityGraph::new(self.ids()).expect("ids validated unique")
    }

    /// Applies `f` to every coordinate pair, keeping ids.
    pub fn map_coords(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> Result<Self, GeometryError> {
        PointSet::new(
            self.sites
                .iter()
                .map(|s| {
                    let (x, y) = f(s.x, s.y);
                    Site::new(s.id.clone(), x, y)
                })
                .collect(),
        )
    }

    /// Sum of Euclidean edge lengths of `g` drawn on these points.
    pub fn total_length(&self, g: &CityGraph) -> Result<f64, GeometryError> {
        g.edges().iter().try_fold(0.0, |acc, e| {
            let (a, b) = self.endpoints(e)?;
            Ok(acc + a.dist2(b).sqrt())
        })
    }

    fn endpoints(&self, e: &Edge) -> Result<(&Site, &Site), GeometryError> {
        let a = self
            .get(e.a())
            .ok_or_else(|| GeometryError::UnknownPoint(e.a().into()))?;
        let b = self
            .get(e.b())
            .ok_or_else(|| GeometryError::UnknownPoint(e.b().into()))?;
        Ok((a, b))
    }
}

/// Edge `ab` iff no third point lies strictly inside the disc with diameter
/// `ab`. A point `c` is strictly inside exactly when the angle `acb` is
/// obtuse, i.e. `(a - c)·(b - c) < 0`.
pub fn gabriel_graph(p: &PointSet) -> CityGraph {
    let s = p.sites();
    let mut g = p.empty_graph();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let blocked = s.iter().enumerate().any(|(k, c)| {
                k != i && k != j && {
                    let dot = (s[i].x - c.x) * (s[j].x - c.x) + (s[i].y - c.y) * (s[j].y - c.y);
                    dot < 0.0
                }
            });
            if !blocked {
                g.add_edge(s[i].id.clone(), s[j].id.clone()).expect("valid ids");
            }
        }
    }
    g
}

/// Edge `ab` iff no third point `c` has `max(|ac|, |bc|) < |ab|`.
pub fn rng_graph(p: &PointSet) -> CityGraph {
    let s = p.sites();
    let mut g = p.empty_graph();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let d = s[i].dist2(&s[j]);
            let blocked = s.iter().enumerate().any(|(k, c)| {
                k != i && k != j && s[i].dist2(c).max(s[j].dist2(c)) < d
            });
            if !blocked {
                g.add_edge(s[i].id.clone(), s[j].id.clone()).expect("valid ids");
            }
        }
    }
    g
}

/// Candidate edge ordering shared by Kruskal and Prim: squared length, then
/// the lexicographically smaller id pair.
fn edge_key<'a>(a: &'a Site, b: &'a Site) -> (f64, &'a str, &'a str) {
    let (lo, hi) = if a.id <= b.id {
        (&a.id, &b.id)
    } else {
        (&b.id, &a.id)
    };
    (a.dist2(b), lo.as_str(), hi.as_str())
}

fn key_less(x: &(f64, &str, &str), y: &(f64, &str, &str)) -> bool {
    match x.0.total_cmp(&y.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => (x.1, x.2) < (y.1, y.2),
    }
}

/// Euclidean minimum spanning tree (Kruskal over all pairs). Equal-length
/// candidates are taken in lexicographic id-pair order.
pub fn emst(p: &PointSet) -> CityGraph {
    let s = p.sites();
    let mut cand: Vec<(usize, usize)> = (0..s.len())
        .flat_map(|i| (i + 1..s.len()).map(move |j| (i, j)))
        .collect();
    cand.sort_by(|&(a, b), &(c, d)| {
        let (x, y) = (edge_key(&s[a], &s[b]), edge_key(&s[c], &s[d]));
        x.0.total_cmp(&y.0).then_with(|| (x.1, x.2).cmp(&(y.1, y.2)))
    });

    let mut parent: Vec<usize> = (0..s.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut g = p.empty_graph();
    for (i, j) in cand {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            g.add_edge(s[i].id.clone(), s[j].id.clone()).expect("valid ids");
            if g.edge_count() + 1 == s.len() {
                break;
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthStage {
    pub node: String,
    pub parent: String,
}

/// Order in which a spanning tree rooted at `root` acquires its nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSequence {
    pub root: String,
    pub stages: Vec<GrowthStage>,
}

impl GrowthSequence {
    pub fn to_graph(&self, p: &PointSet) -> CityGraph {
        let mut g = p.empty_graph();
        for st in &self.stages {
            g.add_edge(st.node.clone(), st.parent.clone())
                .expect("stages reference point ids");
        }
        g
    }
}

/// Prim's algorithm from `root`, recording each attachment in order.
pub fn prim_growth(p: &PointSet, root: &str) -> Result<GrowthSequence, GeometryError> {
    let s = p.sites();
    let r = s
        .iter()
        .position(|x| x.id == root)
        .ok_or_else(|| GeometryError::UnknownPoint(root.to_string()))?;
    let mut in_tree = vec![false; s.len()];
    in_tree[r] = true;
    let mut stages = Vec::with_capacity(s.len().saturating_sub(1));
    for _ in 1..s.len() {
        let mut best: Option<(usize, usize)> = None;
        for (t, _) in in_tree.iter().enumerate().filter(|(_, &inside)| inside) {
            for (o, _) in in_tree.iter().enumerate().filter(|(_, &inside)| !inside) {
                let better = match best {
                    None => true,
                    Some((bt, bo)) => key_less(&edge_key(&s[t], &s[o]), &edge_key(&s[bt], &s[bo])),
                };
                if better {
                    best = Some((t, o));
                }
            }
        }
        let (t, o) = best.expect("a node outside the tree remains");
        in_tree[o] = true;
        stages.push(GrowthStage {
            node: s[o].id.clone(),
            parent: s[t].id.clone(),
        });
    }
    Ok(GrowthSequence {
        root: root.to_string(),
        stages,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl Segment {
    pub fn new(a: (f64, f64), b: (f64, f64)) -> Self {
        Segment { a, b }
    }
}

fn orient(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> f64 {
    (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
}

/// True iff the open segments share a point that is not a common endpoint.
///
/// An endpoint touching the other segment's interior is not a crossing (the
/// endpoint is excluded from its own open segment). Collinear segments cross
/// when their open intervals overlap.
pub fn segments_cross(s1: Segment, s2: Segment) -> Result<bool, GeometryError> {
    if s1.a == s1.b || s2.a == s2.b {
        return Err(GeometryError::ZeroLengthSegment);
    }
    let o1 = orient(s1.a, s1.b, s2.a);
    let o2 = orient(s1.a, s1.b, s2.b);
    let o3 = orient(s2.a, s2.b, s1.a);
    let o4 = orient(s2.a, s2.b, s1.b);

    if o1 == 0.0 && o2 == 0.0 {
        // Collinear: compare open intervals along the dominant axis.
        let use_x = (s1.b.0 - s1.a.0).abs() >= (s1.b.1 - s1.a.1).abs();
        let proj = |p: (f64, f64)| if use_x { p.0 } else { p.1 };
        let (l1, h1) = minmax(proj(s1.a), proj(s1.b));
        let (l2, h2) = minmax(proj(s2.a), proj(s2.b));
        return Ok(l1.max(l2) < h1.min(h2));
    }
    Ok(o1 * o2 < 0.0 && o3 * o4 < 0.0)
}

fn minmax(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarityReport {
    pub planar: bool,
    pub crossings: Vec<(Edge, Edge)>,
}

/// Checks the straight-line drawing of `g` on `p` for crossings between
/// edges that share no endpoint.
pub fn straightline_planar(g: &CityGraph, p: &PointSet) -> Result<PlanarityReport, GeometryError> {
    let mut segs = Vec::with_capacity(g.edge_count());
    for e in g.edges() {
        let (a, b) = p.endpoints(e)?;
        segs.push((e, Segment::new((a.x, a.y), (b.x, b.y))));
    }
    let mut crossings = Vec::new();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            let (ei, si) = segs[i];
            let (ej, sj) = segs[j];
            if ei.shares_endpoint(ej) {
                continue;
            }
            if segments_cross(si, sj)? {
                crossings.push((ei.clone(), ej.clone()));
            }
        }
    }
    Ok(PlanarityReport {
        planar: crossings.is_empty(),
        crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(&str, f64, f64)]) -> PointSet {
        PointSet::from_coords(v.iter().map(|&(i, x, y)| (i, x, y))).unwrap()
    }

    fn edges(g: &CityGraph) -> Vec<(String, String)> {
        g.edges()
            .iter()
            .map(|e| (e.a().to_string(), e.b().to_string()))
            .collect()
    }

    fn chain() -> PointSet {
        pts(&[("a", 0.0, 0.0), ("b", 1.0, 0.0), ("c", 2.0, 0.0)])
    }

    #[test]
    fn rejects_degenerate_input() {
        assert_eq!(PointSet::new(vec![]), Err(GeometryError::Empty));
        assert_eq!(
            PointSet::from_coords([("a", 1.0, 1.0), ("b", 1.0, 1.0)]),
            Err(GeometryError::DuplicateCoordinates("a".into(), "b".into()))
        );
        assert_eq!(
            PointSet::from_coords([("a", 0.0, 0.0), ("a", 1.0, 1.0)]),
            Err(GeometryError::DuplicateId("a".into()))
        );
        assert!(matches!(
            PointSet::from_coords([("a", f64::NAN, 0.0)]),
            Err(GeometryError::NonFinite(_))
        ));
    }

    #[test]
    fn two_points_give_one_edge_everywhere() {
        let p = pts(&[("a", 0.0, 0.0), ("b", 3.0, 4.0)]);
        for g in [gabriel_graph(&p), rng_graph(&p), emst(&p)] {
            assert_eq!(edges(&g), [("a".into(), "b".into())]);
        }
    }

    #[test]
    fn collinear_chain_skips_the_long_edge() {
        let want = vec![("a".into(), "b".into()), ("b".into(), "c".into())];
        assert_eq!(edges(&gabriel_graph(&chain())), want);
        assert_eq!(edges(&rng_graph(&chain())), want);
    }

    #[test]
    fn equilateral_triangle_keeps_all_rng_edges() {
        // Height rounded so every squared side is exactly 1.0.
        let h = 0.866_025_403_784_438_7;
        let p = pts(&[("a", 0.0, 0.0), ("b", 1.0, 0.0), ("c", 0.5, h)]);
        assert_eq!(rng_graph(&p).edge_count(), 3);
    }

    #[test]
    fn boundary_point_does_not_block_gabriel_edge() {
        // c sits exactly on the circle with diameter ab.
        let p = pts(&[("a", -1.0, 0.0), ("b", 1.0, 0.0), ("c", 0.0, 1.0)]);
        assert!(gabriel_graph(&p).has_edge("a", "b"));
    }

    #[test]
    fn unit_square_mst() {
        let p = pts(&[("a", 0.0, 0.0), ("b", 1.0, 0.0), ("c", 1.0, 1.0), ("d", 0.0, 1.0)]);
        let t = emst(&p);
        assert_eq!(t.edge_count(), 3);
        assert_eq!(p.total_length(&t).unwrap(), 3.0);
        // Ties broken lexicographically: a-b, a-d, b-c.
        assert_eq!(
            edges(&t),
            [("a".into(), "b".into()), ("a".into(), "d".into()), ("b".into(), "c".into())]
        );
    }

    #[test]
    fn prim_growth_order() {
        let seq = prim_growth(&chain(), "a").unwrap();
        let order: Vec<_> = seq.stages.iter().map(|s| s.node.as_str()).collect();
        assert_eq!(order, ["b", "c"]);
        assert_eq!(seq.stages[1].parent, "b");

        let lone = pts(&[("r", 0.0, 0.0)]);
        assert!(prim_growth(&lone, "r").unwrap().stages.is_empty());
        assert_eq!(
            prim_growth(&lone, "x"),
            Err(GeometryError::UnknownPoint("x".into()))
        );
    }

    #[test]
    fn segment_cases() {
        let s = |a, b| Segment::new(a, b);
        assert!(segments_cross(s((0., 0.), (1., 1.)), s((0., 1.), (1., 0.))).unwrap());
        assert!(!segments_cross(s((0., 0.), (1., 0.)), s((2., 0.), (3., 0.))).unwrap());
        assert!(!segments_cross(s((0., 0.), (1., 0.)), s((1., 0.), (2., 1.))).unwrap());
        // Collinear overlap.
        assert!(segments_cross(s((0., 0.), (2., 0.)), s((1., 0.), (3., 0.))).unwrap());
        // Collinear, touching at an endpoint only.
        assert!(!segments_cross(s((0., 0.), (1., 0.)), s((1., 0.), (2., 0.))).unwrap());
        // T-junction: endpoint on the other's interior.
        assert!(!segments_cross(s((0., 0.), (2., 0.)), s((1., 0.), (1., 1.))).unwrap());
        assert_eq!(
            segments_cross(s((0., 0.), (0., 0.)), s((0., 1.), (1., 0.))),
            Err(GeometryError::ZeroLengthSegment)
        );
    }

    #[test]
    fn planarity_of_small_drawings() {
        let tri = pts(&[("a", 0.0, 0.0), ("b", 1.0, 0.0), ("c", 0.0, 1.0)]);
        let g = CityGraph::new(["a", "b", "c"])
            .unwrap()
            .with_edges([("a", "b"), ("b", "c"), ("a", "c")])
            .unwrap();
        let r = straightline_planar(&g, &tri).unwrap();
        assert!(r.planar && r.crossings.is_empty());

        let sq = pts(&[("a", 0.0, 0.0), ("b", 1.0, 0.0), ("c", 1.0, 1.0), ("d", 0.0, 1.0)]);
        let mut k4 = CityGraph::new(["a", "b", "c", "d"]).unwrap();
        for (x, y) in [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")] {
            k4.add_edge(x, y).unwrap();
        }
        let r = straightline_planar(&k4, &sq).unwrap();
        assert!(!r.planar);
        assert_eq!(r.crossings, vec![(Edge::new("a", "c"), Edge::new("b", "d"))]);

        let missing = CityGraph::new(["a", "q"]).unwrap().with_edges([("a", "q")]).unwrap();
        assert_eq!(
            straightline_planar(&missing, &tri),
            Err(GeometryError::UnknownPoint("q".into()))
        );
    }
}
