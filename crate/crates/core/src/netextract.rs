//! City connectivity from particle occupancy.
//!
//! Cities `a` and `b` are linked when an 8-connected path of occupied cells
//! runs from a cell in `a`'s vicinity to a cell in `b`'s vicinity without
//! entering the vicinity of any third city. One breadth-first search per
//! source city finds all its partners at once: cells in another city's
//! vicinity are reachable but never expanded.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::citymap::{vicinity_cells, CitySet, HabitatMap};
use crate::exec::{map_indices, Exec};
use crate::graph::CityGraph;
use crate::plasmodium::SimState;

/// Occupied cells of a state, row-major, always a subset of the habitable
/// cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyField {
    width: usize,
    height: usize,
    occupied: Vec<bool>,
}

impl OccupancyField {
    pub fn new(habitat: &HabitatMap, mut occupied: Vec<bool>) -> Self {
        assert_eq!(occupied.len(), habitat.len(), "occupancy size mismatch");
        for (o, &c) in occupied.iter_mut().zip(habitat.cells()) {
            *o &= c == crate::citymap::Cell::Habitable;
        }
        OccupancyField {
            width: habitat.width(),
            height: habitat.height(),
            occupied,
        }
    }

    pub fn from_state(state: &SimState, habitat: &HabitatMap) -> Self {
        OccupancyField::new(habitat, state.occupied())
    }

    /// Empty field over `habitat`.
    pub fn empty(habitat: &HabitatMap) -> Self {
        OccupancyField::new(habitat, vec![false; habitat.len()])
    }

    pub fn set(&mut self, habitat: &HabitatMap, x: usize, y: usize) {
        let i = habitat.index(x, y);
        if habitat.cells()[i] == crate::citymap::Cell::Habitable {
            self.occupied[i] = true;
        }
    }

    pub fn is_occupied(&self, x: usize, y: usize) -> bool {
        self.occupied[y * self.width + x]
    }

    pub fn cells(&self) -> &[bool] {
        &self.occupied
    }

    pub fn count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Square (Chebyshev) dilation by `radius` cells, clipped to habitable
    /// cells.
    pub fn dilate(&self, habitat: &HabitatMap, radius: u32) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width, self.height);
        let r = radius as usize;
        // Separable: rows then columns.
        let mut rows = vec![false; w * h];
        for y in 0..h {
            let line = &self.occupied[y * w..(y + 1) * w];
            let mut last: Option<usize> = None;
            let mut reach = vec![false; w];
            for (x, &o) in line.iter().enumerate() {
                if o {
                    last = Some(x);
                }
                if last.is_some_and(|l| x - l <= r) {
                    reach[x] = true;
                }
            }
            last = None;
            for x in (0..w).rev() {
                if line[x] {
                    last = Some(x);
                }
                if last.is_some_and(|l| l - x <= r) {
                    reach[x] = true;
                }
            }
            rows[y * w..(y + 1) * w].copy_from_slice(&reach);
        }
        let mut out = vec![false; w * h];
        for x in 0..w {
            let mut last: Option<usize> = None;
            for y in 0..h {
                if rows[y * w + x] {
                    last = Some(y);
                }
                if last.is_some_and(|l| y - l <= r) {
                    out[y * w + x] = true;
                }
            }
            last = None;
            for y in (0..h).rev() {
                if rows[y * w + x] {
                    last = Some(y);
                }
                if last.is_some_and(|l| l - y <= r) {
                    out[y * w + x] = true;
                }
            }
        }
        OccupancyField::new(habitat, out)
    }
}

/// Owner city of each cell's vicinity, if any.
fn vicinity_owners(cities: &CitySet, habitat: &HabitatMap) -> (Vec<Option<u16>>, Vec<Vec<usize>>) {
    let mut owner = vec![None; habitat.len()];
    let mut members = Vec::with_capacity(cities.len());
    for i in 0..cities.len() {
        let cells: Vec<usize> = vicinity_cells(cities, i, habitat)
            .into_iter()
            .map(|(x, y)| habitat.index(x, y))
            .collect();
        for &c in &cells {
            owner[c] = Some(i as u16);
        }
        members.push(cells);
    }
    (owner, members)
}

/// Cities reachable from `source` under the vicinity rule.
fn partners(
    source: usize,
    field: &OccupancyField,
    owner: &[Option<u16>],
    seeds: &[usize],
    n_cities: usize,
) -> Vec<usize> {
    let (w, h) = (field.width as i64, field.height as i64);
    let mut seen = vec![false; field.occupied.len()];
    let mut found = vec![false; n_cities];
    let mut queue = VecDeque::new();
    for &c in seeds {
        if field.occupied[c] {
            seen[c] = true;
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        let (cx, cy) = ((c as i64) % w, (c as i64) / w);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (x, y) = (cx + dx, cy + dy);
                if (dx, dy) == (0, 0) || x < 0 || y < 0 || x >= w || y >= h {
                    continue;
                }
                let n = (y * w + x) as usize;
                if seen[n] || !field.occupied[n] {
                    continue;
                }
                seen[n] = true;
                match owner[n] {
                    Some(o) if o as usize != source => found[o as usize] = true,
                    _ => queue.push_back(n),
                }
            }
        }
    }
    found
        .iter()
        .enumerate()
        .filter(|&(j, &f)| f && j != source)
        .map(|(j, _)| j)
        .collect()
}

/// City graph of an occupancy field. Nodes are always the full city set.
pub fn connectivity(field: &OccupancyField, cities: &CitySet, habitat: &HabitatMap, exec: Exec) -> CityGraph {
    let (owner, members) = vicinity_owners(cities, habitat);
    let n = cities.len();
    let found = map_indices(exec, n, |a| partners(a, field, &owner, &members[a], n));
    let mut g = CityGraph::new(cities.names()).expect("city names are unique");
    for (a, bs) in found.into_iter().enumerate() {
        for b in bs {
            g.add_edge(cities.cities[a].name.clone(), cities.cities[b].name.clone())
                .expect("city names");
        }
    }
    g
}

/// Edge set of the raw occupancy of `state`.
pub fn extract_edges(state: &SimState, cities: &CitySet, habitat: &HabitatMap) -> CityGraph {
    extract_with_dilation(state, cities, habitat, 0)
}

/// Edge set after dilating the occupancy by `dilation` cells.
pub fn extract_with_dilation(
    state: &SimState,
    cities: &CitySet,
    habitat: &HabitatMap,
    dilation: u32,
) -> CityGraph {
    let field = OccupancyField::from_state(state, habitat).dilate(habitat, dilation);
    connectivity(&field, cities, habitat, Exec::Parallel)
}

/// Per-run edge-list document written by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEdges {
    pub run_index: u32,
    pub seed: u64,
    pub edges: Vec<[String; 2]>,
}

impl RunEdges {
    pub fn new(run_index: u32, seed: u64, graph: &CityGraph) -> Self {
        RunEdges {
            run_index,
            seed,
            edges: graph.edges().iter().map(|e| e.pair()).collect(),
        }
    }

    /// Graph over `cities` with these edges.
    pub fn to_graph(&self, cities: &[String]) -> Result<CityGraph, crate::graph::GraphError> {
        CityGraph::new(cities.iter().cloned())?
            .with_edges(self.edges.iter().map(|[a, b]| (a.clone(), b.clone())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::citymap::City;

    fn city(name: &str, x: usize, y: usize) -> City {
        City {
            name: name.into(),
            x,
            y,
        }
    }

    fn line(field: &mut OccupancyField, habitat: &HabitatMap, y: usize, x0: usize, x1: usize) {
        for x in x0..=x1 {
            field.set(habitat, x, y);
        }
    }

    #[test]
    fn corridor_between_two_cities() {
        let hab = HabitatMap::open(30, 10).unwrap();
        let cities = CitySet::new(vec![city("a", 3, 5), city("b", 26, 5), city("c", 15, 1)], 1);
        let mut f = OccupancyField::empty(&hab);
        line(&mut f, &hab, 5, 3, 26);
        let g = connectivity(&f, &cities, &hab, Exec::Sequential);
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge("a", "b"));
        assert_eq!(g.node_count(), 3);
    }

    #[test]
    fn corridor_through_third_city_splits() {
        let hab = HabitatMap::open(30, 10).unwrap();
        let cities = CitySet::new(vec![city("a", 3, 5), city("b", 26, 5), city("c", 15, 5)], 2);
        let mut f = OccupancyField::empty(&hab);
        line(&mut f, &hab, 5, 3, 26);
        let g = connectivity(&f, &cities, &hab, Exec::Sequential);
        assert!(g.has_edge("a", "c") && g.has_edge("b", "c"));
        assert!(!g.has_edge("a", "b"));
    }

    #[test]
    fn diagonal_steps_connect() {
        let hab = HabitatMap::open(12, 12).unwrap();
        let cities = CitySet::new(vec![city("a", 1, 1), city("b", 10, 10)], 0);
        let mut f = OccupancyField::empty(&hab);
        for i in 1..=10 {
            f.set(&hab, i, i);
        }
        assert!(connectivity(&f, &cities, &hab, Exec::Sequential).has_edge("a", "b"));
    }

    #[test]
    fn dilation_bridges_gaps() {
        let hab = HabitatMap::open(30, 10).unwrap();
        let cities = CitySet::new(vec![city("a", 3, 5), city("b", 26, 5)], 1);
        let mut f = OccupancyField::empty(&hab);
        line(&mut f, &hab, 5, 3, 13);
        line(&mut f, &hab, 5, 15, 26);
        assert_eq!(connectivity(&f, &cities, &hab, Exec::Sequential).edge_count(), 0);
        let d = f.dilate(&hab, 1);
        assert!(connectivity(&d, &cities, &hab, Exec::Sequential).has_edge("a", "b"));
        assert_eq!(f.dilate(&hab, 0), f);
    }

    #[test]
    fn dilation_matches_brute_force() {
        let hab = HabitatMap::open(17, 13).unwrap();
        let mut f = OccupancyField::empty(&hab);
        for (x, y) in [(0, 0), (5, 5), (16, 12), (9, 2), (3, 11)] {
            f.set(&hab, x, y);
        }
        for r in 0..4u32 {
            let d = f.dilate(&hab, r);
            for y in 0..13 {
                for x in 0..17 {
                    let want = (0..13).any(|yy: usize| {
                        (0..17).any(|xx: usize| {
                            f.is_occupied(xx, yy)
                                && xx.abs_diff(x) <= r as usize
                                && yy.abs_diff(y) <= r as usize
                        })
                    });
                    assert_eq!(d.is_occupied(x, y), want, "r={r} ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn empty_field_gives_isolated_nodes() {
        let hab = HabitatMap::open(10, 10).unwrap();
        let cities = CitySet::new(vec![city("a", 1, 1), city("b", 8, 8)], 1);
        let g = connectivity(&OccupancyField::empty(&hab), &cities, &hab, Exec::Sequential);
        assert_eq!((g.node_count(), g.edge_count()), (2, 0));
    }

    #[test]
    fn run_edges_doc() {
        let g = CityGraph::new(["a", "b"]).unwrap().with_edges([("b", "a")]).unwrap();
        let doc = RunEdges::new(3, 7, &g);
        let json = serde_json::to_string(&doc).unwrap();
        assert_eq!(json, r#"{"run_index":3,"seed":7,"edges":[["a","b"]]}"#);
        assert_eq!(doc.to_graph(&["a".into(), "b".into()]).unwrap(), g);
    }
}
