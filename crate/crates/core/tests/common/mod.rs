//! Brute-force oracles shared by the integration tests. They recompute each
//! quantity from its definition without reusing library code paths.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use physarum_roads::citymap::{City, CitySet, HabitatMap, Scenario};
use physarum_roads::geometry::PointSet;
use physarum_roads::CityGraph;

pub type Pairs = BTreeSet<(usize, usize)>;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i:02}")).collect()
}

pub fn point_set(pts: &[(f64, f64)]) -> PointSet {
    PointSet::from_coords(names(pts.len()).into_iter().zip(pts).map(|(n, &(x, y))| (n, x, y)))
        .expect("distinct points")
}

/// Edge set of a library graph over `names(n)` as index pairs.
pub fn pairs(g: &CityGraph) -> Pairs {
    let idx = |s: &str| s[1..].parse::<usize>().unwrap();
    g.edges()
        .iter()
        .map(|e| {
            let (a, b) = (idx(e.a()), idx(e.b()));
            (a.min(b), a.max(b))
        })
        .collect()
}

fn d2(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)
}

/// Gabriel graph from the disc definition: no point strictly inside the
/// circle with diameter `ab`.
pub fn gabriel_oracle(pts: &[(f64, f64)]) -> Pairs {
    let mut out = Pairs::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let m = ((pts[i].0 + pts[j].0) / 2.0, (pts[i].1 + pts[j].1) / 2.0);
            let r2 = d2(pts[i], pts[j]) / 4.0;
            if !(0..pts.len()).any(|k| k != i && k != j && d2(pts[k], m) < r2) {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Relative neighbourhood graph from the lune definition.
pub fn rng_oracle(pts: &[(f64, f64)]) -> Pairs {
    let mut out = Pairs::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = d2(pts[i], pts[j]);
            let blocked = (0..pts.len())
                .filter(|&k| k != i && k != j)
                .any(|k| d2(pts[i], pts[k]) < d && d2(pts[j], pts[k]) < d);
            if !blocked {
                out.insert((i, j));
            }
        }
    }
    out
}

pub fn length(pts: &[(f64, f64)], edges: &Pairs) -> f64 {
    edges.iter().map(|&(a, b)| d2(pts[a], pts[b]).sqrt()).sum()
}

/// Minimum spanning tree length over every labelled tree (Prüfer
/// enumeration); only feasible for n ≤ 8.
pub fn min_tree_length_exhaustive(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return d2(pts[0], pts[1]).sqrt();
    }
    let mut seq = vec![0usize; n - 2];
    let mut best = f64::INFINITY;
    loop {
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut total = 0.0;
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
            total += d2(pts[leaf], pts[s]).sqrt();
            degree[leaf] = 0;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        total += d2(pts[rest[0]], pts[rest[1]]).sqrt();
        best = best.min(total);

        let mut i = 0;
        loop {
            if i == seq.len() {
                return best;
            }
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Cycle-property certificate: `tree` spans all points and every non-tree
/// edge is at least as long as each edge on the tree path between its ends.
pub fn is_minimum_spanning_tree(pts: &[(f64, f64)], tree: &Pairs) -> bool {
    let n = pts.len();
    if tree.len() + 1 != n {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    for s in 0..n {
        // Largest squared edge on the tree path from s to every node.
        let mut maxe = vec![f64::NAN; n];
        maxe[s] = 0.0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if maxe[v].is_nan() {
                    maxe[v] = maxe[u].max(d2(pts[u], pts[v]));
                    q.push_back(v);
                }
            }
        }
        if maxe.iter().any(|m| m.is_nan()) {
            return false;
        }
        for t in s + 1..n {
            if !tree.contains(&(s, t)) && d2(pts[s], pts[t]) < maxe[t] {
                return false;
            }
        }
    }
    true
}

pub fn city(name: &str, x: usize, y: usize) -> City {
    City {
        name: name.into(),
        x,
        y,
    }
}

/// City pairs joined by an occupied 8-connected path that avoids the
/// vicinity discs of every other city, checked pair by pair.
pub fn connectivity_oracle(occupied: &[bool], cities: &CitySet, hab: &HabitatMap) -> BTreeSet<(String, String)> {
    let (w, h) = (hab.width() as i64, hab.height() as i64);
    let r = cities.vicinity_radius as i64;
    let within = |c: &City, x: i64, y: i64| {
        let (dx, dy) = (x - c.x as i64, y - c.y as i64);
        dx * dx + dy * dy <= r * r
    };
    let mut out = BTreeSet::new();
    for (i, a) in cities.cities.iter().enumerate() {
        for (j, b) in cities.cities.iter().enumerate().skip(i + 1) {
            let allowed = |x: i64, y: i64| {
                occupied[(y * w + x) as usize]
                    && hab.is_habitable(x, y)
                    && cities
                        .cities
                        .iter()
                        .enumerate()
                        .all(|(k, c)| k == i || k == j || !within(c, x, y))
            };
            let mut seen = vec![false; occupied.len()];
            let mut q = VecDeque::new();
            for y in 0..h {
                for x in 0..w {
                    if within(a, x, y) && allowed(x, y) {
                        seen[(y * w + x) as usize] = true;
                        q.push_back((x, y));
                    }
                }
            }
            let mut hit = false;
            while let Some((x, y)) = q.pop_front() {
                if within(b, x, y) {
                    hit = true;
                    break;
                }
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let k = (ny * w + nx) as usize;
                        if !seen[k] && allowed(nx, ny) {
                            seen[k] = true;
                            q.push_back((nx, ny));
                        }
                    }
                }
            }
            if hit {
                let (p, q) = if a.name <= b.name { (&a.name, &b.name) } else { (&b.name, &a.name) };
                out.insert((p.clone(), q.clone()));
            }
        }
    }
    out
}

pub fn graph_pairs(g: &CityGraph) -> BTreeSet<(String, String)> {
    g.edges()
        .iter()
        .map(|e| (e.a().to_string(), e.b().to_string()))
        .collect()
}

/// Path to the shipped Italy scenario.
pub fn italy_scenario_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/italy/scenario.toml")
}

pub fn italy() -> Scenario {
    physarum_roads::citymap::load_scenario_file(&italy_scenario_path()).expect("fixture loads")
}
