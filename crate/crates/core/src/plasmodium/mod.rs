//! Particle model of a network-forming plasmodium.
//!
//! Each particle occupies one lattice cell, carries a continuous position and
//! heading, and has three forward sensors (left, front, right) at
//! `sensor_offset` cells. One scheduler step runs, in order:
//!
//! 1. the sensory stage over a fresh random permutation of particles,
//! 2. the motor stage over another fresh permutation,
//! 3. synchronous diffusion of the chemoattractant lattice,
//! 4. projection of the nutrient stimulus onto every city centre cell,
//! 5. growth then shrinkage, every `adaptation_interval` steps.
//!
//! The particle stages are sequential by construction: update order is part
//! of the model. Only diffusion may use worker threads.

mod diffusion;
mod digest;
mod params;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::citymap::{HabitatMap, Scenario};
use crate::exec::Exec;
use crate::graph::CityGraph;
use crate::netextract;

pub use diffusion::{diffuse, diffuse_into};
pub use digest::{state_digest, EMPTY_DIGEST};
pub use params::ModelParams;

/// Name of the random generator, recorded in run metadata.
pub const RNG_NAME: &str = "ChaCha8Rng::seed_from_u64";

const EMPTY: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("parameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },
    #[error("coverage {coverage} of {habitable} habitable cells places no particle")]
    NoParticles { coverage: f64, habitable: usize },
    #[error("run index {index} out of range for {runs} runs")]
    RunIndex { index: u32, runs: u32 },
    #[error("cannot place particle at ({x}, {y}): {reason}")]
    Placement { x: i64, y: i64, reason: &'static str },
}

/// Per-run seed: the base seed xor the run index.
pub fn run_seed(base_seed: u64, run_index: u32) -> u64 {
    base_seed ^ run_index as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub x: f64,
    pub y: f64,
    /// Degrees in `[0, 360)`; 0 points along +x, 90 along +y (down the map).
    pub heading: f64,
    /// Row-major index of the rounded position.
    pub cell: usize,
    /// Whether the most recent motor stage moved this particle.
    pub moved: bool,
}

#[derive(Debug, Clone)]
pub struct SimState {
    width: usize,
    height: usize,
    pub particles: Vec<Particle>,
    pub chemo: Vec<f64>,
    occupancy: Vec<u32>,
    pub step: u64,
    rng: ChaCha8Rng,
    scratch: Vec<f64>,
}

impl SimState {
    /// No particles, zero chemoattractant.
    pub fn empty(habitat: &HabitatMap, seed: u64) -> Self {
        let n = habitat.len();
        SimState {
            width: habitat.width(),
            height: habitat.height(),
            particles: Vec::new(),
            chemo: vec![0.0; n],
            occupancy: vec![EMPTY; n],
            step: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            scratch: vec![0.0; n],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn is_occupied(&self, cell: usize) -> bool {
        self.occupancy[cell] != EMPTY
    }

    /// Row-major occupancy flags.
    pub fn occupied(&self) -> Vec<bool> {
        self.occupancy.iter().map(|&o| o != EMPTY).collect()
    }

    /// Places a particle at the centre of cell `(x, y)`.
    pub fn add_particle(
        &mut self,
        habitat: &HabitatMap,
        x: i64,
        y: i64,
        heading: f64,
    ) -> Result<usize, SimError> {
        if !habitat.is_habitable(x, y) {
            return Err(SimError::Placement {
                x,
                y,
                reason: "cell is not habitable",
            });
        }
        let cell = habitat.index(x as usize, y as usize);
        if self.is_occupied(cell) {
            return Err(SimError::Placement {
                x,
                y,
                reason: "cell is occupied",
            });
        }
        Ok(self.push(cell, heading))
    }

    fn push(&mut self, cell: usize, heading: f64) -> usize {
        let id = self.particles.len();
        self.particles.push(Particle {
            x: (cell % self.width) as f64,
            y: (cell / self.width) as f64,
            heading,
            cell,
            moved: false,
        });
        self.occupancy[cell] = id as u32;
        id
    }

    /// Verifies occupancy/particle consistency and chemoattractant bounds.
    pub fn check_invariants(&self, habitat: &HabitatMap) -> Result<(), String> {
        let mut seen = 0usize;
        for (i, p) in self.particles.iter().enumerate() {
            let (cx, cy) = (p.x.round() as i64, p.y.round() as i64);
            if !habitat.is_habitable(cx, cy) {
                return Err(format!("particle {i} on non-habitable cell ({cx}, {cy})"));
            }
            if habitat.index(cx as usize, cy as usize) != p.cell {
                return Err(format!("particle {i} cell index does not match its position"));
            }
            if self.occupancy[p.cell] != i as u32 {
                return Err(format!("occupancy at cell {} does not point to particle {i}", p.cell));
            }
        }
        for &o in &self.occupancy {
            if o != EMPTY {
                seen += 1;
            }
        }
        if seen != self.particles.len() {
            return Err(format!(
                "{seen} occupied cells for {} particles",
                self.particles.len()
            ));
        }
        for (i, (&v, &c)) in self.chemo.iter().zip(habitat.cells()).enumerate() {
            if v.is_nan() || v < 0.0 {
                return Err(format!("negative or NaN chemoattractant at cell {i}"));
            }
            if c != crate::citymap::Cell::Habitable && v != 0.0 {
                return Err(format!("chemoattractant on non-habitable cell {i}"));
            }
        }
        Ok(())
    }

    fn rebuild_occupancy(&mut self) {
        self.occupancy.fill(EMPTY);
        for (i, p) in self.particles.iter().enumerate() {
            self.occupancy[p.cell] = i as u32;
        }
    }

    fn permutation(&mut self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.particles.len()).collect();
        order.shuffle(&mut self.rng);
        order
    }

    fn random_heading(&mut self) -> f64 {
        self.rng.gen_range(0.0..360.0)
    }
}

/// Outcome of the sensory rule for one particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steer {
    Keep,
    Left,
    Right,
    /// Both side sensors beat the front one and tie with each other.
    Either,
}

/// The sensory rule, evaluated in order:
///
/// * front strictly above both sides: keep heading;
/// * front strictly below both sides: turn toward the larger side;
/// * left below right: turn right;
/// * right below left: turn left;
/// * otherwise keep heading.
pub fn steer(front: f64, left: f64, right: f64) -> Steer {
    if front > left && front > right {
        Steer::Keep
    } else if front < left && front < right {
        if left > right {
            Steer::Left
        } else if right > left {
            Steer::Right
        } else {
            Steer::Either
        }
    } else if left < right {
        Steer::Right
    } else if right < left {
        Steer::Left
    } else {
        Steer::Keep
    }
}

/// Readings of the left, front and right sensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReading {
    pub left: f64,
    pub front: f64,
    pub right: f64,
}

/// Scenario-derived lookup tables for stepping a [`SimState`].
#[derive(Debug, Clone)]
pub struct Model<'a> {
    scenario: &'a Scenario,
    mask: Vec<bool>,
    stimuli: Vec<usize>,
    level: f64,
    exec: Exec,
}

impl<'a> Model<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let h = &scenario.habitat;
        Model {
            scenario,
            mask: h.habitable_mask(),
            stimuli: scenario
                .cities
                .cities
                .iter()
                .map(|c| h.index(c.x, c.y))
                .collect(),
            level: scenario.nutrient_level(),
            exec: Exec::Parallel,
        }
    }

    /// Execution strategy for the diffusion kernel.
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn params(&self) -> &ModelParams {
        &self.scenario.params
    }

    fn width(&self) -> usize {
        self.scenario.habitat.width()
    }

    fn height(&self) -> usize {
        self.scenario.habitat.height()
    }

    /// Habitable cell index for rounded coordinates, if any.
    fn habitable_cell(&self, x: f64, y: f64) -> Option<usize> {
        let (cx, cy) = (x.round(), y.round());
        if cx < 0.0 || cy < 0.0 || cx >= self.width() as f64 || cy >= self.height() as f64 {
            return None;
        }
        let i = cy as usize * self.width() + cx as usize;
        self.mask[i].then_some(i)
    }

    fn sample(&self, state: &SimState, p: &Particle, heading: f64) -> f64 {
        let a = heading.to_radians();
        let so = self.params().sensor_offset;
        self.habitable_cell(p.x + so * a.cos(), p.y + so * a.sin())
            .map_or(0.0, |i| state.chemo[i])
    }

    pub fn read_sensors(&self, state: &SimState, i: usize) -> SensorReading {
        let p = &state.particles[i];
        let sa = self.params().sensor_angle;
        SensorReading {
            left: self.sample(state, p, p.heading - sa),
            front: self.sample(state, p, p.heading),
            right: self.sample(state, p, p.heading + sa),
        }
    }

    /// Sensory decision for particle `i`; reads the lattice only.
    pub fn sense(&self, state: &SimState, i: usize) -> Steer {
        let r = self.read_sensors(state, i);
        steer(r.front, r.left, r.right)
    }

    fn sensory_stage(&self, state: &mut SimState) {
        let ra = self.params().rotation_angle;
        for i in state.permutation() {
            let turn = match self.sense(state, i) {
                Steer::Keep => 0.0,
                Steer::Left => -ra,
                Steer::Right => ra,
                Steer::Either => {
                    if state.rng.gen_bool(0.5) {
                        ra
                    } else {
                        -ra
                    }
                }
            };
            if turn != 0.0 {
                let p = &mut state.particles[i];
                p.heading = (p.heading + turn).rem_euclid(360.0);
            }
        }
    }

    /// Motor update for particle `i`. Moves one unit along the heading if the
    /// rounded target cell is habitable and vacant, depositing at the new
    /// cell; otherwise stays put and draws a fresh random heading.
    pub fn move_particle(&self, state: &mut SimState, i: usize) -> bool {
        let p = &state.particles[i];
        let a = p.heading.to_radians();
        let (nx, ny) = (p.x + a.cos(), p.y + a.sin());
        let target = self
            .habitable_cell(nx, ny)
            .filter(|&t| state.occupancy[t] == EMPTY);
        match target {
            Some(t) => {
                let old = p.cell;
                state.occupancy[old] = EMPTY;
                state.occupancy[t] = i as u32;
                state.chemo[t] += self.params().deposit;
                let p = &mut state.particles[i];
                p.x = nx;
                p.y = ny;
                p.cell = t;
                p.moved = true;
                true
            }
            None => {
                let h = state.random_heading();
                let p = &mut state.particles[i];
                p.heading = h;
                p.moved = false;
                false
            }
        }
    }

    fn motor_stage(&self, state: &mut SimState) {
        for i in state.permutation() {
            self.move_particle(state, i);
        }
    }

    pub fn diffuse(&self, state: &mut SimState) {
        let (w, h) = (self.width(), self.height());
        diffuse_into(
            &state.chemo,
            &mut state.scratch,
            &self.mask,
            w,
            h,
            self.params().damping,
            self.exec,
        );
        std::mem::swap(&mut state.chemo, &mut state.scratch);
    }

    pub fn project_stimuli(&self, state: &mut SimState) {
        for &c in &self.stimuli {
            state.chemo[c] = self.level;
        }
    }

    /// Occupied cells in the `side × side` window centred on `cell`.
    fn window_count(&self, state: &SimState, cell: usize, side: usize) -> usize {
        let r = (side / 2) as i64;
        let (w, h) = (self.width() as i64, self.height() as i64);
        let (cx, cy) = ((cell % self.width()) as i64, (cell / self.width()) as i64);
        let (x0, x1) = ((cx - r).max(0), (cx + r).min(w - 1));
        let (y0, y1) = ((cy - r).max(0), (cy + r).min(h - 1));
        let mut n = 0;
        for y in y0..=y1 {
            let row = &state.occupancy[(y * w + x0) as usize..=(y * w + x1) as usize];
            n += row.iter().filter(|&&o| o != EMPTY).count();
        }
        n
    }

    /// Growth then shrinkage, each over its own random permutation.
    ///
    /// Growth: a particle that moved in the last motor stage and sees between
    /// `growth_min` and `growth_max` other particles in its growth window
    /// divides into a uniformly chosen vacant habitable cell of its 3×3
    /// neighbourhood. Offspring do not act until the next step.
    ///
    /// Shrinkage: a particle whose shrink-window count exceeds `shrink_max`
    /// is removed immediately, so later particles in the permutation see the
    /// reduced population.
    pub fn adapt_population(&self, state: &mut SimState) {
        let params = self.params();
        let (w, h) = (self.width() as i64, self.height() as i64);

        for i in state.permutation() {
            let p = &state.particles[i];
            if !p.moved {
                continue;
            }
            let cell = p.cell;
            let others = self.window_count(state, cell, params.growth_window) - 1;
            if others < params.growth_min || others > params.growth_max {
                continue;
            }
            let (cx, cy) = ((cell % self.width()) as i64, (cell / self.width()) as i64);
            let mut vacant = Vec::with_capacity(8);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (x, y) = (cx + dx, cy + dy);
                    if (dx, dy) == (0, 0) || x < 0 || y < 0 || x >= w || y >= h {
                        continue;
                    }
                    let j = (y * w + x) as usize;
                    if self.mask[j] && state.occupancy[j] == EMPTY {
                        vacant.push(j);
                    }
                }
            }
            if let Some(&j) = vacant.choose(&mut state.rng) {
                let heading = state.random_heading();
                state.push(j, heading);
            }
        }

        let mut alive = vec![true; state.particles.len()];
        let mut removed = false;
        for i in state.permutation() {
            let cell = state.particles[i].cell;
            let mut count = self.window_count(state, cell, params.shrink_window);
            if !params.shrink_count_includes_self {
                count -= 1;
            }
            if count > params.shrink_max {
                state.occupancy[cell] = EMPTY;
                alive[i] = false;
                removed = true;
            }
        }
        if removed {
            let mut k = 0;
            state.particles.retain(|_| {
                k += 1;
                alive[k - 1]
            });
            state.rebuild_occupancy();
        }
    }

    /// One scheduler step.
    pub fn step(&self, state: &mut SimState) {
        self.sensory_stage(state);
        self.motor_stage(state);
        self.diffuse(state);
        self.project_stimuli(state);
        state.step += 1;
        if state.step.is_multiple_of(self.params().adaptation_interval) {
            self.adapt_population(state);
        }
    }

    /// Uniform random population covering `coverage` of the habitable cells.
    pub fn init_population(&self, seed: u64) -> Result<SimState, SimError> {
        let habitat = &self.scenario.habitat;
        let cells: Vec<usize> = (0..habitat.len()).filter(|&i| self.mask[i]).collect();
        let n = (self.scenario.coverage * cells.len() as f64).floor() as usize;
        if n < 1 {
            return Err(SimError::NoParticles {
                coverage: self.scenario.coverage,
                habitable: cells.len(),
            });
        }
        let mut state = SimState::empty(habitat, seed);
        let picks = rand::seq::index::sample(&mut state.rng, cells.len(), n);
        for k in picks.iter() {
            let heading = state.random_heading();
            state.push(cells[k], heading);
        }
        Ok(state)
    }
}

/// See [`Model::init_population`].
pub fn init_population(scenario: &Scenario, seed: u64) -> Result<SimState, SimError> {
    Model::new(scenario).init_population(seed)
}

/// See [`Model::step`]. Builds the lookup tables on every call; prefer a
/// long-lived [`Model`] in loops.
pub fn step(state: &mut SimState, scenario: &Scenario) {
    Model::new(scenario).step(state);
}

/// Occupancy and chemoattractant at one scheduled step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub particles: usize,
    pub occupied: Vec<bool>,
    pub chemo: Vec<f64>,
}

impl Snapshot {
    fn capture(state: &SimState) -> Self {
        Snapshot {
            step: state.step,
            particles: state.len(),
            occupied: state.occupied(),
            chemo: state.chemo.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run_index: u32,
    pub seed: u64,
    pub state: SimState,
    pub snapshots: Vec<Snapshot>,
    pub edges: CityGraph,
    pub digest: String,
}

/// Executes run `run_index` of the scenario and extracts its city graph.
pub fn run(scenario: &Scenario, run_index: u32) -> Result<RunResult, SimError> {
    run_with(scenario, run_index, Exec::Parallel)
}

pub fn run_with(scenario: &Scenario, run_index: u32, exec: Exec) -> Result<RunResult, SimError> {
    if run_index >= scenario.runs {
        return Err(SimError::RunIndex {
            index: run_index,
            runs: scenario.runs,
        });
    }
    let seed = run_seed(scenario.base_seed, run_index);
    let model = Model::new(scenario).with_exec(exec);
    let mut state = model.init_population(seed)?;
    let mut snapshots = Vec::new();
    let mut due = scenario.snapshot_steps.iter().copied().peekable();
    while due.next_if_eq(&0).is_some() {
        snapshots.push(Snapshot::capture(&state));
    }
    for _ in 0..scenario.steps {
        model.step(&mut state);
        if due.next_if_eq(&state.step).is_some() {
            snapshots.push(Snapshot::capture(&state));
        }
    }
    let edges = netextract::extract_with_dilation(
        &state,
        &scenario.cities,
        &scenario.habitat,
        scenario.dilation,
    );
    let digest = state_digest(&state);
    log::debug!(
        "run {run_index}: {} particles after {} steps, {} edges",
        state.len(),
        state.step,
        edges.edge_count()
    );
    Ok(RunResult {
        run_index,
        seed,
        state,
        snapshots,
        edges,
        digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::citymap::{Cell, City, CitySet, Nutrient};

    fn open_scenario(w: usize, h: usize, cities: Vec<City>) -> Scenario {
        Scenario::new(HabitatMap::open(w, h).unwrap(), CitySet::new(cities, 1)).unwrap()
    }

    fn city(name: &str, x: usize, y: usize) -> City {
        City {
            name: name.into(),
            x,
            y,
        }
    }

    #[test]
    fn steering_rules() {
        assert_eq!(steer(9.0, 1.0, 1.0), Steer::Keep);
        assert_eq!(steer(1.0, 5.0, 9.0), Steer::Right);
        assert_eq!(steer(1.0, 9.0, 5.0), Steer::Left);
        assert_eq!(steer(1.0, 5.0, 5.0), Steer::Either);
        assert_eq!(steer(5.0, 2.0, 7.0), Steer::Right);
        assert_eq!(steer(5.0, 7.0, 2.0), Steer::Left);
        assert_eq!(steer(3.0, 3.0, 3.0), Steer::Keep);
        assert_eq!(steer(5.0, 5.0, 2.0), Steer::Left);
    }

    #[test]
    fn sensors_sample_offset_cells() {
        let s = open_scenario(30, 30, vec![]);
        let model = Model::new(&s);
        let mut st = SimState::empty(&s.habitat, 0);
        st.add_particle(&s.habitat, 10, 10, 0.0).unwrap();
        // Front sensor 9 cells along +x; right sensor at +45° (down), left at -45°.
        let so = 9.0 * std::f64::consts::FRAC_1_SQRT_2;
        let at = |x: f64, y: f64| s.habitat.index(x.round() as usize, y.round() as usize);
        st.chemo[at(19.0, 10.0)] = 5.0;
        st.chemo[at(10.0 + so, 10.0 - so)] = 2.0;
        st.chemo[at(10.0 + so, 10.0 + so)] = 7.0;
        let r = model.read_sensors(&st, 0);
        assert_eq!((r.left, r.front, r.right), (2.0, 5.0, 7.0));
        assert_eq!(model.sense(&st, 0), Steer::Right);
    }

    #[test]
    fn off_map_sensors_read_zero() {
        let s = open_scenario(12, 12, vec![]);
        let model = Model::new(&s);
        let mut st = SimState::empty(&s.habitat, 0);
        st.add_particle(&s.habitat, 10, 5, 0.0).unwrap();
        st.chemo.fill(1.0);
        assert_eq!(model.read_sensors(&st, 0).front, 0.0);
    }

    #[test]
    fn move_into_vacant_cell_deposits() {
        let s = open_scenario(10, 10, vec![]);
        let model = Model::new(&s);
        let mut st = SimState::empty(&s.habitat, 0);
        st.add_particle(&s.habitat, 4, 4, 0.0).unwrap();
        assert!(model.move_particle(&mut st, 0));
        let p = &st.particles[0];
        assert_eq!(p.cell, s.habitat.index(5, 4));
        assert_eq!(st.chemo[p.cell], 5.0);
        assert_eq!(st.chemo.iter().sum::<f64>(), 5.0);
        st.check_invariants(&s.habitat).unwrap();
    }

    #[test]
    fn blocked_move_rerolls_heading() {
        let s = open_scenario(10, 10, vec![]);
        let model = Model::new(&s);
        let mut st = SimState::empty(&s.habitat, 3);
        st.add_particle(&s.habitat, 4, 4, 0.0).unwrap();
        st.add_particle(&s.habitat, 5, 4, 0.0).unwrap();
        assert!(!model.move_particle(&mut st, 0));
        assert_eq!(st.particles[0].cell, s.habitat.index(4, 4));
        assert!(st.chemo.iter().all(|&v| v == 0.0));
        assert!(!st.particles[0].moved);
        assert_ne!(st.particles[0].heading, 0.0);
    }

    #[test]
    fn obstacle_blocks_like_a_particle() {
        let cells = (0..100)
            .map(|i| if i == 45 { Cell::Obstacle } else { Cell::Habitable })
            .collect();
        let s = Scenario::new(
            HabitatMap::from_cells(10, 10, cells).unwrap(),
            CitySet::new(vec![], 1),
        )
        .unwrap();
        let model = Model::new(&s);
        let mut st = SimState::empty(&s.habitat, 0);
        st.add_particle(&s.habitat, 4, 4, 0.0).unwrap();
        assert!(!model.move_particle(&mut st, 0));
        assert!(st.chemo.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn projection_pins_city_cells() {
        let mut s = open_scenario(10, 10, vec![city("a", 2, 2), city("b", 7, 7)]);
        for (nutrient, want) in [(Nutrient::Low, 2.55), (Nutrient::High, 255.0)] {
            s.nutrient = nutrient;
            let model = Model::new(&s);
            let mut st = SimState::empty(&s.habitat, 0);
            model.project_stimuli(&mut st);
            assert_eq!(st.chemo[s.habitat.index(2, 2)], want);
            assert_eq!(st.chemo[s.habitat.index(7, 7)], want);
            assert_eq!(st.chemo.iter().filter(|&&v| v != 0.0).count(), 2);
        }
        let empty = open_scenario(10, 10, vec![]);
        let mut st = SimState::empty(&empty.habitat, 0);
        Model::new(&empty).project_stimuli(&mut st);
        assert!(st.chemo.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn growth_needs_neighbours_and_motion() {
        let s = open_scenario(20, 20, vec![]);
        let model = Model::new(&s);

        // Isolated particle that moved: no division.
        let mut st = SimState::empty(&s.habitat, 1);
        st.add_particle(&s.habitat, 10, 10, 0.0).unwrap();
        st.particles[0].moved = true;
        model.adapt_population(&mut st);
        assert_eq!(st.len(), 1);

        // Five neighbours within the 9×9 window, none adjacent.
        let mut st = SimState::empty(&s.habitat, 1);
        st.add_particle(&s.habitat, 10, 10, 0.0).unwrap();
        for (x, y) in [(13, 10), (7, 10), (10, 13), (10, 7), (13, 13)] {
            st.add_particle(&s.habitat, x, y, 0.0).unwrap();
        }
        st.particles[0].moved = true;
        model.adapt_population(&mut st);
        assert_eq!(st.len(), 7);
        let child = &st.particles[6];
        let (cx, cy) = (child.cell % 20, child.cell / 20);
        assert!(cx.abs_diff(10) <= 1 && cy.abs_diff(10) <= 1);
        st.check_invariants(&s.habitat).unwrap();

        // Same layout but the particle did not move.
        let mut st = SimState::empty(&s.habitat, 1);
        st.add_particle(&s.habitat, 10, 10, 0.0).unwrap();
        for (x, y) in [(13, 10), (7, 10), (10, 13), (10, 7), (13, 13)] {
            st.add_particle(&s.habitat, x, y, 0.0).unwrap();
        }
        model.adapt_population(&mut st);
        assert_eq!(st.len(), 6);
    }

    #[test]
    fn full_block_is_thinned() {
        let s = open_scenario(9, 9, vec![]);
        let model = Model::new(&s);
        let mut st = SimState::empty(&s.habitat, 5);
        for y in 2..7 {
            for x in 2..7 {
                st.add_particle(&s.habitat, x, y, 0.0).unwrap();
            }
        }
        // Only the centre has a complete 5×5 block.
        model.adapt_population(&mut st);
        assert_eq!(st.len(), 24);
        assert!(!st.is_occupied(s.habitat.index(4, 4)));
        st.check_invariants(&s.habitat).unwrap();

        // A 24-particle block has no full window.
        let before = st.len();
        model.adapt_population(&mut st);
        assert_eq!(st.len(), before);
    }

    #[test]
    fn init_population_covers_fraction() {
        let mut s = open_scenario(5, 3, vec![]);
        s.coverage = 1.0;
        let st = init_population(&s, 9).unwrap();
        assert_eq!(st.len(), 15);
        assert!(st.occupied().iter().all(|&o| o));

        s.coverage = 0.05;
        assert!(matches!(
            init_population(&s, 9),
            Err(SimError::NoParticles { .. })
        ));
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let s = open_scenario(30, 30, vec![]);
        let a = init_population(&s, 42).unwrap();
        let b = init_population(&s, 42).unwrap();
        let c = init_population(&s, 43).unwrap();
        assert_eq!(a.particles, b.particles);
        assert_ne!(a.particles, c.particles);
        assert_eq!(a.len(), 450);
    }

    #[test]
    fn empty_population_step_only_diffuses_and_projects() {
        let s = open_scenario(9, 9, vec![city("a", 4, 4)]);
        let model = Model::new(&s);
        let mut st = SimState::empty(&s.habitat, 0);
        model.step(&mut st);
        assert_eq!(st.chemo[s.habitat.index(4, 4)], 2.55);
        assert_eq!(st.chemo.iter().filter(|&&v| v != 0.0).count(), 1);
        model.step(&mut st);
        let c = st.chemo[s.habitat.index(4, 4)];
        assert_eq!(c, 2.55);
        assert!((st.chemo[s.habitat.index(5, 4)] - 0.9 * 2.55 / 9.0).abs() < 1e-12);
        assert_eq!(st.step, 2);
    }

    #[test]
    fn run_index_is_checked() {
        let mut s = open_scenario(10, 10, vec![]);
        s.runs = 2;
        s.steps = 0;
        s.snapshot_steps = vec![0];
        assert!(matches!(run(&s, 2), Err(SimError::RunIndex { .. })));
        let r = run(&s, 1).unwrap();
        assert_eq!(r.seed, 1);
        assert_eq!(r.snapshots.len(), 1);
        assert_eq!(r.snapshots[0].step, 0);
    }
}
