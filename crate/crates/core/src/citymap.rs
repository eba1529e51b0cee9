//! Habitat raster, city set and scenario configuration.
//!
//! A scenario is a TOML document with four sections:
//!
//! ```toml
//! [map]
//! image = "italy.pgm"            # PGM (P5) or PNG, 8-bit greyscale
//! grey = { habitable = [255], obstacle = [128], outside = [0] }
//!
//! [cities]
//! vicinity_radius = 12           # cells; default 2.5% of the map diagonal
//! list = [ { name = "Roma", x = 170, y = 200 } ]
//!
//! [params]                       # see ModelParams, all optional
//! sensor_offset = 9
//!
//! [experiment]                   # all optional
//! nutrient = "low"               # or "high"
//! runs = 20
//! steps = 6192
//! snapshot_steps = [10, 91, 272, 576, 1924, 6192]
//! base_seed = 0
//! coverage = 0.5
//! dilation = 1
//! ```
//!
//! The image path is resolved relative to the scenario file.
//! [`Scenario::canonical_toml`] echoes the document back with every default
//! filled in.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PointSet, Site};
use crate::plasmodium::{ModelParams, SimError};

/// Snapshot schedule of the reference evolution figure.
pub const DEFAULT_SNAPSHOT_STEPS: [u64; 6] = [10, 91, 272, 576, 1924, 6192];
pub const DEFAULT_RUNS: i64 = 20;
pub const DEFAULT_STEPS: i64 = 6192;
pub const DEFAULT_COVERAGE: f64 = 0.5;
pub const DEFAULT_DILATION: i64 = 1;
/// Default vicinity radius as a fraction of the map diagonal.
pub const VICINITY_DIAGONAL_FRACTION: f64 = 0.025;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: cannot decode image: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("image must be 8-bit single-channel, got {0}")]
    NotGreyscale(String),
    #[error("image is empty")]
    Empty,
    #[error("map must be at least 3×3, got {0}×{1}")]
    TooSmall(usize, usize),
    #[error("map has no habitable cells")]
    NoHabitable,
    #[error("grey value {value} at ({x}, {y}) is not covered by the grey mapping")]
    UnmappedGrey { value: u8, x: usize, y: usize },
    #[error("grey value {0} is mapped to more than one class")]
    AmbiguousGrey(u8),
    #[error("cell buffer has {got} entries, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario document: {0}")]
    Parse(String),
    #[error("`{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("map: {0}")]
    Map(#[from] MapError),
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<SimError> for ScenarioError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidParam { field, reason } => {
                ScenarioError::invalid(format!("params.{field}"), reason)
            }
            other => ScenarioError::invalid("params", other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Habitable,
    Obstacle,
    Outside,
}

/// Grey level → cell class table. Any grey level not listed is an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreyMapping {
    pub habitable: Vec<u8>,
    pub obstacle: Vec<u8>,
    pub outside: Vec<u8>,
}

impl Default for GreyMapping {
    fn default() -> Self {
        GreyMapping {
            habitable: vec![255],
            obstacle: vec![128],
            outside: vec![0],
        }
    }
}

impl GreyMapping {
    fn table(&self) -> Result<[Option<Cell>; 256], MapError> {
        let mut t = [None; 256];
        for (values, class) in [
            (&self.habitable, Cell::Habitable),
            (&self.obstacle, Cell::Obstacle),
            (&self.outside, Cell::Outside),
        ] {
            for &v in values {
                if t[v as usize].is_some_and(|c| c != class) {
                    return Err(MapError::AmbiguousGrey(v));
                }
                t[v as usize] = Some(class);
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClassCounts {
    pub habitable: usize,
    pub obstacle: usize,
    pub outside: usize,
}

impl fmt::Display for ClassCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "habitable={} obstacle={} outside={}",
            self.habitable, self.obstacle, self.outside
        )
    }
}

/// Lattice of habitat classes, row-major with `y` growing downwards.
#[derive(Debug, Clone, PartialEq)]
pub struct HabitatMap {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    source: Option<PathBuf>,
}

impl HabitatMap {
    pub fn from_cells(width: usize, height: usize, cells: Vec<Cell>) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::Empty);
        }
        if width < 3 || height < 3 {
            return Err(MapError::TooSmall(width, height));
        }
        if cells.len() != width * height {
            return Err(MapError::SizeMismatch {
                expected: width * height,
                got: cells.len(),
            });
        }
        if !cells.contains(&Cell::Habitable) {
            return Err(MapError::NoHabitable);
        }
        Ok(HabitatMap {
            width,
            height,
            cells,
            source: None,
        })
    }

    /// Fully habitable rectangle.
    pub fn open(width: usize, height: usize) -> Result<Self, MapError> {
        HabitatMap::from_cells(width, height, vec![Cell::Habitable; width * height])
    }

    pub fn from_grey(
        width: usize,
        height: usize,
        grey: &[u8],
        mapping: &GreyMapping,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 || grey.is_empty() {
            return Err(MapError::Empty);
        }
        if grey.len() != width * height {
            return Err(MapError::SizeMismatch {
                expected: width * height,
                got: grey.len(),
            });
        }
        let table = mapping.table()?;
        let cells = grey
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                table[v as usize].ok_or(MapError::UnmappedGrey {
                    value: v,
                    x: i % width,
                    y: i / width,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        HabitatMap::from_cells(width, height, cells)
    }

    /// Reads a PGM or PNG raster and classifies every pixel.
    pub fn load(path: &Path, mapping: &GreyMapping) -> Result<Self, MapError> {
        let reader = image::ImageReader::open(path)
            .map_err(|source| MapError::Io {
                path: path.to_path_buf(),
                source,
            })?
            .with_guessed_format()
            .map_err(|source| MapError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        let img = reader.decode().map_err(|e| MapError::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let image::DynamicImage::ImageLuma8(buf) = img else {
            return Err(MapError::NotGreyscale(format!("{:?}", img.color())));
        };
        let (w, h) = buf.dimensions();
        let mut map = HabitatMap::from_grey(w as usize, h as usize, buf.as_raw(), mapping)?;
        map.source = Some(path.to_path_buf());
        Ok(map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn get(&self, x: i64, y: i64) -> Option<Cell> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return None;
        }
        Some(self.cells[y as usize * self.width + x as usize])
    }

    pub fn is_habitable(&self, x: i64, y: i64) -> bool {
        self.get(x, y) == Some(Cell::Habitable)
    }

    pub fn habitable_mask(&self) -> Vec<bool> {
        self.cells.iter().map(|&c| c == Cell::Habitable).collect()
    }

    pub fn counts(&self) -> ClassCounts {
        let mut c = ClassCounts::default();
        for cell in &self.cells {
            match cell {
                Cell::Habitable => c.habitable += 1,
                Cell::Obstacle => c.obstacle += 1,
                Cell::Outside => c.outside += 1,
            }
        }
        c
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64)
    }

    /// Canonical grey encoding (255 habitable, 128 obstacle, 0 outside).
    pub fn to_grey(&self) -> Vec<u8> {
        self.cells
            .iter()
            .map(|c| match c {
                Cell::Habitable => 255,
                Cell::Obstacle => 128,
                Cell::Outside => 0,
            })
            .collect()
    }
}

/// Reads a raster and reports its class counts through the `log` facade.
pub fn load_map(path: &Path, mapping: &GreyMapping) -> Result<HabitatMap, MapError> {
    let map = HabitatMap::load(path, mapping)?;
    log::info!(
        "{}: {}×{} {}",
        path.display(),
        map.width,
        map.height,
        map.counts()
    );
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct City {
    pub name: String,
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CitySet {
    pub cities: Vec<City>,
    pub vicinity_radius: u32,
}

/// Integer offsets `(dx, dy)` with `dx² + dy² ≤ r²`.
pub fn disc_offsets(radius: u32) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

impl CitySet {
    pub fn new(cities: Vec<City>, vicinity_radius: u32) -> Self {
        CitySet {
            cities,
            vicinity_radius,
        }
    }

    pub fn len(&self) -> usize {
        self.cities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cities.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.cities.iter().map(|c| c.name.clone()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.cities.iter().position(|c| c.name == name)
    }

    pub fn point_set(&self) -> Result<PointSet, crate::geometry::GeometryError> {
        PointSet::new(
            self.cities
                .iter()
                .map(|c| Site::new(c.name.clone(), c.x as f64, c.y as f64))
                .collect(),
        )
    }

    /// Checks placement against the habitat and pairwise vicinity overlap.
    pub fn validate(&self, habitat: &HabitatMap) -> Result<(), ScenarioError> {
        let mut names = HashSet::new();
        for (i, c) in self.cities.iter().enumerate() {
            let field = format!("cities.list[{i}]");
            if c.name.is_empty() {
                return Err(ScenarioError::invalid(field, "empty city name"));
            }
            if !names.insert(c.name.as_str()) {
                return Err(ScenarioError::invalid(
                    field,
                    format!("duplicate city name `{}`", c.name),
                ));
            }
            match habitat.get(c.x as i64, c.y as i64) {
                None => {
                    return Err(ScenarioError::invalid(
                        field,
                        format!("`{}` at ({}, {}) lies off the map", c.name, c.x, c.y),
                    ))
                }
                Some(Cell::Obstacle) => {
                    return Err(ScenarioError::invalid(
                        field,
                        format!("`{}` at ({}, {}) lies on an obstacle", c.name, c.x, c.y),
                    ))
                }
                Some(Cell::Outside) => {
                    return Err(ScenarioError::invalid(
                        field,
                        format!("`{}` at ({}, {}) lies outside the habitat", c.name, c.x, c.y),
                    ))
                }
                Some(Cell::Habitable) => {}
            }
        }
        let r = self.vicinity_radius as i64;
        let disc = disc_offsets(self.vicinity_radius);
        for i in 0..self.cities.len() {
            for j in i + 1..self.cities.len() {
                let (a, b) = (&self.cities[i], &self.cities[j]);
                let (dx, dy) = (b.x as i64 - a.x as i64, b.y as i64 - a.y as i64);
                if dx * dx + dy * dy > 4 * r * r {
                    continue;
                }
                let overlap = disc.iter().any(|&(ox, oy)| {
                    let (px, py) = (ox - dx, oy - dy);
                    px * px + py * py <= r * r
                });
                if overlap {
                    return Err(ScenarioError::invalid(
                        "cities.vicinity_radius",
                        format!(
                            "vicinities of `{}` and `{}` overlap at radius {}",
                            a.name, b.name, r
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Habitable cells within `vicinity_radius` of city `i`, as `(x, y)` pairs
/// in row-major order.
pub fn vicinity_cells(cities: &CitySet, i: usize, habitat: &HabitatMap) -> Vec<(usize, usize)> {
    let c = &cities.cities[i];
    let mut cells: Vec<(usize, usize)> = disc_offsets(cities.vicinity_radius)
        .into_iter()
        .map(|(dx, dy)| (c.x as i64 + dx, c.y as i64 + dy))
        .filter(|&(x, y)| habitat.is_habitable(x, y))
        .map(|(x, y)| (x as usize, y as usize))
        .collect();
    cells.sort_by_key(|&(x, y)| (y, x));
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nutrient {
    #[default]
    Low,
    High,
}

impl fmt::Display for Nutrient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Nutrient::Low => "low",
            Nutrient::High => "high",
        })
    }
}

// ---- configuration document ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub image: PathBuf,
    #[serde(default)]
    pub grey: GreyMapping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CitiesSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vicinity_radius: Option<i64>,
    #[serde(default)]
    pub list: Vec<City>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub nutrient: Nutrient,
    pub runs: i64,
    pub steps: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_steps: Option<Vec<i64>>,
    pub base_seed: u64,
    pub coverage: f64,
    pub dilation: i64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            nutrient: Nutrient::Low,
            runs: DEFAULT_RUNS,
            steps: DEFAULT_STEPS,
            snapshot_steps: None,
            base_seed: 0,
            coverage: DEFAULT_COVERAGE,
            dilation: DEFAULT_DILATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub map: MapSection,
    pub cities: CitiesSection,
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }
}

/// Fully validated, immutable experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub habitat: HabitatMap,
    pub cities: CitySet,
    pub nutrient: Nutrient,
    pub params: ModelParams,
    pub runs: u32,
    pub steps: u64,
    pub snapshot_steps: Vec<u64>,
    pub base_seed: u64,
    pub coverage: f64,
    pub dilation: u32,
    config: Option<ScenarioConfig>,
}

impl Scenario {
    /// Scenario over an in-memory habitat with default parameters.
    pub fn new(habitat: HabitatMap, cities: CitySet) -> Result<Self, ScenarioError> {
        let s = Scenario {
            habitat,
            cities,
            nutrient: Nutrient::Low,
            params: ModelParams::default(),
            runs: DEFAULT_RUNS as u32,
            steps: DEFAULT_STEPS as u64,
            snapshot_steps: DEFAULT_SNAPSHOT_STEPS.to_vec(),
            base_seed: 0,
            coverage: DEFAULT_COVERAGE,
            dilation: DEFAULT_DILATION as u32,
            config: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_config(config: ScenarioConfig, base_dir: &Path) -> Result<Self, ScenarioError> {
        let image = if config.map.image.is_absolute() {
            config.map.image.clone()
        } else {
            base_dir.join(&config.map.image)
        };
        let habitat = load_map(&image, &config.map.grey)?;
        Scenario::with_habitat(config, habitat)
    }

    /// Builds the scenario from a parsed document and an already loaded map.
    pub fn with_habitat(
        mut config: ScenarioConfig,
        habitat: HabitatMap,
    ) -> Result<Self, ScenarioError> {
        let exp = &config.experiment;
        let radius = match config.cities.vicinity_radius {
            Some(r) if r < 0 => {
                return Err(ScenarioError::invalid("cities.vicinity_radius", "must be non-negative"))
            }
            Some(r) => r,
            None => (VICINITY_DIAGONAL_FRACTION * habitat.diagonal()).round() as i64,
        };
        if exp.runs < 1 {
            return Err(ScenarioError::invalid("experiment.runs", "must be at least 1"));
        }
        if exp.steps < 0 {
            return Err(ScenarioError::invalid("experiment.steps", "must be non-negative"));
        }
        if exp.dilation < 0 {
            return Err(ScenarioError::invalid("experiment.dilation", "must be non-negative"));
        }
        let steps = exp.steps as u64;
        let snapshot_steps: Vec<u64> = match &exp.snapshot_steps {
            Some(v) => {
                if let Some(&bad) = v.iter().find(|&&s| s < 0 || s as u64 > steps) {
                    return Err(ScenarioError::invalid(
                        "experiment.snapshot_steps",
                        format!("step {bad} outside [0, {steps}]"),
                    ));
                }
                let mut v: Vec<u64> = v.iter().map(|&s| s as u64).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
            None => DEFAULT_SNAPSHOT_STEPS
                .iter()
                .copied()
                .filter(|&s| s <= steps)
                .collect(),
        };
        let scenario = Scenario {
            cities: CitySet::new(config.cities.list.clone(), radius as u32),
            habitat,
            nutrient: exp.nutrient,
            params: config.params.clone(),
            runs: u32::try_from(exp.runs)
                .map_err(|_| ScenarioError::invalid("experiment.runs", "too large"))?,
            steps,
            snapshot_steps: snapshot_steps.clone(),
            base_seed: exp.base_seed,
            coverage: exp.coverage,
            dilation: exp.dilation as u32,
            config: None,
        };
        scenario.validate()?;

        config.cities.vicinity_radius = Some(radius);
        config.experiment.snapshot_steps = Some(snapshot_steps.iter().map(|&s| s as i64).collect());
        Ok(Scenario {
            config: Some(config),
            ..scenario
        })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.params.validate()?;
        if self.runs < 1 {
            return Err(ScenarioError::invalid("experiment.runs", "must be at least 1"));
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return Err(ScenarioError::invalid("experiment.coverage", "must lie in (0, 1]"));
        }
        if let Some(&s) = self.snapshot_steps.iter().find(|&&s| s > self.steps) {
            return Err(ScenarioError::invalid(
                "experiment.snapshot_steps",
                format!("step {s} outside [0, {}]", self.steps),
            ));
        }
        self.cities.validate(&self.habitat)
    }

    /// Stimulus projected onto city cells every step.
    pub fn nutrient_level(&self) -> f64 {
        match self.nutrient {
            Nutrient::Low => self.params.nutrient_low,
            Nutrient::High => self.params.nutrient_high,
        }
    }

    /// The source document with all defaults resolved, if the scenario was
    /// built from one.
    pub fn config(&self) -> Option<&ScenarioConfig> {
        self.config.as_ref()
    }

    pub fn canonical_toml(&self) -> Option<String> {
        self.config.as_ref().map(ScenarioConfig::to_toml)
    }
}

/// Parses and validates a scenario document; relative paths resolve against
/// `base_dir`.
pub fn load_scenario(text: &str, base_dir: &Path) -> Result<Scenario, ScenarioError> {
    Scenario::from_config(ScenarioConfig::parse(text)?, base_dir)
}

pub fn load_scenario_file(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    load_scenario(&text, dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn city(name: &str, x: usize, y: usize) -> City {
        City {
            name: name.into(),
            x,
            y,
        }
    }

    #[test]
    fn all_white_map_is_habitable() {
        let m = HabitatMap::from_grey(10, 10, &[255; 100], &GreyMapping::default()).unwrap();
        assert_eq!(m.counts().habitable, 100);
    }

    #[test]
    fn checkerboard_splits_evenly() {
        let grey: Vec<u8> = (0..100)
            .map(|i| if (i % 10 + i / 10) % 2 == 0 { 255 } else { 0 })
            .collect();
        let mapping = GreyMapping {
            habitable: vec![255],
            obstacle: vec![0],
            outside: vec![],
        };
        let c = HabitatMap::from_grey(10, 10, &grey, &mapping).unwrap().counts();
        assert_eq!((c.habitable, c.obstacle, c.outside), (50, 50, 0));
    }

    #[test]
    fn map_errors() {
        let m = GreyMapping::default();
        assert!(matches!(HabitatMap::from_grey(0, 0, &[], &m), Err(MapError::Empty)));
        assert!(matches!(
            HabitatMap::from_grey(3, 3, &[0; 9], &m),
            Err(MapError::NoHabitable)
        ));
        assert!(matches!(
            HabitatMap::from_grey(3, 3, &[255, 255, 7, 255, 255, 255, 255, 255, 255], &m),
            Err(MapError::UnmappedGrey { value: 7, x: 2, y: 0 })
        ));
        assert!(matches!(
            HabitatMap::from_grey(2, 2, &[255; 4], &m),
            Err(MapError::TooSmall(2, 2))
        ));
        let dup = GreyMapping {
            obstacle: vec![255],
            ..GreyMapping::default()
        };
        assert!(matches!(
            HabitatMap::from_grey(3, 3, &[255; 9], &dup),
            Err(MapError::AmbiguousGrey(255))
        ));
    }

    #[test]
    fn grey_round_trip_is_identity() {
        let grey: Vec<u8> = (0..48).map(|i| [255, 128, 0][i % 3]).collect();
        let m = HabitatMap::from_grey(8, 6, &grey, &GreyMapping::default()).unwrap();
        let again = HabitatMap::from_grey(8, 6, &m.to_grey(), &GreyMapping::default()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn vicinity_discs() {
        let open = HabitatMap::open(11, 11).unwrap();
        let set = CitySet::new(vec![city("a", 5, 5)], 0);
        assert_eq!(vicinity_cells(&set, 0, &open), vec![(5, 5)]);

        let set = CitySet::new(vec![city("a", 5, 5)], 2);
        assert_eq!(vicinity_cells(&set, 0, &open).len(), 13);

        // Obstacle column right of the city clips the disc.
        let cells = (0..121)
            .map(|i| if i % 11 == 6 { Cell::Obstacle } else { Cell::Habitable })
            .collect();
        let walled = HabitatMap::from_cells(11, 11, cells).unwrap();
        let v = vicinity_cells(&set, 0, &walled);
        assert_eq!(v.len(), 13 - 3);
        assert!(v.iter().all(|&(x, _)| x != 6));
    }

    #[test]
    fn city_validation() {
        let cells = (0..100)
            .map(|i| if i == 55 { Cell::Obstacle } else { Cell::Habitable })
            .collect();
        let map = HabitatMap::from_cells(10, 10, cells).unwrap();
        let err = CitySet::new(vec![city("m", 5, 5)], 1).validate(&map).unwrap_err();
        assert!(err.to_string().contains("obstacle"), "{err}");
        let err = CitySet::new(vec![city("o", 10, 1)], 1).validate(&map).unwrap_err();
        assert!(err.to_string().contains("off the map"), "{err}");
        let err = CitySet::new(vec![city("a", 1, 1), city("b", 3, 1)], 1)
            .validate(&map)
            .unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
        CitySet::new(vec![city("a", 1, 1), city("b", 4, 1)], 1)
            .validate(&map)
            .unwrap();
    }

    fn write_map(dir: &Path) {
        let img = image::GrayImage::from_raw(20, 10, vec![255; 200]).unwrap();
        img.save(dir.join("toy.pgm")).unwrap();
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = tempfile::tempdir().unwrap();
        write_map(dir.path());
        let text = r#"
            [map]
            image = "toy.pgm"
            [cities]
            list = [{ name = "a", x = 2, y = 2 }, { name = "b", x = 15, y = 7 }]
        "#;
        let s = load_scenario(text, dir.path()).unwrap();
        assert_eq!(s.nutrient, Nutrient::Low);
        assert_eq!((s.runs, s.steps), (20, 6192));
        assert_eq!(s.snapshot_steps, DEFAULT_SNAPSHOT_STEPS);
        assert_eq!(s.params, ModelParams::default());
        // 2.5% of the 20×10 diagonal.
        assert_eq!(s.cities.vicinity_radius, 1);

        let dump = s.canonical_toml().unwrap();
        assert!(dump.contains("vicinity_radius = 1"));
        assert!(dump.contains("sensor_offset"));
        let again = load_scenario(&dump, dir.path()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn config_errors_name_the_field() {
        let dir = tempfile::tempdir().unwrap();
        write_map(dir.path());
        let base = "[map]\nimage = \"toy.pgm\"\n[cities]\nlist = [{ name = \"a\", x = 2, y = 2 }]\n";
        let cases = [
            ("[experiment]\nruns = 0\n", "experiment.runs"),
            ("[experiment]\nsteps = -5\n", "experiment.steps"),
            ("[experiment]\nsteps = 5\nsnapshot_steps = [6]\n", "experiment.snapshot_steps"),
            ("[params]\ndeposit = -1.0\n", "params.deposit"),
            ("[experiment]\ncoverage = 0.0\n", "experiment.coverage"),
        ];
        for (extra, field) in cases {
            let err = load_scenario(&format!("{base}{extra}"), dir.path()).unwrap_err();
            match err {
                ScenarioError::Invalid { field: f, .. } => assert_eq!(f, field),
                other => panic!("{extra}: {other}"),
            }
        }
        let err = load_scenario(&format!("{base}[params]\nbogus = 1\n"), dir.path()).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = load_scenario("[map]\nimage = \"missing.pgm\"\n[cities]\n", dir.path()).unwrap_err();
        assert!(matches!(err, ScenarioError::Map(MapError::Io { .. })));
    }
}
