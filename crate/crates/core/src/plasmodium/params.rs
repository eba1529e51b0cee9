use serde::{Deserialize, Serialize};

use super::SimError;

/// Particle sensing, deposition, diffusion and population adaptation
/// parameters.
///
/// Angles are in degrees and distances in lattice cells. The sensing
/// geometry (`sensor_offset`, `sensor_angle`, `rotation_angle`) defaults to
/// the network-forming regime of the model family; the remaining values are
/// the published model constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub sensor_offset: f64,
    pub sensor_angle: f64,
    pub rotation_angle: f64,
    pub deposit: f64,
    pub damping: f64,
    pub nutrient_low: f64,
    pub nutrient_high: f64,
    /// Side of the square window used for the growth test.
    pub growth_window: usize,
    pub growth_min: usize,
    pub growth_max: usize,
    /// Side of the square window used for the shrinkage test.
    pub shrink_window: usize,
    /// A particle survives while its shrinkage count is at most this value.
    pub shrink_max: usize,
    /// Whether the shrinkage count includes the particle itself. With the
    /// default (true) and `shrink_max = 24` a particle is removed only when
    /// its whole 5×5 block is occupied.
    pub shrink_count_includes_self: bool,
    /// Growth and shrinkage run once every this many scheduler steps.
    pub adaptation_interval: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            sensor_offset: 9.0,
            sensor_angle: 45.0,
            rotation_angle: 45.0,
            deposit: 5.0,
            damping: 0.9,
            nutrient_low: 2.55,
            nutrient_high: 255.0,
            growth_window: 9,
            growth_min: 1,
            growth_max: 10,
            shrink_window: 5,
            shrink_max: 24,
            shrink_count_includes_self: true,
            adaptation_interval: 2,
        }
    }
}

impl ModelParams {
    /// Checks the parameter ranges, naming the first offending field.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |field: &str, reason: &str| {
            Err(SimError::InvalidParam {
                field: field.to_string(),
                reason: reason.to_string(),
            })
        };
        let finite = [
            ("sensor_offset", self.sensor_offset),
            ("sensor_angle", self.sensor_angle),
            ("rotation_angle", self.rotation_angle),
            ("deposit", self.deposit),
            ("damping", self.damping),
            ("nutrient_low", self.nutrient_low),
            ("nutrient_high", self.nutrient_high),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return bad(field, "must be finite");
            }
        }
        if self.sensor_offset < 1.0 {
            return bad("sensor_offset", "must be at least 1 cell");
        }
        if !(self.sensor_angle > 0.0 && self.sensor_angle < 180.0) {
            return bad("sensor_angle", "must lie in (0, 180) degrees");
        }
        if !(self.rotation_angle > 0.0 && self.rotation_angle < 180.0) {
            return bad("rotation_angle", "must lie in (0, 180) degrees");
        }
        if self.deposit <= 0.0 {
            return bad("deposit", "must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping", "must lie in (0, 1]");
        }
        if self.nutrient_low < 0.0 {
            return bad("nutrient_low", "must be non-negative");
        }
        if self.nutrient_high < 0.0 {
            return bad("nutrient_high", "must be non-negative");
        }
        if self.growth_window.is_multiple_of(2) {
            return bad("growth_window", "must be odd");
        }
        if self.shrink_window.is_multiple_of(2) {
            return bad("shrink_window", "must be odd");
        }
        if self.growth_min > self.growth_max {
            return bad("growth_min", "must not exceed growth_max");
        }
        if self.adaptation_interval == 0 {
            return bad("adaptation_interval", "must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = ModelParams::default();
        p.validate().unwrap();
        assert_eq!(p.deposit, 5.0);
        assert_eq!(p.damping, 0.9);
        assert_eq!((p.nutrient_low, p.nutrient_high), (2.55, 255.0));
        assert_eq!((p.growth_window, p.growth_min, p.growth_max), (9, 1, 10));
        assert_eq!((p.shrink_window, p.shrink_max), (5, 24));
        assert_eq!(p.adaptation_interval, 2);
    }

    #[test]
    fn names_offending_field() {
        let p = ModelParams {
            damping: 1.5,
            ..ModelParams::default()
        };
        match p.validate() {
            Err(SimError::InvalidParam { field, .. }) => assert_eq!(field, "damping"),
            other => panic!("unexpected {other:?}"),
        }
        let p = ModelParams {
            deposit: -1.0,
            ..ModelParams::default()
        };
        assert!(matches!(p.validate(), Err(SimError::InvalidParam { field, .. }) if field == "deposit"));
    }
}
