//! World geometry and kinematic constants.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Playing-field geometry and kinematics shared by the subject's spotlight
/// and the autonomous searcher. Lengths are logical units, the field is
/// `field_size` square with the origin at the top-left corner and y pointing
/// down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub field_size: f64,
    pub grid_dim: u32,
    pub cell_pitch: f64,
    pub outlier_radius: f64,
    pub agent_radius: f64,
    pub tick_rate: u32,
    pub trial_duration: f64,
    pub warning_lead: f64,
    /// units/s² added per held axis
    pub accel: f64,
    /// per-tick velocity retention on an axis without input
    pub damping: f64,
    pub max_speed: f64,
}

/// Maximum speed that makes the optimal lawnmower sweep of all 49 circles
/// take 25 s (so a 20 s trial is 80% of it) under the default kinematics.
/// Found by scanning `optimal_encounter_time`, which is not monotone in
/// this parameter because braking is quantised to ticks.
pub const CALIBRATED_MAX_SPEED: f64 = 248.0;

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            field_size: 700.0,
            grid_dim: 7,
            cell_pitch: 100.0,
            outlier_radius: 20.0,
            agent_radius: 40.0,
            tick_rate: 30,
            trial_duration: 20.0,
            warning_lead: 5.0,
            accel: 600.0,
            damping: 0.85,
            max_speed: CALIBRATED_MAX_SPEED,
        }
    }
}

/// A cell of the circle grid, `col` left to right, `row` top to bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridCell {
    pub row: u8,
    pub col: u8,
}

impl GridCell {
    pub fn new(row: u8, col: u8) -> Self {
        Self { row, col }
    }
}

impl WorldConfig {
    pub fn dt(&self) -> f64 {
        1.0 / f64::from(self.tick_rate)
    }

    /// Number of simulation ticks in one trial.
    pub fn trial_ticks(&self) -> usize {
        (self.trial_duration * f64::from(self.tick_rate)).round() as usize
    }

    pub fn cell_count(&self) -> usize {
        (self.grid_dim * self.grid_dim) as usize
    }

    fn grid_margin(&self) -> f64 {
        (self.field_size - f64::from(self.grid_dim - 1) * self.cell_pitch) / 2.0
    }

    pub fn cell_center(&self, cell: GridCell) -> [f64; 2] {
        let m = self.grid_margin();
        [
            m + f64::from(cell.col) * self.cell_pitch,
            m + f64::from(cell.row) * self.cell_pitch,
        ]
    }

    pub fn field_center(&self) -> [f64; 2] {
        [self.field_size / 2.0, self.field_size / 2.0]
    }

    pub fn contains(&self, cell: GridCell) -> bool {
        u32::from(cell.row) < self.grid_dim && u32::from(cell.col) < self.grid_dim
    }

    pub fn cells(&self) -> impl Iterator<Item = GridCell> + '_ {
        let n = self.grid_dim as u8;
        (0..n).flat_map(move |row| (0..n).map(move |col| GridCell::new(row, col)))
    }

    /// Center distance at which an agent and a circle touch.
    pub fn contact_distance(&self) -> f64 {
        self.agent_radius + self.outlier_radius
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let fail = |m: &str| Err(CoreError::InvalidWorld(m.to_owned()));
        let positive = [
            self.field_size,
            self.cell_pitch,
            self.outlier_radius,
            self.agent_radius,
            self.trial_duration,
            self.accel,
            self.max_speed,
        ];
        if positive.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return fail("lengths, durations and kinematic limits must be positive");
        }
        if self.grid_dim == 0 || self.grid_dim > 255 {
            return fail("grid_dim must be in 1..=255");
        }
        if self.tick_rate == 0 {
            return fail("tick_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.damping) {
            return fail("damping must lie in [0, 1)");
        }
        if 2.0 * self.agent_radius >= self.cell_pitch {
            return fail("agents must be smaller than the grid pitch");
        }
        if self.grid_margin() < 0.0 {
            return fail("grid does not fit in the field");
        }
        if self.warning_lead < 0.0 || self.warning_lead > self.trial_duration {
            return fail("warning_lead must lie within the trial");
        }
        Ok(())
    }

    /// Checks the fixed experiment protocol on top of [`validate`](Self::validate):
    /// a 7x7 grid, 30 Hz, 20 s trials with a 5 s warning, and a trial
    /// duration of 80% of the optimal sweep.
    pub fn check_protocol(&self) -> Result<(), CoreError> {
        self.validate()?;
        let fail = |m: String| Err(CoreError::InvalidWorld(m));
        if self.grid_dim != 7 {
            return fail(format!("grid_dim {} != 7", self.grid_dim));
        }
        if self.tick_rate != 30 {
            return fail(format!("tick_rate {} != 30", self.tick_rate));
        }
        if self.trial_duration != 20.0 || self.warning_lead != 5.0 {
            return fail("trial must last 20 s with a 5 s warning".to_owned());
        }
        let optimal = crate::search::optimal_encounter_time(self);
        let ratio = self.trial_duration / optimal;
        if ((ratio - 0.8) / 0.8).abs() > 0.02 {
            return fail(format!(
                "trial is {:.3} of the optimal sweep, expected 0.8",
                ratio
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self, CoreError> {
        let world: Self = toml::from_str(s).map_err(|e| CoreError::Config(e.to_string()))?;
        world.validate()?;
        Ok(world)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("world config is always serialisable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry() {
        let w = WorldConfig::default();
        w.validate().unwrap();
        assert_eq!(w.cell_center(GridCell::new(0, 0)), [50.0, 50.0]);
        assert_eq!(w.cell_center(GridCell::new(6, 6)), [650.0, 650.0]);
        assert_eq!(w.cell_center(GridCell::new(3, 3)), w.field_center());
        assert_eq!(w.cells().count(), 49);
        assert_eq!(w.trial_ticks(), 600);
        assert!(2.0 * w.agent_radius < w.cell_pitch);
    }

    #[test]
    fn oversize_agents_rejected() {
        let w = WorldConfig {
            agent_radius: 50.0,
            ..Default::default()
        };
        assert!(w.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let w = WorldConfig::default();
        let back = WorldConfig::from_toml_str(&w.to_toml_string()).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn protocol_rejects_other_grids() {
        let w = WorldConfig {
            grid_dim: 6,
            ..Default::default()
        };
        assert!(w.check_protocol().is_err());
    }
}
