//! Per-trial configuration, outlier placement, intersection counting and
//! scoring.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::kinematics::FrameState;
use crate::rng::{substream, tag};
use crate::search::searcher_path;
use crate::world::{GridCell, WorldConfig};

pub const MIN_OUTLIERS: usize = 5;
pub const MAX_OUTLIERS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    Lawnmower,
    Random,
    Omniscient,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Lawnmower, Strategy::Random, Strategy::Omniscient];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Lawnmower => "lawnmower",
            Strategy::Random => "random",
            Strategy::Omniscient => "omniscient",
        }
    }
}

/// Fraction of its own intersections that the searcher reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Capability {
    C20,
    C50,
    C100,
}

impl Capability {
    pub const ALL: [Capability; 3] = [Capability::C20, Capability::C50, Capability::C100];

    pub fn percent(self) -> u32 {
        match self {
            Capability::C20 => 20,
            Capability::C50 => 50,
            Capability::C100 => 100,
        }
    }

    pub fn fraction(self) -> f64 {
        f64::from(self.percent()) / 100.0
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Capability::C20 => "c20",
            Capability::C50 => "c50",
            Capability::C100 => "c100",
        }
    }

    /// The only way a subject can tell capabilities apart.
    pub fn color(self) -> SearcherColor {
        match self {
            Capability::C20 => SearcherColor::Blue,
            Capability::C50 => SearcherColor::Orange,
            Capability::C100 => SearcherColor::Yellow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearcherColor {
    Blue,
    Orange,
    Yellow,
}

impl SearcherColor {
    pub fn name(self) -> &'static str {
        match self {
            SearcherColor::Blue => "blue",
            SearcherColor::Orange => "orange",
            SearcherColor::Yellow => "yellow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearcherConfig {
    pub strategy: Strategy,
    pub capability: Capability,
    pub color: SearcherColor,
}

impl SearcherConfig {
    pub fn new(strategy: Strategy, capability: Capability) -> Self {
        Self {
            strategy,
            capability,
            color: capability.color(),
        }
    }
}

/// Everything needed to replay one trial. Practice trials have no
/// searcher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub trial_index: u32,
    pub rng_seed: u64,
    pub outlier_cells: Vec<GridCell>,
    pub searcher: Option<SearcherConfig>,
}

impl TrialConfig {
    pub fn new(
        trial_index: u32,
        rng_seed: u64,
        searcher: Option<SearcherConfig>,
        world: &WorldConfig,
    ) -> Self {
        Self {
            trial_index,
            rng_seed,
            outlier_cells: place_outliers(rng_seed, world),
            searcher,
        }
    }

    pub fn validate(&self, world: &WorldConfig) -> Result<(), CoreError> {
        let n = self.outlier_cells.len();
        if !(MIN_OUTLIERS..=MAX_OUTLIERS).contains(&n) {
            return Err(CoreError::InvalidTrial(format!(
                "{n} outliers outside 5..=15"
            )));
        }
        let distinct: BTreeSet<_> = self.outlier_cells.iter().collect();
        if distinct.len() != n {
            return Err(CoreError::InvalidTrial("duplicate outlier cells".into()));
        }
        if let Some(c) = self.outlier_cells.iter().find(|c| !world.contains(**c)) {
            return Err(CoreError::InvalidTrial(format!(
                "cell {c:?} outside the grid"
            )));
        }
        if let Some(s) = &self.searcher {
            if s.color != s.capability.color() {
                return Err(CoreError::InvalidTrial(
                    "searcher color does not match capability".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn outlier_centers(&self, world: &WorldConfig) -> Vec<[f64; 2]> {
        self.outlier_cells
            .iter()
            .map(|c| world.cell_center(*c))
            .collect()
    }

    pub fn strategy(&self) -> Option<Strategy> {
        self.searcher.map(|s| s.strategy)
    }

    pub fn capability(&self) -> Option<Capability> {
        self.searcher.map(|s| s.capability)
    }
}

/// Draws between 5 and 15 distinct cells from the seed's outlier stream.
/// Returned sorted by (row, col).
pub fn place_outliers(seed: u64, world: &WorldConfig) -> Vec<GridCell> {
    let mut rng = substream(seed, &[tag::OUTLIERS]);
    let cells = world.cell_count();
    let n = rng.random_range(MIN_OUTLIERS..=MAX_OUTLIERS).min(cells);
    let dim = world.grid_dim as usize;
    let mut out: Vec<GridCell> = sample(&mut rng, cells, n)
        .into_iter()
        .map(|i| GridCell::new((i / dim) as u8, (i % dim) as u8))
        .collect();
    out.sort();
    out
}

/// Number of distinct outliers touched by the path. Contact is closed:
/// a center exactly at `agent_radius + outlier_radius` counts.
pub fn count_intersections(
    path: &[FrameState],
    outliers: &[GridCell],
    world: &WorldConfig,
) -> usize {
    let reach2 = world.contact_distance().powi(2);
    outliers
        .iter()
        .filter(|cell| {
            let c = world.cell_center(**cell);
            path.iter().any(|f| {
                let dx = f.pos[0] - c[0];
                let dy = f.pos[1] - c[1];
                dx * dx + dy * dy <= reach2
            })
        })
        .count()
}

/// Reported count: `fraction * intersected`, rounded half up.
pub fn as_report(intersected: u32, capability: Capability) -> u32 {
    (intersected * capability.percent() + 50) / 100
}

/// Points for one trial: 10 minus 2 per outlier of error, floored at 0.
pub fn trial_score(estimate: u32, truth: u32) -> u32 {
    10u32.saturating_sub(2 * estimate.abs_diff(truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub truth_count: u32,
    pub intersected_by_as: u32,
    pub reported_by_as: u32,
    pub intersected_by_subject: Option<u32>,
    #[serde(skip)]
    pub as_path: Vec<FrameState>,
}

/// Runs the searcher for the trial and scores what it and, optionally,
/// the subject touched. Practice trials report zeros for the searcher.
pub fn simulate_trial(
    trial: &TrialConfig,
    world: &WorldConfig,
    subject_frames: Option<&[FrameState]>,
) -> SearchOutcome {
    let (as_path, intersected, reported) = match &trial.searcher {
        Some(s) => {
            let path = searcher_path(trial, world);
            let hit = count_intersections(&path, &trial.outlier_cells, world) as u32;
            (path, hit, as_report(hit, s.capability))
        }
        None => (Vec::new(), 0, 0),
    };
    SearchOutcome {
        truth_count: trial.outlier_cells.len() as u32,
        intersected_by_as: intersected,
        reported_by_as: reported,
        intersected_by_subject: subject_frames
            .map(|f| count_intersections(f, &trial.outlier_cells, world) as u32),
        as_path,
    }
}
