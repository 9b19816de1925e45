//! Autonomous searcher strategies.
//!
//! The searcher is driven through the same kinematics as the subject's
//! spotlight. Lawnmower and Omniscient steer with arrow-key inputs toward a
//! list of waypoints, so their paths are reproducible by a key trace; Random
//! applies a uniform force per axis on every tick.

use rand::Rng;

use crate::kinematics::{step_spotlight, step_with_force, FrameState, Keys};
use crate::rng::{substream, tag};
use crate::trial::{Strategy, TrialConfig};
use crate::world::{GridCell, WorldConfig};

/// Starting frame of both agents: the field center, at rest.
pub fn start_frame(world: &WorldConfig) -> FrameState {
    FrameState::at_rest(world.field_center())
}

/// Row-end waypoints of the boustrophedon: top-left first, rows alternate
/// left-to-right and right-to-left, descending one row between sweeps.
pub fn lawnmower_waypoints(world: &WorldConfig) -> Vec<[f64; 2]> {
    let last = (world.grid_dim - 1) as u8;
    (0..=last)
        .flat_map(|row| {
            let (a, b) = if row % 2 == 0 { (0, last) } else { (last, 0) };
            [
                world.cell_center(GridCell::new(row, a)),
                world.cell_center(GridCell::new(row, b)),
            ]
        })
        .collect()
}

/// Bang-bang steering on each axis: push toward the target unless coasting
/// under damping already carries the agent within `tol` of it.
fn steer(state: &FrameState, target: [f64; 2], tol: f64, world: &WorldConfig) -> Keys {
    let coast = world.dt() * world.damping / (1.0 - world.damping);
    let mut axes = [0i8; 2];
    for a in 0..2 {
        let d = target[a] - state.pos[a];
        let v = state.vel[a];
        if d.abs() <= tol && v.abs() * coast <= tol {
            continue;
        }
        let toward = d.signum();
        let moving_away = v * toward < 0.0;
        if moving_away || d.abs() > v.abs() * coast + tol / 2.0 {
            axes[a] = toward as i8;
        }
    }
    Keys::from_axes(axes)
}

fn arrived(state: &FrameState, target: [f64; 2], tol: f64) -> bool {
    (target[0] - state.pos[0]).abs() <= tol && (target[1] - state.pos[1]).abs() <= tol
}

/// Key-driven steering along waypoints (advancing once the current one is
/// within `tol` on both axes, idling after the last) or after a moving
/// target given per tick.
#[derive(Debug, Clone)]
pub struct WaypointFollower {
    targets: Targets,
    tol: f64,
}

#[derive(Debug, Clone)]
enum Targets {
    Fixed(Vec<[f64; 2]>),
    Moving(Vec<[f64; 2]>),
}

impl WaypointFollower {
    pub fn lawnmower(waypoints: Vec<[f64; 2]>, world: &WorldConfig) -> Self {
        Self {
            targets: Targets::Fixed(waypoints),
            tol: lawnmower_tol(world),
        }
    }

    pub fn omniscient(waypoints: Vec<[f64; 2]>, world: &WorldConfig) -> Self {
        Self {
            targets: Targets::Fixed(waypoints),
            tol: omniscient_tol(world),
        }
    }

    /// Follows another agent's path frame by frame.
    pub fn chase(path: &[FrameState], world: &WorldConfig) -> Self {
        Self {
            targets: Targets::Moving(path.iter().map(|f| f.pos).collect()),
            tol: lawnmower_tol(world),
        }
    }

    /// Runs for up to `ticks` ticks; `stop` is called after every tick and
    /// ends the run early when it returns true.
    pub fn run(
        &self,
        start: FrameState,
        ticks: usize,
        world: &WorldConfig,
        mut stop: impl FnMut(&FrameState) -> bool,
    ) -> Vec<FrameState> {
        let mut frames = Vec::with_capacity(ticks + 1);
        frames.push(start);
        let mut state = start;
        let mut next = 0;
        for tick in 0..ticks {
            let target = match &self.targets {
                Targets::Fixed(wps) => {
                    while next < wps.len() && arrived(&state, wps[next], self.tol) {
                        next += 1;
                    }
                    wps.get(next).copied()
                }
                Targets::Moving(path) => path.get(tick + 1).or(path.last()).copied(),
            };
            let keys = match target {
                Some(wp) => steer(&state, wp, self.tol, world),
                None => Keys::NONE,
            };
            state = step_spotlight(&state, keys, world);
            frames.push(state);
            if stop(&state) {
                break;
            }
        }
        frames
    }

    pub fn keys(&self, start: FrameState, ticks: usize, world: &WorldConfig) -> Vec<Keys> {
        self.run(start, ticks, world, |_| false)[1..]
            .iter()
            .map(|f| f.keys)
            .collect()
    }
}

fn lawnmower_tol(world: &WorldConfig) -> f64 {
    0.1 * world.agent_radius
}

fn omniscient_tol(world: &WorldConfig) -> f64 {
    0.25 * world.agent_radius
}

/// Lawnmower sweep of `ticks` ticks from the field center. Independent of
/// any seed.
pub fn lawnmower_sweep(world: &WorldConfig, ticks: usize) -> Vec<FrameState> {
    WaypointFollower::lawnmower(lawnmower_waypoints(world), world).run(
        start_frame(world),
        ticks,
        world,
        |_| false,
    )
}

/// Lawnmower path for one trial. The trial is ignored: every trial sees the
/// same sweep.
pub fn lawnmower_path(_trial: &TrialConfig, world: &WorldConfig) -> Vec<FrameState> {
    lawnmower_sweep(world, world.trial_ticks())
}

/// Uniform force in `[-accel, accel]` per axis per tick from the trial's
/// motion stream.
pub fn random_path(trial: &TrialConfig, world: &WorldConfig) -> Vec<FrameState> {
    random_walk(trial.rng_seed, world, world.trial_ticks())
}

pub fn random_walk(seed: u64, world: &WorldConfig, ticks: usize) -> Vec<FrameState> {
    let mut rng = substream(seed, &[tag::AS_MOTION]);
    let mut state = start_frame(world);
    let mut frames = Vec::with_capacity(ticks + 1);
    frames.push(state);
    for _ in 0..ticks {
        let f = [
            rng.random_range(-world.accel..=world.accel),
            rng.random_range(-world.accel..=world.accel),
        ];
        state = step_with_force(&state, [Some(f[0]), Some(f[1])], Keys::NONE, world);
        frames.push(state);
    }
    frames
}

/// Greedy nearest-unvisited-neighbour tour over `points` from `from`.
/// Ties go to the earlier point.
pub fn nearest_neighbor_order(from: [f64; 2], points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut left: Vec<[f64; 2]> = points.to_vec();
    let mut at = from;
    let mut order = Vec::with_capacity(points.len());
    while !left.is_empty() {
        let (i, _) = left
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p[0] - at[0]).powi(2) + (p[1] - at[1]).powi(2)))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            );
        at = left.remove(i);
        order.push(at);
    }
    order
}

/// Direct visits to every outlier in nearest-neighbour order, then idle.
pub fn omniscient_path(trial: &TrialConfig, world: &WorldConfig) -> Vec<FrameState> {
    let start = start_frame(world);
    let order = nearest_neighbor_order(start.pos, &trial.outlier_centers(world));
    WaypointFollower::omniscient(order, world).run(start, world.trial_ticks(), world, |_| false)
}

/// The searcher's path for the trial's strategy; empty for practice trials.
pub fn searcher_path(trial: &TrialConfig, world: &WorldConfig) -> Vec<FrameState> {
    match trial.strategy() {
        Some(Strategy::Lawnmower) => lawnmower_path(trial, world),
        Some(Strategy::Random) => random_path(trial, world),
        Some(Strategy::Omniscient) => omniscient_path(trial, world),
        None => Vec::new(),
    }
}

/// Time for the lawnmower sweep, starting at rest on the top-left circle,
/// to bring the agent into contact with every grid circle.
///
/// Returns infinity if the sweep never completes (only possible for
/// degenerate configs).
pub fn optimal_encounter_time(world: &WorldConfig) -> f64 {
    let wps = lawnmower_waypoints(world);
    let centers: Vec<[f64; 2]> = world.cells().map(|c| world.cell_center(c)).collect();
    let reach2 = world.contact_distance().powi(2);
    let mut seen = vec![false; centers.len()];
    let mut remaining = centers.len();
    let mut mark = |f: &FrameState| {
        for (s, c) in seen.iter_mut().zip(&centers) {
            if !*s && (f.pos[0] - c[0]).powi(2) + (f.pos[1] - c[1]).powi(2) <= reach2 {
                *s = true;
                remaining -= 1;
            }
        }
        remaining == 0
    };
    let start = FrameState::at_rest(wps[0]);
    if mark(&start) {
        return 0.0;
    }
    let path_len: f64 = wps
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).abs() + (w[1][1] - w[0][1]).abs())
        .sum();
    // generous cap: ten times the constant-speed time plus ramps
    let cap = ((10.0 * path_len / world.max_speed + 60.0) * f64::from(world.tick_rate)) as usize;
    let frames =
        WaypointFollower::lawnmower(wps[1..].to_vec(), world).run(start, cap, world, &mut mark);
    if remaining == 0 {
        frames.last().map_or(f64::INFINITY, |f| f.t)
    } else {
        f64::INFINITY
    }
}
