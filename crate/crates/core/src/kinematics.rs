//! Fixed-timestep force control with damping.
//!
//! One tick: every axis with input accelerates, every axis without input
//! has its velocity multiplied by `damping`; the speed is clamped to
//! `max_speed`; the position integrates the new velocity; an axis that
//! reaches a wall stops there with zero velocity.

use serde::{Deserialize, Serialize};

use crate::world::WorldConfig;

/// Arrow-key state as a 4-bit mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Keys(pub u8);

impl Keys {
    pub const NONE: Keys = Keys(0);
    pub const LEFT: Keys = Keys(1);
    pub const RIGHT: Keys = Keys(2);
    pub const UP: Keys = Keys(4);
    pub const DOWN: Keys = Keys(8);

    pub fn is_valid(self) -> bool {
        self.0 & !0x0f == 0
    }

    pub fn contains(self, other: Keys) -> bool {
        self.0 & other.0 == other.0
    }

    /// Net input per axis in {-1, 0, 1}; opposite keys cancel.
    pub fn axes(self) -> [i8; 2] {
        let axis =
            |neg: Keys, pos: Keys| i8::from(self.contains(pos)) - i8::from(self.contains(neg));
        [axis(Keys::LEFT, Keys::RIGHT), axis(Keys::UP, Keys::DOWN)]
    }

    pub fn from_axes(axes: [i8; 2]) -> Keys {
        let x = match axes[0].signum() {
            -1 => Keys::LEFT.0,
            1 => Keys::RIGHT.0,
            _ => 0,
        };
        let y = match axes[1].signum() {
            -1 => Keys::UP.0,
            1 => Keys::DOWN.0,
            _ => 0,
        };
        Keys(x | y)
    }
}

impl std::ops::BitOr for Keys {
    type Output = Keys;
    fn bitor(self, rhs: Keys) -> Keys {
        Keys(self.0 | rhs.0)
    }
}

/// Kinematic state sampled once per tick. `keys` is the input that
/// produced this frame (zero for the initial frame and for force-driven
/// agents).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameState {
    pub t: f64,
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub keys: Keys,
}

impl FrameState {
    pub fn at_rest(pos: [f64; 2]) -> Self {
        Self {
            t: 0.0,
            pos,
            vel: [0.0, 0.0],
            keys: Keys::NONE,
        }
    }

    pub fn speed(&self) -> f64 {
        self.vel[0].hypot(self.vel[1])
    }

    pub fn tick(&self, world: &WorldConfig) -> u64 {
        (self.t * f64::from(world.tick_rate)).round() as u64
    }
}

/// Advances one tick with an optional force per axis. `None` means the
/// axis is uninput and is damped.
pub fn step_with_force(
    state: &FrameState,
    force: [Option<f64>; 2],
    keys: Keys,
    world: &WorldConfig,
) -> FrameState {
    let dt = world.dt();
    let mut vel = state.vel;
    for (v, f) in vel.iter_mut().zip(force) {
        match f {
            Some(f) => *v += f * dt,
            None => *v *= world.damping,
        }
    }
    let speed = vel[0].hypot(vel[1]);
    if speed > world.max_speed {
        let s = world.max_speed / speed;
        vel = [vel[0] * s, vel[1] * s];
    }
    let mut pos = state.pos;
    for axis in 0..2 {
        pos[axis] += vel[axis] * dt;
        if pos[axis] <= 0.0 {
            pos[axis] = 0.0;
            if vel[axis] < 0.0 {
                vel[axis] = 0.0;
            }
        } else if pos[axis] >= world.field_size {
            pos[axis] = world.field_size;
            if vel[axis] > 0.0 {
                vel[axis] = 0.0;
            }
        }
    }
    let tick = state.tick(world) + 1;
    FrameState {
        t: tick as f64 / f64::from(world.tick_rate),
        pos,
        vel,
        keys,
    }
}

pub fn step_spotlight(state: &FrameState, keys: Keys, world: &WorldConfig) -> FrameState {
    let force = keys
        .axes()
        .map(|a| (a != 0).then(|| f64::from(a) * world.accel));
    step_with_force(state, force, keys, world)
}

/// Integrates a key trace from `start`. The result has `keys.len() + 1`
/// frames, the first being `start`.
pub fn replay_keys(start: FrameState, keys: &[Keys], world: &WorldConfig) -> Vec<FrameState> {
    let mut frames = Vec::with_capacity(keys.len() + 1);
    frames.push(start);
    let mut state = start;
    for &k in keys {
        state = step_spotlight(&state, k, world);
        frames.push(state);
    }
    frames
}

/// Index of the first frame that does not reproduce from its predecessor
/// and its logged keys, if any. Frame 0 is checked against `start`.
pub fn first_illegal_frame(
    frames: &[FrameState],
    start: &FrameState,
    world: &WorldConfig,
) -> Option<usize> {
    let first = frames.first()?;
    if first.pos != start.pos || first.vel != start.vel || !first.keys.is_valid() {
        return Some(0);
    }
    frames
        .windows(2)
        .position(|w| {
            let expect = step_spotlight(&w[0], w[1].keys, world);
            !w[1].keys.is_valid() || expect.pos != w[1].pos || expect.vel != w[1].vel
        })
        .map(|i| i + 1)
}
