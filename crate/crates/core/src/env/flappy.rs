//! A small integer-dynamics FlappyBird clone with a 12-feature state.
//!
//! The bird sits at horizontal position 0. Features, in order: bird height,
//! bird vertical velocity, then `(dx, gap_top, gap_bottom)` for the next three
//! pipes, then steps since the last flap. Action 0 does nothing, 1 flaps.
//! Not modelled on any particular public implementation.

use alloc::vec::Vec;

use rand::Rng;

use super::{Env, EnvSpec, EnvState, StepOutcome};
use crate::error::{input_err, Result};
use crate::rng::{rng_from_seed, SeededRng};

pub const FLAPPY_HEIGHT: f64 = 100.0;
pub const FLAPPY_PIPE_WIDTH: f64 = 6.0;
pub const FLAPPY_GAP: f64 = 35.0;
const PIPE_SPACING: f64 = 45.0;
const FIRST_PIPE_DX: f64 = 30.0;
const PIPE_SPEED: f64 = 3.0;
const GRAVITY: f64 = 1.0;
const FLAP_VELOCITY: f64 = 5.0;
const START_HEIGHT: f64 = 50.0;
/// Gap bottoms are drawn uniformly from this inclusive integer range.
const GAP_BOTTOM_RANGE: (i64, i64) = (15, 50);

pub(super) fn spec() -> EnvSpec {
    EnvSpec::new(
        "flappybird-lite",
        &[
            "bird_y",
            "bird_velocity",
            "pipe1_dx",
            "pipe1_gap_top",
            "pipe1_gap_bottom",
            "pipe2_dx",
            "pipe2_gap_top",
            "pipe2_gap_bottom",
            "pipe3_dx",
            "pipe3_gap_top",
            "pipe3_gap_bottom",
            "steps_since_flap",
        ],
        2,
    )
    .expect("static spec")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pipe {
    pub dx: f64,
    pub gap_top: f64,
    pub gap_bottom: f64,
}

#[derive(Debug, Clone)]
pub struct FlappyBirdLite {
    spec: EnvSpec,
    rng: SeededRng,
    y: f64,
    velocity: f64,
    since_flap: f64,
    pipes: Vec<Pipe>,
    done: bool,
}

impl FlappyBirdLite {
    pub fn new() -> Self {
        let mut env = Self {
            spec: spec(),
            rng: rng_from_seed(0),
            y: START_HEIGHT,
            velocity: 0.0,
            since_flap: 0.0,
            pipes: Vec::new(),
            done: false,
        };
        env.reset(0);
        env
    }

    /// Overrides the full dynamic state; pipe generation continues from the
    /// current RNG.
    pub fn set_state(&mut self, y: f64, velocity: f64, pipes: [Pipe; 3], since_flap: f64) {
        self.y = y;
        self.velocity = velocity;
        self.pipes = pipes.to_vec();
        self.since_flap = since_flap;
        self.done = false;
    }

    fn random_pipe(&mut self, dx: f64) -> Pipe {
        let bottom = self.rng.random_range(GAP_BOTTOM_RANGE.0..=GAP_BOTTOM_RANGE.1) as f64;
        Pipe { dx, gap_top: bottom + FLAPPY_GAP, gap_bottom: bottom }
    }

    fn observe(&self) -> EnvState {
        let mut values = Vec::with_capacity(12);
        values.push(self.y);
        values.push(self.velocity);
        for pipe in self.pipes.iter().take(3) {
            values.extend_from_slice(&[pipe.dx, pipe.gap_top, pipe.gap_bottom]);
        }
        values.push(self.since_flap);
        EnvState { values }
    }

    fn collided(&self) -> bool {
        if self.y <= 0.0 || self.y >= FLAPPY_HEIGHT {
            return true;
        }
        self.pipes.iter().any(|p| {
            let overlaps = p.dx <= 0.0 && 0.0 < p.dx + FLAPPY_PIPE_WIDTH;
            overlaps && (self.y >= p.gap_top || self.y <= p.gap_bottom)
        })
    }
}

impl Default for FlappyBirdLite {
    fn default() -> Self {
        Self::new()
    }
}

impl Env for FlappyBirdLite {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> EnvState {
        self.rng = rng_from_seed(seed);
        self.y = START_HEIGHT;
        self.velocity = 0.0;
        self.since_flap = 0.0;
        self.done = false;
        self.pipes.clear();
        for i in 0..3 {
            let pipe = self.random_pipe(FIRST_PIPE_DX + PIPE_SPACING * i as f64);
            self.pipes.push(pipe);
        }
        self.observe()
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        self.spec.check_action(action)?;
        if self.done {
            return Err(input_err!("step called on a terminated episode"));
        }
        if action == 1 {
            self.velocity = FLAP_VELOCITY;
            self.since_flap = 0.0;
        } else {
            self.velocity -= GRAVITY;
            self.since_flap += 1.0;
        }
        self.y += self.velocity;
        for pipe in &mut self.pipes {
            pipe.dx -= PIPE_SPEED;
        }
        let terminal = self.collided();
        self.pipes.retain(|p| p.dx + FLAPPY_PIPE_WIDTH > 0.0);
        while self.pipes.len() < 3 {
            let last = self.pipes.last().map_or(FIRST_PIPE_DX - PIPE_SPACING, |p| p.dx);
            let pipe = self.random_pipe(last + PIPE_SPACING);
            self.pipes.push(pipe);
        }
        self.done = terminal;
        Ok(StepOutcome {
            next_state: self.observe(),
            reward: if terminal { 0.0 } else { 1.0 },
            terminal,
        })
    }
}
