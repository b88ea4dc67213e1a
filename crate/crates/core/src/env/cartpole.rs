//! Classic cart-pole balancing with Euler-integrated dynamics.

use alloc::vec::Vec;

use super::{Env, EnvSpec, EnvState, StepOutcome};
use crate::error::{input_err, Result};
use crate::math::{abs, cos, sin};
use crate::rng::{rng_from_seed, uniform};

const GRAVITY: f64 = 9.8;
const CART_MASS: f64 = 1.0;
const POLE_MASS: f64 = 0.1;
const TOTAL_MASS: f64 = CART_MASS + POLE_MASS;
const HALF_LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = POLE_MASS * HALF_LENGTH;
const FORCE: f64 = 10.0;
const TAU: f64 = 0.02;

pub const CARTPOLE_X_LIMIT: f64 = 2.4;
/// 12 degrees in radians.
pub const CARTPOLE_ANGLE_LIMIT: f64 = 12.0 * 2.0 * core::f64::consts::PI / 360.0;

pub(super) fn spec() -> EnvSpec {
    EnvSpec::new(
        "cartpole",
        &["cart_position", "cart_velocity", "pole_angle", "pole_angular_velocity"],
        2,
    )
    .expect("static spec")
}

/// State is `[x, x_dot, theta, theta_dot]`; action 0 pushes left, 1 right.
#[derive(Debug, Clone)]
pub struct CartPole {
    spec: EnvSpec,
    state: [f64; 4],
    done: bool,
}

impl CartPole {
    pub fn new() -> Self {
        Self { spec: spec(), state: [0.0; 4], done: false }
    }

    /// Places the system in an arbitrary state, clearing the terminal flag.
    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.done = false;
    }

    /// One Euler step of the dynamics without bookkeeping.
    pub fn integrate(state: [f64; 4], action: usize) -> [f64; 4] {
        Self::integrate_force(state, if action == 1 { FORCE } else { -FORCE })
    }

    /// Euler step under an arbitrary horizontal force in newtons.
    pub fn integrate_force(state: [f64; 4], force: f64) -> [f64; 4] {
        let [x, x_dot, theta, theta_dot] = state;
        let (sin_t, cos_t) = (sin(theta), cos(theta));
        let temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin_t) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin_t - cos_t * temp)
            / (HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos_t * cos_t / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_t / TOTAL_MASS;
        [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ]
    }

    pub fn is_out_of_bounds(state: &[f64; 4]) -> bool {
        abs(state[0]) > CARTPOLE_X_LIMIT || abs(state[2]) > CARTPOLE_ANGLE_LIMIT
    }
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl Env for CartPole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> EnvState {
        let mut rng = rng_from_seed(seed);
        for v in &mut self.state {
            *v = uniform(&mut rng, -0.05, 0.05);
        }
        self.done = false;
        EnvState { values: self.state.to_vec() }
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        self.spec.check_action(action)?;
        if self.done {
            return Err(input_err!("step called on a terminated episode"));
        }
        self.state = Self::integrate(self.state, action);
        let terminal = Self::is_out_of_bounds(&self.state);
        self.done = terminal;
        let values: Vec<f64> = self.state.to_vec();
        Ok(StepOutcome {
            next_state: EnvState::new(values)?,
            reward: if terminal { 0.0 } else { 1.0 },
            terminal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_is_deterministic_and_in_range() {
        let mut env = CartPole::new();
        let a = env.reset(7);
        let b = env.reset(7);
        assert_eq!(a, b);
        for seed in 0..50 {
            let s = env.reset(seed);
            assert!(s.values.iter().all(|v| (-0.05..=0.05).contains(v)));
        }
        assert_ne!(env.reset(1), env.reset(2));
    }

    #[test]
    fn one_euler_step_from_rest() {
        // Hand integration: temp = 10/1.1, theta_acc = -temp / (0.5 (4/3 - 0.1/1.1)),
        // x_acc = temp - 0.05 theta_acc / 1.1; velocities pick up tau * acc.
        let temp = 10.0 / 1.1;
        let theta_acc = -temp / (0.5 * (4.0 / 3.0 - 0.1 / 1.1));
        let x_acc = temp - 0.05 * theta_acc / 1.1;
        let next = CartPole::integrate([0.0; 4], 1);
        assert_eq!(next[0], 0.0);
        assert!((next[1] - 0.02 * x_acc).abs() < 1e-15);
        assert_eq!(next[2], 0.0);
        assert!((next[3] - 0.02 * theta_acc).abs() < 1e-15);
        assert!((next[1] - 0.19512).abs() < 1e-5);
        assert!((next[3] + 0.29268).abs() < 1e-5);
    }

    #[test]
    fn out_of_bounds_cart_terminates() {
        let mut env = CartPole::new();
        for action in 0..2 {
            env.set_state([2.5, 0.0, 0.0, 0.0]);
            let out = env.step(action).unwrap();
            assert!(out.terminal);
            assert_eq!(out.reward, 0.0);
        }
    }

    #[test]
    fn invalid_action_and_stepping_after_terminal() {
        let mut env = CartPole::new();
        env.reset(0);
        assert!(env.step(2).is_err());
        env.set_state([2.5, 0.0, 0.0, 0.0]);
        env.step(0).unwrap();
        assert!(env.step(0).is_err());
    }

    #[test]
    fn zero_angle_without_force_stays_put() {
        let mut state = [0.3, 0.0, 0.0, 0.0];
        for _ in 0..1000 {
            state = CartPole::integrate_force(state, 0.0);
        }
        assert_eq!(state, [0.3, 0.0, 0.0, 0.0]);
    }
}
