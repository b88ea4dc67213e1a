//! Deterministic, seedable tabular-state environments.
//!
//! All three environments are addressed by name through [`EnvKind`]:
//! `cartpole`, `flappybird-lite` and `synthetic-linear`.

mod cartpole;
mod flappy;
mod synthetic;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{input_err, Error, Result};

pub use cartpole::{CartPole, CARTPOLE_ANGLE_LIMIT, CARTPOLE_X_LIMIT};
pub use flappy::{FlappyBirdLite, FLAPPY_GAP, FLAPPY_HEIGHT, FLAPPY_PIPE_WIDTH};
pub use synthetic::{planted_truth_model, LinearModel, SyntheticLinear, PLANTED_WEIGHTS};

/// Static description of an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub state_dim: usize,
    pub action_count: usize,
    pub feature_names: Vec<String>,
    /// Masking baseline for the reference-padding metrics.
    pub reference_state: Vec<f64>,
}

impl EnvSpec {
    pub fn new(name: &str, feature_names: &[&str], action_count: usize) -> Result<Self> {
        let state_dim = feature_names.len();
        let spec = Self {
            name: name.to_string(),
            state_dim,
            action_count,
            feature_names: feature_names.iter().map(|s| s.to_string()).collect(),
            reference_state: vec![0.0; state_dim],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.state_dim == 0 {
            return Err(input_err!("state_dim must be positive"));
        }
        if self.action_count < 2 {
            return Err(input_err!("action_count must be at least 2"));
        }
        if self.feature_names.len() != self.state_dim {
            return Err(input_err!(
                "{} feature names for state_dim {}",
                self.feature_names.len(),
                self.state_dim
            ));
        }
        if self.reference_state.len() != self.state_dim {
            return Err(input_err!("reference_state has wrong length"));
        }
        Ok(())
    }

    pub fn check_state(&self, state: &[f64]) -> Result<()> {
        crate::error::check_dim("state", self.state_dim, state.len())?;
        if !crate::math::all_finite(state) {
            return Err(input_err!("state contains non-finite values"));
        }
        Ok(())
    }

    pub fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.action_count {
            return Err(input_err!(
                "action {action} out of range for {} actions",
                self.action_count
            ));
        }
        Ok(())
    }
}

/// A state vector in the owning environment's physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub values: Vec<f64>,
}

impl EnvState {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !crate::math::all_finite(&values) {
            return Err(input_err!("state contains non-finite values"));
        }
        Ok(Self { values })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: EnvState,
    pub reward: f64,
    pub terminal: bool,
}

/// A single-owner episodic environment.
pub trait Env {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode; the initial state is a pure function of `seed`.
    fn reset(&mut self, seed: u64) -> EnvState;

    fn step(&mut self, action: usize) -> Result<StepOutcome>;
}

/// Registry of the built-in environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvKind {
    CartPole,
    FlappyBirdLite,
    SyntheticLinear,
}

impl EnvKind {
    pub const ALL: [EnvKind; 3] = [
        EnvKind::CartPole,
        EnvKind::FlappyBirdLite,
        EnvKind::SyntheticLinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::CartPole => "cartpole",
            EnvKind::FlappyBirdLite => "flappybird-lite",
            EnvKind::SyntheticLinear => "synthetic-linear",
        }
    }

    pub fn spec(self) -> EnvSpec {
        match self {
            EnvKind::CartPole => cartpole::spec(),
            EnvKind::FlappyBirdLite => flappy::spec(),
            EnvKind::SyntheticLinear => synthetic::spec(),
        }
    }

    pub fn build(self) -> Box<dyn Env + Send> {
        match self {
            EnvKind::CartPole => Box::new(CartPole::new()),
            EnvKind::FlappyBirdLite => Box::new(FlappyBirdLite::new()),
            EnvKind::SyntheticLinear => Box::new(SyntheticLinear::new()),
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| input_err!("unknown environment '{s}' (expected cartpole, flappybird-lite or synthetic-linear)"))
    }
}
