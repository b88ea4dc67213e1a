//! The Q-network policy and its DQN trainer.

mod dqn;
mod mlp;

pub use dqn::{train_dqn, DqnConfig, ReplayBuffer, TrainOutcome, Transition};
pub use mlp::{Layer, MlpPolicy, HIDDEN_WIDTH};
