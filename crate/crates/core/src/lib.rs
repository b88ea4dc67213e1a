//! Pure algorithmic core for explaining value-based RL policies on tabular
//! states.
//!
//! Everything here is `no_std` + `alloc`: environments, the Q-network and its
//! DQN trainer, interaction datasets, the gradient-boosted tree student with
//! exact TreeSHAP, the six attribution methods and the fidelity/stability
//! metrics. File formats, timing and orchestration live in the `xrl` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dataset;
pub mod env;
pub mod error;
pub mod eval;
pub mod explain;
pub mod math;
pub mod model;
pub mod policy;
pub mod rng;
pub mod trees;

pub use dataset::{Dataset, SAPair};
pub use env::{Env, EnvKind, EnvSpec, EnvState, StepOutcome};
pub use error::{Error, Result};
pub use explain::{Attribution, ExplainContext, ExplainerConfig, Method};
pub use model::{Differentiable, QFunction};
pub use policy::{DqnConfig, MlpPolicy};
pub use trees::{GbdtModel, RegressionTree, ShapVector};
