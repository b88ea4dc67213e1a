//! Scoring interfaces shared by policies, planted-truth models and students.

use alloc::vec::Vec;

use crate::error::Result;
use crate::math::argmax;

/// Anything that maps a state to one score per action.
pub trait QFunction {
    fn state_dim(&self) -> usize;

    fn action_count(&self) -> usize;

    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>>;

    /// Argmax action, ties broken by lowest index.
    fn greedy_action(&self, state: &[f64]) -> Result<usize> {
        Ok(argmax(&self.q_values(state)?))
    }
}

/// A scorer with exact gradients of each action score w.r.t. the input.
pub trait Differentiable: QFunction {
    fn input_gradient(&self, state: &[f64], action: usize) -> Result<Vec<f64>>;
}

impl<T: QFunction + ?Sized> QFunction for &T {
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }

    fn action_count(&self) -> usize {
        (**self).action_count()
    }

    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        (**self).q_values(state)
    }
}

impl<T: Differentiable + ?Sized> Differentiable for &T {
    fn input_gradient(&self, state: &[f64], action: usize) -> Result<Vec<f64>> {
        (**self).input_gradient(state, action)
    }
}
