//! Derivative-free minimizers: golden-ratio bracketing, Brent's method and
//! Powell's direction-set method.
//!
//! The `_ctl` variants take objectives returning `Option<f64>`; `None`
//! stops the search and the best point so far is reported. NaN objective
//! values are treated as +∞.

mod bracket;
mod brent;
mod powell;

pub use bracket::{bracket_minimum, Bracket, BracketOutcome};
pub use brent::{brent_min, minimize_bounded, minimize_bounded_ctl};
pub use powell::{powell_min, powell_min_ctl, powell_min_monitored, PowellOptions};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport<X> {
    pub argmin: X,
    pub min_value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// The objective stopped the search early.
    pub aborted: bool,
}

impl SearchReport<f64> {
    fn aborted(x: f64, fx: f64, evaluations: usize, iterations: usize) -> Self {
        Self {
            argmin: x,
            min_value: fx,
            evaluations,
            iterations,
            converged: false,
            aborted: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("step must be finite and positive, got {0}")]
    InvalidStep(f64),
    #[error("tolerance must be finite and positive, got {0}")]
    InvalidTolerance(f64),
    #[error("start {x0} outside bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64, x0: f64 },
    #[error("({a}, {b}, {c}) is not a bracket")]
    InvalidBracket { a: f64, b: f64, c: f64 },
    #[error("empty start point")]
    EmptyStart,
    #[error("expected {expected} bounds, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
