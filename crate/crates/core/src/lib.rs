//! Linear temporal-difference prediction with per-weight step-size adaptation.
//!
//! The [`adapters`] module holds the learning step for ordinary TD(λ), TIDBD
//! with accumulating or replacing traces, AlphaBound and RMSprop. The
//! [`env`] module provides the gridworld, mountain-car and drifting-regression
//! streams; [`eval`] solves exact values, scores predictions and runs sweeps.

pub mod adapters;
pub mod env;
pub mod error;
pub mod eval;
pub mod mrp;
pub mod state;
pub mod types;

pub use adapters::{Learner, StepOutcome};
pub use error::{Error, Result};
pub use mrp::MrpModel;
pub use state::{AdapterConfig, AdapterKind, LearnerState, TraceMode};
pub use types::{dot, FeatureVector, Transition};
