//! Learner state and step-size adapter configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on `‖w‖∞` beyond which a run is flagged diverged.
pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e8;

/// Default RMSprop stabilizer.
pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdapterKind {
    Fixed,
    TidbdAccumulate,
    TidbdReplace,
    Alphabound,
    Rmsprop,
}

impl AdapterKind {
    pub const ALL: [AdapterKind; 5] = [
        AdapterKind::Fixed,
        AdapterKind::TidbdAccumulate,
        AdapterKind::TidbdReplace,
        AdapterKind::Alphabound,
        AdapterKind::Rmsprop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdapterKind::Fixed => "fixed",
            AdapterKind::TidbdAccumulate => "tidbd-accumulate",
            AdapterKind::TidbdReplace => "tidbd-replace",
            AdapterKind::Alphabound => "alphabound",
            AdapterKind::Rmsprop => "rmsprop",
        }
    }

    pub fn is_tidbd(self) -> bool {
        matches!(self, AdapterKind::TidbdAccumulate | AdapterKind::TidbdReplace)
    }

    pub fn uses_theta(self) -> bool {
        self.is_tidbd()
    }

    pub fn uses_rho(self) -> bool {
        self == AdapterKind::Rmsprop
    }

    /// Default trace mode of this kind.
    pub fn trace_mode(self) -> TraceMode {
        match self {
            AdapterKind::TidbdReplace => TraceMode::Replace,
            _ => TraceMode::Accumulate,
        }
    }
}

impl fmt::Display for AdapterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdapterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AdapterKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("kind", format!("unknown adapter kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMode {
    Accumulate,
    Replace,
}

/// Parameters of one step-size strategy.
///
/// `theta` is read only by the TIDBD kinds and `rho`/`epsilon` only by RMSprop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub kind: AdapterKind,
    pub alpha0: f64,
    pub theta: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub divergence_bound: f64,
    /// Trace mode of the non-TIDBD kinds; the TIDBD kinds take it from `kind`.
    pub trace: TraceMode,
}

impl AdapterConfig {
    pub fn new(kind: AdapterKind, alpha0: f64, lambda: f64, gamma: f64) -> Self {
        AdapterConfig {
            kind,
            alpha0,
            theta: 0.0,
            rho: 0.0,
            epsilon: DEFAULT_EPSILON,
            lambda,
            gamma,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
            trace: kind.trace_mode(),
        }
    }

    pub fn fixed(alpha0: f64, lambda: f64, gamma: f64) -> Self {
        Self::new(AdapterKind::Fixed, alpha0, lambda, gamma)
    }

    pub fn tidbd(mode: TraceMode, alpha0: f64, theta: f64, lambda: f64, gamma: f64) -> Self {
        let kind = match mode {
            TraceMode::Accumulate => AdapterKind::TidbdAccumulate,
            TraceMode::Replace => AdapterKind::TidbdReplace,
        };
        AdapterConfig {
            theta,
            ..Self::new(kind, alpha0, lambda, gamma)
        }
    }

    pub fn alphabound(alpha0: f64, lambda: f64, gamma: f64) -> Self {
        Self::new(AdapterKind::Alphabound, alpha0, lambda, gamma)
    }

    pub fn rmsprop(alpha0: f64, rho: f64, lambda: f64, gamma: f64) -> Self {
        AdapterConfig {
            rho,
            ..Self::new(AdapterKind::Rmsprop, alpha0, lambda, gamma)
        }
    }

    pub fn with_trace(mut self, trace: TraceMode) -> Self {
        self.trace = trace;
        self
    }

    pub fn trace_mode(&self) -> TraceMode {
        match self.kind {
            AdapterKind::TidbdAccumulate => TraceMode::Accumulate,
            AdapterKind::TidbdReplace => TraceMode::Replace,
            _ => self.trace,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("{v} is not finite")))
            }
        };
        finite("alpha0", self.alpha0)?;
        // Ordinary TD sweeps include α₀ = 0; every adaptive kind needs α₀ > 0.
        if self.kind == AdapterKind::Fixed {
            if self.alpha0 < 0.0 {
                return Err(Error::config("alpha0", "must be >= 0"));
            }
        } else if self.alpha0 <= 0.0 {
            return Err(Error::config(
                "alpha0",
                format!("must be > 0 for {}", self.kind),
            ));
        }
        finite("theta", self.theta)?;
        if self.theta < 0.0 {
            return Err(Error::config("theta", "must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::config("rho", format!("{} is outside [0, 1)", self.rho)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("epsilon", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::config(
                "lambda",
                format!("{} is outside [0, 1]", self.lambda),
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config(
                "gamma",
                format!("{} is outside [0, 1]", self.gamma),
            ));
        }
        if !(self.divergence_bound > 0.0) {
            return Err(Error::config("divergence_bound", "must be > 0"));
        }
        Ok(())
    }
}

/// Weights, traces, log step-sizes, meta-trace and adapter auxiliaries.
///
/// All of `w`, `z`, `beta` and `h` share the same length. `aux` holds the
/// RMSprop second-moment accumulator (length n) or the AlphaBound scalar
/// bound (length 1); it is empty for the other kinds.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerState {
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub beta: Vec<f64>,
    pub h: Vec<f64>,
    pub aux: Vec<f64>,
}

impl LearnerState {
    /// Zero weights, traces and meta-trace; `β_i = ln α₀` for every weight.
    pub fn new(n: usize, cfg: &AdapterConfig) -> Self {
        let aux = match cfg.kind {
            AdapterKind::Rmsprop => vec![0.0; n],
            AdapterKind::Alphabound => vec![cfg.alpha0],
            _ => Vec::new(),
        };
        LearnerState {
            w: vec![0.0; n],
            z: vec![0.0; n],
            beta: vec![cfg.alpha0.ln(); n],
            h: vec![0.0; n],
            aux,
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `α_i = exp(β_i)`.
    pub fn alpha(&self, i: usize) -> f64 {
        self.beta[i].exp()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.beta.iter().map(|b| b.exp()).collect()
    }

    /// Clears the eligibility traces; everything else is kept.
    pub fn reset_episode(&mut self) {
        self.z.fill(0.0);
    }
}
