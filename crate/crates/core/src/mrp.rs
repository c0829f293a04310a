use crate::error::{Error, Result};

const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// An enumerable Markov reward process under a fixed policy.
///
/// `transitions[s][s']` is `p(s' | s)` and `expected_reward[s]` the expected
/// immediate reward on leaving `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct MrpModel {
    transitions: Vec<Vec<f64>>,
    expected_reward: Vec<f64>,
    gamma: f64,
    start_state: usize,
}

impl MrpModel {
    pub fn new(
        transitions: Vec<Vec<f64>>,
        expected_reward: Vec<f64>,
        gamma: f64,
        start_state: usize,
    ) -> Result<Self> {
        let n = transitions.len();
        if n == 0 {
            return Err(Error::InvalidModel("no states".into()));
        }
        if expected_reward.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: expected_reward.len(),
            });
        }
        if start_state >= n {
            return Err(Error::InvalidModel(format!(
                "start state {start_state} out of range for {n} states"
            )));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidModel(format!("gamma {gamma} outside [0, 1]")));
        }
        for (s, row) in transitions.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            if let Some(p) = row.iter().find(|p| !(**p >= 0.0)) {
                return Err(Error::InvalidModel(format!(
                    "row {s} has negative or NaN probability {p}"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidModel(format!("row {s} sums to {sum}")));
            }
        }
        Ok(MrpModel {
            transitions,
            expected_reward,
            gamma,
            start_state,
        })
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.transitions[from][to]
    }

    pub fn expected_reward(&self) -> &[f64] {
        &self.expected_reward
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn start_state(&self) -> usize {
        self.start_state
    }

    /// `‖v − (r + γPv)‖∞`.
    pub fn bellman_residual(&self, v: &[f64]) -> f64 {
        self.transitions
            .iter()
            .zip(&self.expected_reward)
            .zip(v)
            .map(|((row, r), vs)| {
                let backup: f64 = row.iter().zip(v).map(|(p, x)| p * x).sum();
                (vs - (r + self.gamma * backup)).abs()
            })
            .fold(0.0, f64::max)
    }
}
