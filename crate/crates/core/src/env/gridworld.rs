//! The 5×5 gridworld under the equiprobable random policy.
//!
//! Leaving the grid keeps the agent in place with reward −1. Every action
//! from A teleports to A′ with reward 10 and every action from B to B′ with
//! reward 5. All other moves pay 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::mrp::MrpModel;
use crate::types::{FeatureVector, Transition};

pub const WIDTH: usize = 5;
pub const HEIGHT: usize = 5;
pub const NUM_STATES: usize = WIDTH * HEIGHT;

pub const A: (usize, usize) = (0, 1);
pub const A_PRIME: (usize, usize) = (4, 1);
pub const B: (usize, usize) = (0, 3);
pub const B_PRIME: (usize, usize) = (2, 3);
pub const REWARD_A: f64 = 10.0;
pub const REWARD_B: f64 = 5.0;
pub const REWARD_OFF_GRID: f64 = -1.0;
/// Top-left corner.
pub const START: (usize, usize) = (0, 0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    North,
    South,
    East,
    West,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::North, Action::South, Action::East, Action::West];
}

pub fn state_index((row, col): (usize, usize)) -> usize {
    row * WIDTH + col
}

pub fn cell(index: usize) -> (usize, usize) {
    (index / WIDTH, index % WIDTH)
}

/// Deterministic dynamics: `(next state, reward)`.
pub fn step(state: usize, action: Action) -> (usize, f64) {
    let (row, col) = cell(state);
    if (row, col) == A {
        return (state_index(A_PRIME), REWARD_A);
    }
    if (row, col) == B {
        return (state_index(B_PRIME), REWARD_B);
    }
    let target = match action {
        Action::North => row.checked_sub(1).map(|r| (r, col)),
        Action::South => (row + 1 < HEIGHT).then_some((row + 1, col)),
        Action::East => (col + 1 < WIDTH).then_some((row, col + 1)),
        Action::West => col.checked_sub(1).map(|c| (row, c)),
    };
    match target {
        Some(next) => (state_index(next), 0.0),
        None => (state, REWARD_OFF_GRID),
    }
}

/// The MRP induced by the equiprobable policy with discount `gamma`.
pub fn gridworld_mrp(gamma: f64) -> Result<MrpModel> {
    let mut p = vec![vec![0.0; NUM_STATES]; NUM_STATES];
    let mut r = vec![0.0; NUM_STATES];
    for s in 0..NUM_STATES {
        for a in Action::ALL {
            let (next, reward) = step(s, a);
            p[s][next] += 0.25;
            r[s] += 0.25 * reward;
        }
    }
    MrpModel::new(p, r, gamma, state_index(START))
}

/// Tabular (one-hot) features of every state.
pub fn tabular_features() -> Vec<FeatureVector> {
    (0..NUM_STATES)
        .map(|s| FeatureVector::one_hot(NUM_STATES, s).expect("index in range"))
        .collect()
}

/// An endless on-policy trajectory from the start state.
#[derive(Clone, Debug)]
pub struct GridworldStream {
    rng: ChaCha8Rng,
    state: usize,
    gamma: f64,
}

impl GridworldStream {
    pub fn new(gamma: f64, seed: u64) -> Self {
        GridworldStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: state_index(START),
            gamma,
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Samples one action and returns `(state, reward, next_state)`.
    pub fn sample(&mut self) -> (usize, f64, usize) {
        let action = Action::ALL[self.rng.random_range(0..4)];
        let from = self.state;
        let (next, reward) = step(from, action);
        self.state = next;
        (from, reward, next)
    }
}

impl Iterator for GridworldStream {
    type Item = Transition;

    fn next(&mut self) -> Option<Transition> {
        let (from, reward, to) = self.sample();
        Some(Transition {
            phi: FeatureVector::one_hot(NUM_STATES, from).expect("index in range"),
            reward,
            phi_next: FeatureVector::one_hot(NUM_STATES, to).expect("index in range"),
            gamma_next: self.gamma,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_cells_teleport() {
        let mut stream = GridworldStream::new(0.99, 1);
        for a in Action::ALL {
            assert_eq!(step(state_index(A), a), (state_index(A_PRIME), 10.0));
            assert_eq!(step(state_index(B), a), (state_index(B_PRIME), 5.0));
        }
        // Drive the sampler until it sits on A and check the sampled move.
        let mut seen = 0;
        for _ in 0..20_000 {
            let (from, reward, to) = stream.sample();
            if from == state_index(A) {
                assert_eq!((reward, to), (10.0, state_index(A_PRIME)));
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn corner_expected_reward() {
        // North and West leave the grid from the top-left corner.
        let expected: f64 = Action::ALL
            .iter()
            .map(|&a| 0.25 * step(0, a).1)
            .sum();
        assert_eq!(expected, -0.5);
        let mrp = gridworld_mrp(0.99).unwrap();
        assert_eq!(mrp.expected_reward()[0], -0.5);
        assert_eq!(mrp.start_state(), 0);
    }

    #[test]
    fn exhaustive_reward_table() {
        for s in 0..NUM_STATES {
            let (row, col) = cell(s);
            for a in Action::ALL {
                let (next, reward) = step(s, a);
                let (nr, nc) = cell(next);
                if (row, col) == A {
                    assert_eq!((next, reward), (state_index(A_PRIME), 10.0));
                } else if (row, col) == B {
                    assert_eq!((next, reward), (state_index(B_PRIME), 5.0));
                } else {
                    let off = match a {
                        Action::North => row == 0,
                        Action::South => row == HEIGHT - 1,
                        Action::East => col == WIDTH - 1,
                        Action::West => col == 0,
                    };
                    if off {
                        assert_eq!((next, reward), (s, -1.0));
                    } else {
                        assert_eq!(reward, 0.0);
                        assert_eq!(row.abs_diff(nr) + col.abs_diff(nc), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn rows_are_stochastic() {
        let mrp = gridworld_mrp(0.9).unwrap();
        assert_eq!(mrp.num_states(), 25);
        for row in mrp.transitions() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        assert_eq!(mrp.probability(state_index(A), state_index(A_PRIME)), 1.0);
        assert_eq!(mrp.probability(state_index(B), state_index(B_PRIME)), 1.0);
    }

    #[test]
    fn stream_is_reproducible() {
        let a: Vec<_> = GridworldStream::new(0.99, 42).take(500).collect();
        let b: Vec<_> = GridworldStream::new(0.99, 42).take(500).collect();
        assert_eq!(a, b);
        assert_eq!(a[0].phi, FeatureVector::one_hot(25, 0).unwrap());
        assert!(a.windows(2).all(|w| w[0].phi_next == w[1].phi));
    }
}
