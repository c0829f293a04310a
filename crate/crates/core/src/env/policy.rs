//! The mountain-car behaviour policy: a greedy SARSA(0) agent, or a scripted
//! energy-pumping controller when training falls short.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mountain_car::{
    evaluate_policy, mountain_car_step, MountainCarState, Throttle, POSITION_MAX, POSITION_MIN,
    VELOCITY_MAX, VELOCITY_MIN,
};
use super::tiles::TileCoderConfig;
use crate::error::{Error, Result};

/// Required mean episode length of a trained policy.
pub const TARGET_EPISODE_LENGTH: f64 = 160.0;
pub const EVALUATION_EPISODES: usize = 100;
pub const EVALUATION_MAX_STEPS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    Greedy(GreedyQ),
    /// Push in the direction of travel; forward when stopped.
    EnergyPumping,
}

impl Policy {
    pub fn act(&self, s: MountainCarState) -> Throttle {
        match self {
            Policy::Greedy(q) => q.greedy(s),
            Policy::EnergyPumping => {
                if s.velocity < 0.0 {
                    Throttle::Reverse
                } else {
                    Throttle::Forward
                }
            }
        }
    }

    /// Flat little-endian encoding: a `u64` count followed by that many `f64`
    /// action-value weights. A count of zero encodes the scripted policy.
    pub fn to_bytes(&self) -> Vec<u8> {
        let weights: &[f64] = match self {
            Policy::Greedy(q) => &q.weights,
            Policy::EnergyPumping => &[],
        };
        let mut out = Vec::with_capacity(8 * (weights.len() + 1));
        out.extend_from_slice(&(weights.len() as u64).to_le_bytes());
        for w in weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (head, body) = bytes
            .split_first_chunk::<8>()
            .ok_or_else(|| Error::InvalidPolicyFile("missing length prefix".into()))?;
        let count = u64::from_le_bytes(*head) as usize;
        if body.len() != count.saturating_mul(8) {
            return Err(Error::InvalidPolicyFile(format!(
                "length prefix says {count} values but {} bytes follow",
                body.len()
            )));
        }
        if count == 0 {
            return Ok(Policy::EnergyPumping);
        }
        let weights: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(Policy::Greedy(GreedyQ::from_weights(weights)?))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

/// Tile-coded action values over (position, velocity), acted on greedily.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyQ {
    coder: TileCoderConfig,
    weights: Vec<f64>,
}

impl GreedyQ {
    pub const NUM_TILINGS: usize = 8;
    pub const TILES_PER_DIM: usize = 8;

    fn coder() -> TileCoderConfig {
        TileCoderConfig::uniform(
            [(POSITION_MIN, POSITION_MAX), (VELOCITY_MIN, VELOCITY_MAX)],
            Self::NUM_TILINGS,
            Self::TILES_PER_DIM,
            false,
        )
        .expect("static layout is valid")
    }

    pub fn new() -> Self {
        let coder = Self::coder();
        let n = coder.num_features() * Throttle::ALL.len();
        GreedyQ {
            coder,
            weights: vec![0.0; n],
        }
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let mut q = Self::new();
        if weights.len() != q.weights.len() {
            return Err(Error::InvalidPolicyFile(format!(
                "expected {} weights, found {}",
                q.weights.len(),
                weights.len()
            )));
        }
        q.weights = weights;
        Ok(q)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn tiles(&self, s: MountainCarState, out: &mut Vec<usize>) {
        self.coder.active_indices(&[s.position, s.velocity], out);
    }

    fn value_of(&self, tiles: &[usize], a: Throttle) -> f64 {
        let base = a.index() * self.coder.num_features();
        tiles.iter().map(|&i| self.weights[base + i]).sum()
    }

    fn greedy_from_tiles(&self, tiles: &[usize]) -> Throttle {
        let mut best = Throttle::ALL[0];
        let mut best_value = f64::NEG_INFINITY;
        for a in Throttle::ALL {
            let v = self.value_of(tiles, a);
            if v > best_value {
                best = a;
                best_value = v;
            }
        }
        best
    }

    pub fn value(&self, s: MountainCarState, a: Throttle) -> f64 {
        let mut tiles = Vec::new();
        self.tiles(s, &mut tiles);
        self.value_of(&tiles, a)
    }

    /// Highest-valued action; ties go to the lowest action index.
    pub fn greedy(&self, s: MountainCarState) -> Throttle {
        let mut tiles = Vec::with_capacity(Self::NUM_TILINGS);
        self.tiles(s, &mut tiles);
        self.greedy_from_tiles(&tiles)
    }
}

impl Default for GreedyQ {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SarsaSettings {
    pub gamma: f64,
    pub step_size: f64,
    pub epsilon: f64,
    pub epsilon_decay: f64,
    pub max_episodes: usize,
    pub max_episode_steps: usize,
    pub evaluate_every: usize,
}

impl Default for SarsaSettings {
    fn default() -> Self {
        SarsaSettings {
            gamma: 0.99,
            step_size: 0.1 / GreedyQ::NUM_TILINGS as f64,
            epsilon: 0.1,
            epsilon_decay: 0.995,
            max_episodes: 5000,
            max_episode_steps: 10_000,
            evaluate_every: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingReport {
    pub policy: Policy,
    pub episodes: usize,
    pub mean_episode_length: f64,
    pub fell_back: bool,
}

fn epsilon_greedy(q: &GreedyQ, tiles: &[usize], epsilon: f64, rng: &mut ChaCha8Rng) -> Throttle {
    if rng.random::<f64>() < epsilon {
        Throttle::ALL[rng.random_range(0..Throttle::ALL.len())]
    } else {
        q.greedy_from_tiles(tiles)
    }
}

/// Trains a SARSA(0) agent from the start state until its greedy policy
/// reaches the goal in at most 160 steps on average.
///
/// If the episode budget runs out first, the scripted energy-pumping policy
/// is returned instead and a warning is logged.
pub fn train_sarsa_policy_with(seed: u64, settings: SarsaSettings) -> TrainingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = GreedyQ::new();
    let nf = q.coder.num_features();
    let mut tiles = Vec::with_capacity(GreedyQ::NUM_TILINGS);
    let mut next_tiles = Vec::with_capacity(GreedyQ::NUM_TILINGS);
    let mut epsilon = settings.epsilon;
    let mut best = f64::INFINITY;

    for episode in 1..=settings.max_episodes {
        let mut s = MountainCarState::START;
        q.tiles(s, &mut tiles);
        let mut a = epsilon_greedy(&q, &tiles, epsilon, &mut rng);
        for _ in 0..settings.max_episode_steps {
            let (next, reward, terminal) = mountain_car_step(s, a);
            let mut target = reward;
            let mut next_a = a;
            if !terminal {
                q.tiles(next, &mut next_tiles);
                next_a = epsilon_greedy(&q, &next_tiles, epsilon, &mut rng);
                target += settings.gamma * q.value_of(&next_tiles, next_a);
            }
            let delta = target - q.value_of(&tiles, a);
            let base = a.index() * nf;
            for &i in &tiles {
                q.weights[base + i] += settings.step_size * delta;
            }
            if terminal {
                break;
            }
            s = next;
            a = next_a;
            std::mem::swap(&mut tiles, &mut next_tiles);
        }
        epsilon *= settings.epsilon_decay;

        if episode % settings.evaluate_every == 0 {
            let policy = Policy::Greedy(q.clone());
            let mean = evaluate_policy(&policy, EVALUATION_EPISODES, EVALUATION_MAX_STEPS);
            best = best.min(mean);
            if mean <= TARGET_EPISODE_LENGTH {
                return TrainingReport {
                    policy,
                    episodes: episode,
                    mean_episode_length: mean,
                    fell_back: false,
                };
            }
        }
    }

    log::warn!(
        "SARSA training did not reach {TARGET_EPISODE_LENGTH} steps in {} episodes (best {best}); \
         falling back to the energy-pumping policy",
        settings.max_episodes
    );
    let policy = Policy::EnergyPumping;
    let mean = evaluate_policy(&policy, EVALUATION_EPISODES, EVALUATION_MAX_STEPS);
    TrainingReport {
        policy,
        episodes: settings.max_episodes,
        mean_episode_length: mean,
        fell_back: true,
    }
}

pub fn train_sarsa_policy(seed: u64, gamma: f64) -> Policy {
    train_sarsa_policy_with(
        seed,
        SarsaSettings {
            gamma,
            ..SarsaSettings::default()
        },
    )
    .policy
}
