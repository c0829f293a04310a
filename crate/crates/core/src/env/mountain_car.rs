//! Mountain-car dynamics and the prediction stream built on a fixed driving policy.
//!
//! The learner sees the car's position and velocity plus ten uniform random
//! inputs that carry no information about the return. Five tilings cover
//! (position, velocity) and one tiling covers each of the five disjoint pairs
//! of random inputs, all 10×10, followed by a bias feature: 1001 features,
//! 11 active per step.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::policy::Policy;
use super::tiles::{tile_code, uniform_tilings, TileCoderConfig, Tiling};
use crate::error::Result;
use crate::types::{FeatureVector, Transition};

pub const POSITION_MIN: f64 = -1.2;
pub const POSITION_MAX: f64 = 0.6;
pub const VELOCITY_MIN: f64 = -0.07;
pub const VELOCITY_MAX: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const START_POSITION: f64 = -0.5;

pub const NUM_RANDOM_INPUTS: usize = 10;
pub const RELEVANT_TILINGS: usize = 5;
pub const TILES_PER_DIM: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MountainCarState {
    pub position: f64,
    pub velocity: f64,
}

impl MountainCarState {
    pub const START: MountainCarState = MountainCarState {
        position: START_POSITION,
        velocity: 0.0,
    };

    pub fn in_bounds(&self) -> bool {
        (POSITION_MIN..=POSITION_MAX).contains(&self.position)
            && (VELOCITY_MIN..=VELOCITY_MAX).contains(&self.velocity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Throttle {
    Reverse,
    Coast,
    Forward,
}

impl Throttle {
    pub const ALL: [Throttle; 3] = [Throttle::Reverse, Throttle::Coast, Throttle::Forward];

    pub fn force(self) -> f64 {
        match self {
            Throttle::Reverse => -1.0,
            Throttle::Coast => 0.0,
            Throttle::Forward => 1.0,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// One step of the standard dynamics: `(next state, reward, terminal)`.
///
/// The reward is −1 on every step; the episode ends once the position reaches 0.5.
pub fn mountain_car_step(
    state: MountainCarState,
    action: Throttle,
) -> (MountainCarState, f64, bool) {
    let velocity = (state.velocity + 0.001 * action.force() - 0.0025 * (3.0 * state.position).cos())
        .clamp(VELOCITY_MIN, VELOCITY_MAX);
    let mut next = MountainCarState {
        position: state.position + velocity,
        velocity,
    };
    if next.position <= POSITION_MIN {
        next.position = POSITION_MIN;
        next.velocity = 0.0;
    }
    next.position = next.position.min(POSITION_MAX);
    let terminal = next.position >= GOAL_POSITION;
    (next, -1.0, terminal)
}

/// Length of one episode from `start` under `policy`, capped at `max_steps`.
pub fn episode_length(policy: &Policy, start: MountainCarState, max_steps: usize) -> usize {
    let mut s = start;
    for t in 1..=max_steps {
        let (next, _, terminal) = mountain_car_step(s, policy.act(s));
        if terminal {
            return t;
        }
        s = next;
    }
    max_steps
}

/// Mean episode length from the start state over `episodes` episodes.
pub fn evaluate_policy(policy: &Policy, episodes: usize, max_steps: usize) -> f64 {
    let total: usize = (0..episodes)
        .map(|_| episode_length(policy, MountainCarState::START, max_steps))
        .sum();
    total as f64 / episodes.max(1) as f64
}

/// The 1001-feature layout over (position, velocity, r₀ … r₉).
pub fn prediction_tile_coder() -> TileCoderConfig {
    let mut ranges = vec![(POSITION_MIN, POSITION_MAX), (VELOCITY_MIN, VELOCITY_MAX)];
    ranges.extend(std::iter::repeat_n((0.0, 1.0), NUM_RANDOM_INPUTS));
    let mut tilings = uniform_tilings([0, 1], RELEVANT_TILINGS);
    tilings.extend((0..NUM_RANDOM_INPUTS / 2).map(|j| Tiling {
        inputs: [2 + 2 * j, 3 + 2 * j],
        offset: 0.0,
    }));
    TileCoderConfig::new(ranges, TILES_PER_DIM, tilings, true).expect("static layout is valid")
}

/// Features of the tilings over (position, velocity).
pub fn relevant_indices(coder: &TileCoderConfig) -> Vec<usize> {
    (0..RELEVANT_TILINGS).flat_map(|k| coder.tiling_indices(k)).collect()
}

/// Features of the tilings over the random inputs.
pub fn irrelevant_indices(coder: &TileCoderConfig) -> Vec<usize> {
    (RELEVANT_TILINGS..coder.num_tilings())
        .flat_map(|k| coder.tiling_indices(k))
        .collect()
}

/// Transitions observed while `policy` drives the car, restarting from the
/// start state after every goal.
#[derive(Clone, Debug)]
pub struct MountainCarStream {
    policy: Arc<Policy>,
    coder: TileCoderConfig,
    rng: ChaCha8Rng,
    car: MountainCarState,
    phi: FeatureVector,
    gamma: f64,
    episodes: usize,
}

impl MountainCarStream {
    pub fn new(policy: Arc<Policy>, gamma: f64, seed: u64) -> Self {
        let coder = prediction_tile_coder();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let car = MountainCarState::START;
        let phi = Self::encode(&coder, &mut rng, car);
        MountainCarStream {
            policy,
            coder,
            rng,
            car,
            phi,
            gamma,
            episodes: 0,
        }
    }

    fn encode(coder: &TileCoderConfig, rng: &mut ChaCha8Rng, car: MountainCarState) -> FeatureVector {
        let mut inputs = [0.0; 2 + NUM_RANDOM_INPUTS];
        inputs[0] = car.position;
        inputs[1] = car.velocity;
        for x in &mut inputs[2..] {
            *x = rng.random::<f64>();
        }
        tile_code(&inputs, coder).expect("input count matches layout")
    }

    pub fn coder(&self) -> &TileCoderConfig {
        &self.coder
    }

    pub fn num_features(&self) -> usize {
        self.coder.num_features()
    }

    pub fn relevant_indices(&self) -> Vec<usize> {
        relevant_indices(&self.coder)
    }

    pub fn irrelevant_indices(&self) -> Vec<usize> {
        irrelevant_indices(&self.coder)
    }

    pub fn car(&self) -> MountainCarState {
        self.car
    }

    pub fn episodes_completed(&self) -> usize {
        self.episodes
    }

    pub fn next_transition(&mut self) -> Result<Transition> {
        let action = self.policy.act(self.car);
        let (next, reward, terminal) = mountain_car_step(self.car, action);
        let phi_next = Self::encode(&self.coder, &mut self.rng, next);
        let gamma_next = if terminal { 0.0 } else { self.gamma };
        let phi = if terminal {
            self.episodes += 1;
            self.car = MountainCarState::START;
            let restart = Self::encode(&self.coder, &mut self.rng, self.car);
            std::mem::replace(&mut self.phi, restart)
        } else {
            self.car = next;
            std::mem::replace(&mut self.phi, phi_next.clone())
        };
        Transition::new(phi, reward, phi_next, gamma_next)
    }
}

impl Iterator for MountainCarStream {
    type Item = Transition;

    fn next(&mut self) -> Option<Transition> {
        Some(self.next_transition().expect("stream transitions are well formed"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dynamics_formula() {
        let (s, r, done) = mountain_car_step(MountainCarState::START, Throttle::Forward);
        let v = 0.001 - 0.0025 * (-1.5f64).cos();
        assert!((s.velocity - v).abs() < 1e-15);
        assert!((s.velocity - 0.0008232).abs() < 1e-7);
        assert!((s.position - (-0.4991768)).abs() < 1e-7);
        assert_eq!(r, -1.0);
        assert!(!done);
    }

    #[test]
    fn coasting_from_valley_bottom_never_finishes() {
        let bottom = MountainCarState {
            position: -std::f64::consts::FRAC_PI_6,
            velocity: 0.0,
        };
        let mut s = bottom;
        for _ in 0..10_000 {
            let (next, _, done) = mountain_car_step(s, Throttle::Coast);
            assert!(!done);
            assert!(next.in_bounds());
            s = next;
        }
    }

    #[test]
    fn left_wall_stops_the_car() {
        let s = MountainCarState {
            position: -1.19,
            velocity: -0.07,
        };
        let (next, _, _) = mountain_car_step(s, Throttle::Reverse);
        assert_eq!(next.position, POSITION_MIN);
        assert_eq!(next.velocity, 0.0);
    }

    #[test]
    fn layout_counts() {
        let coder = prediction_tile_coder();
        assert_eq!(coder.num_features(), 1001);
        assert_eq!(coder.num_tilings(), 10);
        let rel = relevant_indices(&coder);
        let irr = irrelevant_indices(&coder);
        assert_eq!(rel.len(), 500);
        assert_eq!(irr.len(), 500);
        let mut all: Vec<usize> = rel.iter().chain(&irr).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        assert_eq!(coder.bias_index(), Some(1000));
    }

    #[test]
    fn stream_shape_and_resets() {
        let policy = Arc::new(Policy::EnergyPumping);
        let mut stream = MountainCarStream::new(policy, 0.99, 5);
        let mut terminals = 0;
        let mut prev: Option<Transition> = None;
        for _ in 0..2_000 {
            let t = stream.next_transition().unwrap();
            assert_eq!(t.phi.len(), 1001);
            assert_eq!(t.phi.active_count(), 11);
            assert_eq!(t.reward, -1.0);
            if let Some(p) = &prev {
                if !p.is_terminal() {
                    assert_eq!(p.phi_next, t.phi);
                }
            }
            if t.is_terminal() {
                terminals += 1;
                assert_eq!(stream.car(), MountainCarState::START);
            } else {
                assert_eq!(t.gamma_next, 0.99);
            }
            prev = Some(t);
        }
        assert!(terminals > 0);
        assert_eq!(stream.episodes_completed(), terminals);
    }

    #[test]
    fn stream_is_reproducible() {
        let policy = Arc::new(Policy::EnergyPumping);
        let a: Vec<_> = MountainCarStream::new(policy.clone(), 0.99, 9).take(300).collect();
        let b: Vec<_> = MountainCarStream::new(policy.clone(), 0.99, 9).take(300).collect();
        let c: Vec<_> = MountainCarStream::new(policy, 0.99, 10).take(300).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
