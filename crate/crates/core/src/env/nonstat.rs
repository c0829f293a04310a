//! A drifting linear prediction task with binary features.
//!
//! Each step draws every feature i.i.d. Bernoulli(0.5). The reward is the
//! target weights' response to the current features plus Gaussian noise. The
//! target is ±1 on a fixed random subset of relevant features and 0 elsewhere;
//! every `drift_period` steps one relevant weight flips sign.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{FeatureVector, Transition};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonstatSpec {
    pub num_features: usize,
    pub num_relevant: usize,
    /// Steps between sign flips; `None` keeps the target fixed.
    pub drift_period: Option<usize>,
    pub noise_std: f64,
    pub gamma: f64,
}

impl Default for NonstatSpec {
    fn default() -> Self {
        // 18 features at p = 0.5 gives the 9 active features the comparison
        // step-size 0.5/9 is sized for.
        NonstatSpec {
            num_features: 18,
            num_relevant: 2,
            drift_period: Some(2000),
            noise_std: 2.0,
            gamma: 0.97,
        }
    }
}

impl NonstatSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_features == 0 {
            return Err(Error::config("num_features", "must be positive"));
        }
        if self.num_relevant > self.num_features {
            return Err(Error::config(
                "num_relevant",
                format!("{} exceeds num_features {}", self.num_relevant, self.num_features),
            ));
        }
        if self.drift_period == Some(0) {
            return Err(Error::config("drift_period", "must be positive"));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::config("noise_std", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config("gamma", format!("{} is outside [0, 1]", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NonstatStream {
    spec: NonstatSpec,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    relevant: Vec<usize>,
    target: Vec<f64>,
    phi: FeatureVector,
    steps: usize,
}

impl NonstatStream {
    pub fn new(spec: NonstatSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut relevant = sample(&mut rng, spec.num_features, spec.num_relevant).into_vec();
        relevant.sort_unstable();
        let mut target = vec![0.0; spec.num_features];
        for &i in &relevant {
            target[i] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        let noise = Normal::new(0.0, spec.noise_std)
            .map_err(|e| Error::config("noise_std", e.to_string()))?;
        let phi = Self::draw(&mut rng, spec.num_features);
        Ok(NonstatStream {
            spec,
            rng,
            noise,
            relevant,
            target,
            phi,
            steps: 0,
        })
    }

    fn draw(rng: &mut ChaCha8Rng, n: usize) -> FeatureVector {
        let active = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        FeatureVector::Binary { len: n, active }
    }

    pub fn spec(&self) -> &NonstatSpec {
        &self.spec
    }

    pub fn relevant_indices(&self) -> &[usize] {
        &self.relevant
    }

    pub fn irrelevant_indices(&self) -> Vec<usize> {
        (0..self.spec.num_features)
            .filter(|i| self.relevant.binary_search(i).is_err())
            .collect()
    }

    pub fn target_weights(&self) -> &[f64] {
        &self.target
    }

    /// Noise-free reward for `phi` under the current target.
    pub fn expected_reward(&self, phi: &FeatureVector) -> f64 {
        phi.nonzero().map(|(i, x)| self.target[i] * x).sum()
    }

    pub fn next_transition(&mut self) -> Transition {
        if let Some(period) = self.spec.drift_period {
            if self.steps > 0 && self.steps % period == 0 && !self.relevant.is_empty() {
                let i = self.relevant[self.rng.random_range(0..self.relevant.len())];
                self.target[i] = -self.target[i];
            }
        }
        self.steps += 1;
        let mut reward = self.expected_reward(&self.phi);
        if self.spec.noise_std > 0.0 {
            reward += self.noise.sample(&mut self.rng);
        }
        let next = Self::draw(&mut self.rng, self.spec.num_features);
        let phi = std::mem::replace(&mut self.phi, next.clone());
        Transition {
            phi,
            reward,
            phi_next: next,
            gamma_next: self.spec.gamma,
        }
    }
}

impl Iterator for NonstatStream {
    type Item = Transition;

    fn next(&mut self) -> Option<Transition> {
        Some(self.next_transition())
    }
}
