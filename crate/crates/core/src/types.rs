//! Feature vectors and observed transitions.

use crate::error::{Error, Result};

/// An observation representation φ(s).
///
/// Binary vectors store only their active indices (sorted, unique); every
/// active entry has value 1. Both forms evaluate identically under [`dot`].
#[derive(Clone, Debug, PartialEq)]
pub enum FeatureVector {
    Dense(Vec<f64>),
    Binary { len: usize, active: Vec<usize> },
}

impl FeatureVector {
    pub fn dense(values: Vec<f64>) -> Self {
        FeatureVector::Dense(values)
    }

    /// Builds a binary vector of length `len` with ones at `active`.
    pub fn binary(len: usize, mut active: Vec<usize>) -> Result<Self> {
        active.sort_unstable();
        active.dedup();
        if let Some(&last) = active.last() {
            if last >= len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    actual: last + 1,
                });
            }
        }
        Ok(FeatureVector::Binary { len, active })
    }

    pub fn one_hot(len: usize, index: usize) -> Result<Self> {
        Self::binary(len, vec![index])
    }

    pub fn zeros(len: usize) -> Self {
        FeatureVector::Binary {
            len,
            active: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.len(),
            FeatureVector::Binary { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> f64 {
        match self {
            FeatureVector::Dense(v) => v[i],
            FeatureVector::Binary { active, .. } => {
                if active.binary_search(&i).is_ok() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Number of non-zero entries.
    pub fn active_count(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.iter().filter(|x| **x != 0.0).count(),
            FeatureVector::Binary { active, .. } => active.len(),
        }
    }

    /// Iterates over `(index, value)` for the non-zero entries in ascending index order.
    pub fn nonzero(&self) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match self {
            FeatureVector::Dense(v) => Box::new(
                v.iter()
                    .copied()
                    .enumerate()
                    .filter(|(_, x)| *x != 0.0),
            ),
            FeatureVector::Binary { active, .. } => Box::new(active.iter().map(|&i| (i, 1.0))),
        }
    }

    /// Writes the dense form into `out`, which must already have length `len()`.
    pub fn write_dense(&self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        match self {
            FeatureVector::Dense(v) => out.copy_from_slice(v),
            FeatureVector::Binary { active, .. } => {
                out.fill(0.0);
                for &i in active {
                    out[i] = 1.0;
                }
            }
        }
    }

    /// Yields `φ_i` for every `i` in `0..len()` without allocating.
    pub fn dense_iter(&self) -> DenseIter<'_> {
        match self {
            FeatureVector::Dense(v) => DenseIter::Dense(v.iter()),
            FeatureVector::Binary { len, active } => DenseIter::Binary {
                next: 0,
                len: *len,
                active: active.iter().peekable(),
            },
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.write_dense(&mut out);
        out
    }
}

pub enum DenseIter<'a> {
    Dense(std::slice::Iter<'a, f64>),
    Binary {
        next: usize,
        len: usize,
        active: std::iter::Peekable<std::slice::Iter<'a, usize>>,
    },
}

impl Iterator for DenseIter<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        match self {
            DenseIter::Dense(it) => it.next().copied(),
            DenseIter::Binary { next, len, active } => {
                if *next >= *len {
                    return None;
                }
                let i = *next;
                *next += 1;
                if active.peek() == Some(&&i) {
                    active.next();
                    Some(1.0)
                } else {
                    Some(0.0)
                }
            }
        }
    }
}

/// `Σ_i w_i φ_i`.
pub fn dot(w: &[f64], phi: &FeatureVector) -> Result<f64> {
    if w.len() != phi.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            actual: phi.len(),
        });
    }
    Ok(match phi {
        FeatureVector::Dense(v) => w.iter().zip(v).map(|(a, b)| a * b).sum(),
        FeatureVector::Binary { active, .. } => active.iter().map(|&i| w[i]).sum(),
    })
}

/// One observed step `(φ(s), R, φ(s'), γ')` fed to a learner.
///
/// `gamma_next == 0` marks a terminal transition: there is no bootstrapping
/// from `phi_next` and traces are cleared afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub phi: FeatureVector,
    pub reward: f64,
    pub phi_next: FeatureVector,
    pub gamma_next: f64,
}

impl Transition {
    pub fn new(
        phi: FeatureVector,
        reward: f64,
        phi_next: FeatureVector,
        gamma_next: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma_next) {
            return Err(Error::config(
                "gamma_next",
                format!("{gamma_next} is outside [0, 1]"),
            ));
        }
        if phi.len() != phi_next.len() {
            return Err(Error::LengthMismatch {
                expected: phi.len(),
                actual: phi_next.len(),
            });
        }
        Ok(Transition {
            phi,
            reward,
            phi_next,
            gamma_next,
        })
    }

    pub fn is_terminal(&self) -> bool {
        self.gamma_next == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_hot_selects_weight() {
        let phi = FeatureVector::dense(vec![0.0, 1.0, 0.0]);
        assert_eq!(dot(&[1.0, 2.0, 3.0], &phi).unwrap(), 2.0);
        let phi = FeatureVector::one_hot(3, 1).unwrap();
        assert_eq!(dot(&[1.0, 2.0, 3.0], &phi).unwrap(), 2.0);
    }

    #[test]
    fn zero_weights_give_zero() {
        let phi = FeatureVector::dense(vec![0.3, -2.0, 7.5]);
        assert_eq!(dot(&[0.0; 3], &phi).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let phi = FeatureVector::zeros(4);
        assert!(matches!(
            dot(&[1.0, 2.0], &phi),
            Err(Error::LengthMismatch {
                expected: 2,
                actual: 4
            })
        ));
    }

    #[test]
    fn binary_rejects_out_of_range_index() {
        assert!(FeatureVector::binary(3, vec![0, 3]).is_err());
        let phi = FeatureVector::binary(5, vec![4, 2, 2]).unwrap();
        assert_eq!(phi.active_count(), 2);
        assert_eq!(phi.to_dense(), vec![0.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn dense_iter_matches_to_dense() {
        let phi = FeatureVector::binary(6, vec![0, 3, 5]).unwrap();
        assert_eq!(phi.dense_iter().collect::<Vec<_>>(), phi.to_dense());
        let phi = FeatureVector::dense(vec![0.5, 0.0, -1.0]);
        assert_eq!(phi.dense_iter().collect::<Vec<_>>(), vec![0.5, 0.0, -1.0]);
    }

    #[test]
    fn transition_rejects_bad_gamma() {
        let phi = FeatureVector::zeros(2);
        assert!(Transition::new(phi.clone(), 0.0, phi.clone(), 1.5).is_err());
        assert!(Transition::new(phi.clone(), 0.0, FeatureVector::zeros(3), 0.5).is_err());
        assert!(Transition::new(phi.clone(), 0.0, phi, 0.0)
            .unwrap()
            .is_terminal());
    }

    proptest! {
        #[test]
        fn sparse_and_dense_agree_exactly(
            w in proptest::collection::vec(-100.0f64..100.0, 1..40),
            mask in proptest::collection::vec(any::<bool>(), 40),
        ) {
            let n = w.len();
            let active: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
            let sparse = FeatureVector::binary(n, active).unwrap();
            let dense = FeatureVector::dense(sparse.to_dense());
            prop_assert_eq!(dot(&w, &sparse).unwrap(), dot(&w, &dense).unwrap());
        }

        #[test]
        fn dot_is_homogeneous(
            w in proptest::collection::vec(-10.0f64..10.0, 1..30),
            a in -5.0f64..5.0,
        ) {
            let phi = FeatureVector::dense(w.iter().map(|x| x.sin()).collect());
            let scaled: Vec<f64> = w.iter().map(|x| a * x).collect();
            let lhs = dot(&scaled, &phi).unwrap();
            let rhs = a * dot(&w, &phi).unwrap();
            let scale: f64 = scaled.iter().zip(phi.to_dense()).map(|(x, p)| (x * p).abs()).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + scale));
        }
    }
}
