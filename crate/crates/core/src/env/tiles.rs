//! Grid tile coding over pairs of bounded inputs.

use crate::error::{Error, Result};
use crate::types::FeatureVector;

/// One 2-d tiling: which two inputs it covers and its shift, as a fraction of
/// a tile width, applied in both dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tiling {
    pub inputs: [usize; 2],
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TileCoderConfig {
    ranges: Vec<(f64, f64)>,
    tiles_per_dim: usize,
    tilings: Vec<Tiling>,
    bias: bool,
}

impl TileCoderConfig {
    pub fn new(
        ranges: Vec<(f64, f64)>,
        tiles_per_dim: usize,
        tilings: Vec<Tiling>,
        bias: bool,
    ) -> Result<Self> {
        if tiles_per_dim == 0 {
            return Err(Error::config("tiles_per_dim", "must be positive"));
        }
        if tilings.is_empty() {
            return Err(Error::config("tilings", "at least one tiling is required"));
        }
        for (i, (lo, hi)) in ranges.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::config(
                    format!("ranges[{i}]"),
                    format!("empty interval [{lo}, {hi}]"),
                ));
            }
        }
        for (k, t) in tilings.iter().enumerate() {
            if t.inputs.iter().any(|&d| d >= ranges.len()) {
                return Err(Error::config(
                    format!("tilings[{k}].inputs"),
                    format!("{:?} out of range for {} inputs", t.inputs, ranges.len()),
                ));
            }
            if !(0.0..1.0).contains(&t.offset) {
                return Err(Error::config(
                    format!("tilings[{k}].offset"),
                    format!("{} is outside [0, 1)", t.offset),
                ));
            }
        }
        Ok(TileCoderConfig {
            ranges,
            tiles_per_dim,
            tilings,
            bias,
        })
    }

    /// `num_tilings` tilings over inputs 0 and 1, tiling `k` shifted by
    /// `k / num_tilings` of a tile width.
    pub fn uniform(
        ranges: [(f64, f64); 2],
        num_tilings: usize,
        tiles_per_dim: usize,
        bias: bool,
    ) -> Result<Self> {
        let tilings = uniform_tilings([0, 1], num_tilings);
        Self::new(ranges.to_vec(), tiles_per_dim, tilings, bias)
    }

    pub fn num_inputs(&self) -> usize {
        self.ranges.len()
    }

    pub fn num_tilings(&self) -> usize {
        self.tilings.len()
    }

    pub fn tiles_per_dim(&self) -> usize {
        self.tiles_per_dim
    }

    pub fn tiles_per_tiling(&self) -> usize {
        self.tiles_per_dim * self.tiles_per_dim
    }

    pub fn tilings(&self) -> &[Tiling] {
        &self.tilings
    }

    pub fn has_bias(&self) -> bool {
        self.bias
    }

    pub fn num_features(&self) -> usize {
        self.num_tilings() * self.tiles_per_tiling() + usize::from(self.bias)
    }

    pub fn bias_index(&self) -> Option<usize> {
        self.bias.then(|| self.num_tilings() * self.tiles_per_tiling())
    }

    /// Feature indices owned by tiling `k`.
    pub fn tiling_indices(&self, k: usize) -> std::ops::Range<usize> {
        let per = self.tiles_per_tiling();
        k * per..(k + 1) * per
    }

    fn coordinate(&self, input: usize, x: f64, offset: f64) -> usize {
        let (lo, hi) = self.ranges[input];
        let unit = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        let scaled = (unit * self.tiles_per_dim as f64 + offset).floor();
        (scaled as usize).min(self.tiles_per_dim - 1)
    }

    /// Active tile of tiling `k` for `inputs`, as a global feature index.
    pub fn active_tile(&self, k: usize, inputs: &[f64]) -> usize {
        let t = &self.tilings[k];
        let row = self.coordinate(t.inputs[0], inputs[t.inputs[0]], t.offset);
        let col = self.coordinate(t.inputs[1], inputs[t.inputs[1]], t.offset);
        k * self.tiles_per_tiling() + row * self.tiles_per_dim + col
    }

    /// Writes the active indices (ascending) for `inputs` into `out`.
    pub fn active_indices(&self, inputs: &[f64], out: &mut Vec<usize>) {
        out.clear();
        out.extend((0..self.num_tilings()).map(|k| self.active_tile(k, inputs)));
        if let Some(b) = self.bias_index() {
            out.push(b);
        }
    }
}

pub fn uniform_tilings(inputs: [usize; 2], num_tilings: usize) -> Vec<Tiling> {
    (0..num_tilings)
        .map(|k| Tiling {
            inputs,
            offset: k as f64 / num_tilings as f64,
        })
        .collect()
}

/// Sparse binary coding of `inputs`: one tile per tiling plus the bias feature.
///
/// Inputs outside their range are clamped to it.
pub fn tile_code(inputs: &[f64], cfg: &TileCoderConfig) -> Result<FeatureVector> {
    if inputs.len() != cfg.num_inputs() {
        return Err(Error::LengthMismatch {
            expected: cfg.num_inputs(),
            actual: inputs.len(),
        });
    }
    let mut active = Vec::with_capacity(cfg.num_tilings() + 1);
    cfg.active_indices(inputs, &mut active);
    Ok(FeatureVector::Binary {
        len: cfg.num_features(),
        active,
    })
}
