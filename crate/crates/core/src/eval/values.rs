use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mrp::MrpModel;

/// Exact state values: the solution of `(I − γP) v = r`.
pub fn solve_true_values(mrp: &MrpModel) -> Result<Vec<f64>> {
    let n = mrp.num_states();
    let gamma = mrp.gamma();
    if gamma >= 1.0 {
        return Err(Error::Singular);
    }
    let p = mrp.transitions();
    let system = DMatrix::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - gamma * p[i][j]
    });
    let rhs = DVector::from_column_slice(mrp.expected_reward());
    let v = system.lu().solve(&rhs).ok_or(Error::Singular)?;
    Ok(v.iter().copied().collect())
}
