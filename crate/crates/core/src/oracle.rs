//! Brute-force minimizer of the risk over a grid of PSD grams.
//!
//! Independent of the solver: no gradients, no projection, just exhaustive evaluation.

use crate::error::{Error, Result};
use crate::graphon::{EmbeddingGram, SbmGraphon};
use crate::risk::pair_loss;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult<T> {
    pub gram: EmbeddingGram<T>,
    pub risk: T,
    /// Grid spacing `h`. Every coordinate of the true minimizer is within `h` of a
    /// feasible grid point, so `risk <= min risk + h` (block weights sum to one and each
    /// per-block loss is 1-Lipschitz).
    pub spacing: T,
}

/// Evaluates the risk on `K1, K3 in {0, h, ..., bounds}` and `K2 in {-bounds, ..., bounds}`
/// with `h = bounds / resolution`, keeping PSD points only.
pub fn grid_oracle<T: Scalar>(g: &SbmGraphon<T>, resolution: usize, bounds: T) -> Result<OracleResult<T>> {
    if resolution < 50 {
        return Err(Error::InvalidParameter {
            name: "resolution",
            value: resolution as f64,
            reason: "must be at least 50",
        });
    }
    if !(bounds > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "bounds",
            value: bounds.as_f64(),
            reason: "must be positive",
        });
    }
    let h = bounds / T::from_usize(resolution).expect("resolution fits scalar");
    let at = |i: usize| T::from_usize(i).expect("index fits scalar") * h;
    let [w1, w2, w3] = g.block_weights();
    let n_diag = resolution + 1;
    let n_off = 2 * resolution + 1;

    // The risk is separable, so tabulate each block's loss once.
    let diag_vals: Vec<T> = (0..n_diag).map(at).collect();
    let off_vals: Vec<T> = (0..n_off).map(|i| at(i) - bounds).collect();
    let loss1: Vec<T> = diag_vals.iter().map(|&k| w1 * pair_loss(k, g.p)).collect();
    let loss3: Vec<T> = diag_vals.iter().map(|&k| w3 * pair_loss(k, g.r)).collect();
    let loss2: Vec<T> = off_vals.iter().map(|&k| w2 * pair_loss(k, g.q)).collect();

    let mut best = (T::infinity(), 0usize, resolution, 0usize);
    for (i1, &k1) in diag_vals.iter().enumerate() {
        for (i3, &k3) in diag_vals.iter().enumerate() {
            let prod = k1 * k3;
            let base = loss1[i1] + loss3[i3];
            for (i2, &k2) in off_vals.iter().enumerate() {
                if k2 * k2 > prod {
                    continue;
                }
                let v = base + loss2[i2];
                if v < best.0 {
                    best = (v, i1, i2, i3);
                }
            }
        }
    }
    let (risk, i1, i2, i3) = best;
    Ok(OracleResult {
        gram: EmbeddingGram::new(diag_vals[i1], off_vals[i2], diag_vals[i3]),
        risk,
        spacing: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_closed_form_within_one_cell() {
        let g = SbmGraphon::new(0.5, 0.9, 0.5, 0.9).unwrap();
        let o = grid_oracle(&g, 400, 5.0).unwrap();
        let l = 9.0_f64.ln();
        let expect = EmbeddingGram::new(l, 0.0, l);
        assert!(o.gram.max_abs_diff(&expect) <= o.spacing, "{:?}", o.gram);
    }

    #[test]
    fn sparse_within_one_cell_of_zero() {
        let g = SbmGraphon::new(0.6, 0.3, 0.3, 0.3).unwrap();
        let o = grid_oracle(&g, 100, 5.0).unwrap();
        assert!(o.gram.max_abs() <= o.spacing);
    }

    #[test]
    fn rejects_coarse_grids() {
        let g = SbmGraphon::new(0.6, 0.3, 0.3, 0.3).unwrap();
        assert!(grid_oracle(&g, 10, 5.0).is_err());
        assert!(grid_oracle(&g, 60, 0.0).is_err());
    }
}
