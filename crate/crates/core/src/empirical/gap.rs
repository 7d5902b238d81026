use serde::{Deserialize, Serialize};

use super::{EmbeddingFit, SampledGraph};
use crate::graphon::EmbeddingGram;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport<T> {
    /// `(1/n^2) sum_{i,j} |<w_i, w_j> - K_block(i, j)|`.
    pub gap: T,
    /// Mean off-diagonal inner product per block pair.
    pub block_gram: EmbeddingGram<T>,
    /// Naive standard error of each block mean.
    pub block_std_err: [T; 3],
    /// Pairs averaged per block.
    pub block_pairs: [usize; 3],
}

/// Compares fitted inner products with the block-constant gram `k`.
pub fn gap_report<T: Scalar>(fit: &EmbeddingFit<T>, graph: &SampledGraph, k: &EmbeddingGram<T>) -> GapReport<T> {
    assert_eq!(fit.n, graph.n, "fit and graph disagree on node count");
    let n = graph.n;
    let mut abs_dev = T::zero();
    let mut sums = [T::zero(); 3];
    let mut squares = [T::zero(); 3];
    let mut counts = [0usize; 3];
    for i in 0..n {
        for j in 0..n {
            let s = fit.inner(i, j);
            let block = match (graph.in_first[i], graph.in_first[j]) {
                (true, true) => 0,
                (false, false) => 2,
                _ => 1,
            };
            let target = [k.k1, k.k2, k.k3][block];
            abs_dev += (s - target).abs();
            if i != j {
                sums[block] += s;
                squares[block] += s * s;
                counts[block] += 1;
            }
        }
    }
    let mut means = [T::zero(); 3];
    let mut std_err = [T::zero(); 3];
    for b in 0..3 {
        if counts[b] == 0 {
            continue;
        }
        let c = T::from_usize(counts[b]).expect("count fits scalar");
        means[b] = sums[b] / c;
        let var = (squares[b] / c - means[b] * means[b]).max(T::zero());
        std_err[b] = (var / c).sqrt();
    }
    let n2 = T::from_usize(n * n).expect("n^2 fits scalar");
    GapReport {
        gap: abs_dev / n2,
        block_gram: EmbeddingGram::from_array(means),
        block_std_err: std_err,
        block_pairs: counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::{sample_graph, FitOptions};
    use crate::graphon::SbmGraphon;

    fn fit_from_vectors(n: usize, d: usize, vectors: Vec<f64>) -> EmbeddingFit<f64> {
        EmbeddingFit {
            n,
            d,
            vectors,
            loss_trace: vec![0.0],
            epochs_run: 0,
            converged: true,
            options: FitOptions::default(),
        }
    }

    #[test]
    fn exact_vectors_have_zero_gap() {
        let g = sample_graph(&SbmGraphon::new(0.5, 0.5, 0.5, 0.5).unwrap(), 40, 9).unwrap();
        // K = v v^T with v = (1.2, -0.5): community 1 at (1.2, 0), community 2 at (-0.5, 0)
        let vectors: Vec<f64> = g.in_first.iter().flat_map(|&f| if f { [1.2, 0.0] } else { [-0.5, 0.0] }).collect();
        let fit = fit_from_vectors(40, 2, vectors);
        let k = EmbeddingGram::new(1.44, -0.6, 0.25);
        let rep = gap_report(&fit, &g, &k);
        assert!(rep.gap < 1e-14);
        assert!(rep.block_gram.max_abs_diff(&k) < 1e-14);
    }

    #[test]
    fn random_vectors_against_zero_gram() {
        let g = sample_graph(&SbmGraphon::new(0.5, 0.5, 0.5, 0.5).unwrap(), 30, 1).unwrap();
        let vectors: Vec<f64> = (0..30 * 3).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let fit = fit_from_vectors(30, 3, vectors);
        let rep = gap_report(&fit, &g, &EmbeddingGram::zero());
        let mean_abs: f64 = (0..30).flat_map(|i| (0..30).map(move |j| (i, j))).map(|(i, j)| fit.inner(i, j).abs()).sum::<f64>() / 900.0;
        assert!(rep.gap > 0.0);
        assert!((rep.gap - mean_abs).abs() < 1e-14);
    }

    #[test]
    fn invariant_under_rotation() {
        let g = sample_graph(&SbmGraphon::new(0.4, 0.7, 0.2, 0.6).unwrap(), 25, 5).unwrap();
        let vectors: Vec<f64> = (0..25 * 2).map(|i| ((i * 13 % 7) as f64 - 3.0) / 4.0).collect();
        let (c, s) = (0.3_f64.cos(), 0.3_f64.sin());
        let rotated: Vec<f64> = vectors.chunks(2).flat_map(|v| [c * v[0] - s * v[1], s * v[0] + c * v[1]]).collect();
        let k = EmbeddingGram::new(0.4, -0.1, 0.3);
        let a = gap_report(&fit_from_vectors(25, 2, vectors), &g, &k);
        let b = gap_report(&fit_from_vectors(25, 2, rotated), &g, &k);
        assert!((a.gap - b.gap).abs() < 1e-12);
    }
}
