use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SampledGraph;
use crate::error::{Error, Result};
use crate::graphon::sigmoid;
use crate::risk::pair_loss;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions<T> {
    /// Step on the summed pair loss; `None` means `0.5 / n`.
    pub learning_rate: Option<T>,
    pub epochs: usize,
    /// Initial entries are uniform in `[-init_scale, init_scale]`.
    pub init_scale: T,
    pub seed: u64,
    /// Stop once the mean pair loss improves by less than this in an epoch.
    pub tolerance: T,
    pub backtracking: T,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            learning_rate: None,
            epochs: 5000,
            init_scale: T::lit(0.1),
            seed: 0,
            tolerance: T::lit(1e-10).max(T::tolerance_floor()),
            backtracking: T::half(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFit<T> {
    pub n: usize,
    pub d: usize,
    /// Row-major `n x d`.
    pub vectors: Vec<T>,
    /// Mean pair loss before the first epoch and after each accepted epoch.
    pub loss_trace: Vec<T>,
    pub epochs_run: usize,
    pub converged: bool,
    pub options: FitOptions<T>,
}

impl<T: Scalar> EmbeddingFit<T> {
    #[inline]
    pub fn vector(&self, i: usize) -> &[T] {
        &self.vectors[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn inner(&self, i: usize, j: usize) -> T {
        dot(self.vector(i), self.vector(j))
    }

    pub fn final_loss(&self) -> T {
        *self.loss_trace.last().expect("trace starts with the initial loss")
    }
}

#[inline]
fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |s, (a, b)| s + *a * *b)
}

/// Mean of `l(<w_i, w_j>, a_ij)` over ordered pairs `i != j`.
fn mean_loss<T: Scalar>(graph: &SampledGraph, w: &[T], d: usize) -> T {
    let n = graph.n;
    let mut total = T::zero();
    for i in 0..n {
        let wi = &w[i * d..(i + 1) * d];
        for j in (i + 1)..n {
            let s = dot(wi, &w[j * d..(j + 1) * d]);
            let target = if graph.has_edge(i, j) { T::one() } else { T::zero() };
            total += pair_loss(s, target);
        }
    }
    total * T::two() / T::from_usize(n * (n - 1)).expect("pair count fits scalar")
}

/// Gradient of the summed pair loss `sum_{i != j} l(<w_i, w_j>, a_ij)`.
fn gradient<T: Scalar>(graph: &SampledGraph, w: &[T], d: usize, out: &mut [T]) {
    let n = graph.n;
    out.iter_mut().for_each(|x| *x = T::zero());
    for i in 0..n {
        for j in (i + 1)..n {
            let (wi, wj) = (&w[i * d..(i + 1) * d], &w[j * d..(j + 1) * d]);
            let target = if graph.has_edge(i, j) { T::one() } else { T::zero() };
            let c = T::two() * (sigmoid(dot(wi, wj)) - target);
            for k in 0..d {
                let (a, b) = (w[i * d + k], w[j * d + k]);
                out[i * d + k] += c * b;
                out[j * d + k] += c * a;
            }
        }
    }
}

/// Full-batch gradient descent with backtracking on the pairwise cross-entropy.
///
/// Uniform vertex sampling weights every pair equally, so its expected update is the
/// full-batch gradient used here. Community labels are not read.
pub fn fit_embeddings<T: Scalar>(graph: &SampledGraph, d: usize, opts: &FitOptions<T>) -> Result<EmbeddingFit<T>> {
    if d < 2 {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d as f64,
            reason: "embedding dimension must be at least 2",
        });
    }
    if !(opts.backtracking > T::zero() && opts.backtracking < T::one()) {
        return Err(Error::InvalidParameter {
            name: "backtracking",
            value: opts.backtracking.as_f64(),
            reason: "must lie in (0, 1)",
        });
    }
    let n = graph.n;
    let base_lr = opts
        .learning_rate
        .unwrap_or_else(|| T::half() / T::from_usize(n).expect("n fits scalar"));
    if !(base_lr > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "learning_rate",
            value: base_lr.as_f64(),
            reason: "must be positive",
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = opts.init_scale.as_f64();
    let mut w: Vec<T> = (0..n * d)
        .map(|_| T::lit(rng.gen_range(-scale..=scale)))
        .collect();
    let mut grad = vec![T::zero(); n * d];
    let mut trial = vec![T::zero(); n * d];
    let mut loss = mean_loss(graph, &w, d);
    let mut trace = vec![loss];
    let mut lr = base_lr;
    let mut converged = false;
    let mut epochs_run = 0;

    for epoch in 0..opts.epochs {
        gradient(graph, &w, d, &mut grad);
        let mut accepted = None;
        for _ in 0..60 {
            for ((t, x), g) in trial.iter_mut().zip(&w).zip(&grad) {
                *t = *x - lr * *g;
            }
            let l = mean_loss(graph, &trial, d);
            if l.is_finite() && l <= loss {
                accepted = Some(l);
                break;
            }
            lr = lr * opts.backtracking;
        }
        epochs_run = epoch + 1;
        let Some(new_loss) = accepted else {
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    loss: loss.as_f64(),
                });
            }
            // No descent step exists at working precision: stationary.
            converged = true;
            break;
        };
        std::mem::swap(&mut w, &mut trial);
        let improvement = loss - new_loss;
        loss = new_loss;
        trace.push(loss);
        if improvement < opts.tolerance {
            converged = true;
            break;
        }
        lr = (lr * T::lit(1.25)).min(base_lr);
    }

    Ok(EmbeddingFit {
        n,
        d,
        vectors: w,
        loss_trace: trace,
        epochs_run,
        converged,
        options: *opts,
    })
}
