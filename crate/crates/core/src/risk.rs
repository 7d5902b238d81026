//! Population cross-entropy risk of a block-constant gram matrix and the projection onto
//! the 2x2 PSD cone.
//!
//! With block weights `w = (a^2, 2a(1-a), (1-a)^2)` the risk is
//!
//! ```text
//! R(K) = w1 l(K1, p) + w2 l(K2, q) + w3 l(K3, r),    l(y, x) = log(1 + e^y) - x y
//! ```
//!
//! which is the expected pairwise loss of inner-product embeddings under uniform
//! vertex sampling, up to the positive sampling-density factor (dropped; it does not move
//! the minimizer).

use crate::graphon::{sigmoid, softplus, EmbeddingGram, SbmGraphon};
use crate::scalar::Scalar;

/// Cross-entropy of a logit `y` against a target probability `x`.
#[inline]
pub fn pair_loss<T: Scalar>(y: T, x: T) -> T {
    softplus(y) - x * y
}

pub fn risk<T: Scalar>(k: &EmbeddingGram<T>, g: &SbmGraphon<T>) -> T {
    let [w1, w2, w3] = g.block_weights();
    w1 * pair_loss(k.k1, g.p) + w2 * pair_loss(k.k2, g.q) + w3 * pair_loss(k.k3, g.r)
}

/// Partial derivatives of [`risk`] in `(K1, K2, K3)`.
pub fn risk_gradient<T: Scalar>(k: &EmbeddingGram<T>, g: &SbmGraphon<T>) -> [T; 3] {
    let [w1, w2, w3] = g.block_weights();
    [
        w1 * (sigmoid(k.k1) - g.p),
        w2 * (sigmoid(k.k2) - g.q),
        w3 * (sigmoid(k.k3) - g.r),
    ]
}

/// The gradient as a symmetric matrix `[[g1, g2/2], [g2/2, g3]]`, i.e. the gradient with
/// respect to the Frobenius inner product (the off-diagonal entry appears twice).
pub fn matrix_gradient<T: Scalar>(k: &EmbeddingGram<T>, g: &SbmGraphon<T>) -> EmbeddingGram<T> {
    let [g1, g2, g3] = risk_gradient(k, g);
    EmbeddingGram::new(g1, g2 * T::half(), g3)
}

/// Frobenius-nearest PSD matrix to `[[k1, k2], [k2, k3]]`: negative eigenvalues are
/// clamped to zero.
pub fn project_psd<T: Scalar>(k1: T, k2: T, k3: T) -> EmbeddingGram<T> {
    let k = EmbeddingGram::new(k1, k2, k3);
    let e = k.eigen();
    if e.values[1] >= T::zero() {
        k
    } else if e.values[0] <= T::zero() {
        EmbeddingGram::zero()
    } else {
        EmbeddingGram::outer(e.values[0], e.vectors[0])
    }
}
