//! Two-block SBM graphons, their limiting gram matrices, and the regime partition of
//! `(p, q, r)` space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default tolerance for [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Default tolerance for [`region_from_gram`]; solver output carries more noise than raw parameters.
pub const GRAM_TOL: f64 = 1e-6;

/// Logistic function `e^x / (1 + e^x)`, evaluated without overflow for any finite `x`.
#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Derivative of [`sigmoid`].
#[inline]
pub fn sigmoid_prime<T: Scalar>(x: T) -> T {
    let s = sigmoid(x);
    s * (T::one() - s)
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus<T: Scalar>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// Inverse of [`sigmoid`] on the open unit interval.
pub fn logit<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero() && x < T::one()) {
        return Err(Error::LogitDomain(x.as_f64()));
    }
    Ok(extended_logit(x))
}

/// Logit with `logit(0) = -inf` and `logit(1) = +inf`.
fn extended_logit<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        T::neg_infinity()
    } else if x >= T::one() {
        T::infinity()
    } else {
        x.ln() - (-x).ln_1p()
    }
}

/// A 2-block stochastic block model graphon.
///
/// Nodes fall in community 1 with probability `a`; edges appear with probability `p`
/// inside community 1, `r` inside community 2 and `q` across.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmGraphon<T> {
    pub a: T,
    pub p: T,
    pub q: T,
    pub r: T,
}

impl<T: Scalar> SbmGraphon<T> {
    pub fn new(a: T, p: T, q: T, r: T) -> Result<Self> {
        if !(a > T::zero() && a < T::one()) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a.as_f64(),
                reason: "community fraction must lie in (0, 1)",
            });
        }
        for (name, v) in [("p", p), ("q", q), ("r", r)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v.as_f64(),
                    reason: "edge probability must lie in [0, 1]",
                });
            }
        }
        Ok(Self { a, p, q, r })
    }

    /// The same graphon with the community labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a: T::one() - self.a,
            p: self.r,
            q: self.q,
            r: self.p,
        }
    }

    /// Rejects graphons with a probability at 0 or 1, where the cross-entropy risk is unbounded below.
    pub fn require_open(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q), ("r", self.r)] {
            if !(v > T::zero() && v < T::one()) {
                return Err(Error::Degenerate(format!(
                    "{name} = {v} is not in (0, 1); the cross-entropy risk has no minimizer"
                )));
            }
        }
        Ok(())
    }

    /// Loss weights of the three blocks: `(a^2, 2a(1-a), (1-a)^2)`.
    #[inline]
    pub fn block_weights(&self) -> [T; 3] {
        let b = T::one() - self.a;
        [self.a * self.a, T::two() * self.a * b, b * b]
    }

    #[inline]
    pub fn probabilities(&self) -> [T; 3] {
        [self.p, self.q, self.r]
    }
}

/// Regime of `(p, q, r)` space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionTag {
    /// Embedding is invertible.
    Dense,
    /// Embedding collapses to the zero gram.
    Sparse,
    /// Embedding keeps communities but loses absolute density.
    Middle,
}

impl RegionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionTag::Dense => "dense",
            RegionTag::Sparse => "sparse",
            RegionTag::Middle => "middle",
        }
    }
}

impl std::fmt::Display for RegionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub tag: RegionTag,
    /// On the surface `logit(q)^2 = logit(p) logit(r)` with `p, r >= 1/2`.
    pub boundary_dense: bool,
    /// On the surface `(1/2 - q)^2 = (1/2 - p)(1/2 - r)` with `p, r <= 1/2`.
    pub boundary_sparse: bool,
}

/// Outcome of the dense-closure test.
enum DenseTest {
    Holds { on_boundary: bool },
    Fails,
    Undefined,
}

fn dense_test<T: Scalar>(p: T, q: T, r: T, tol: T) -> DenseTest {
    let half = T::half();
    if p < half - tol || r < half - tol {
        return DenseTest::Fails;
    }
    let lp = extended_logit(p).max(T::zero());
    let lr = extended_logit(r).max(T::zero());
    let lq = extended_logit(q);
    let lq2 = lq * lq;
    let prod = lp * lr;
    if prod.is_nan() || (lq2.is_infinite() && prod.is_infinite()) {
        return DenseTest::Undefined;
    }
    if lq2.is_infinite() {
        return DenseTest::Fails;
    }
    if prod.is_infinite() {
        return DenseTest::Holds { on_boundary: false };
    }
    if lq2 <= prod + tol {
        DenseTest::Holds {
            on_boundary: (lq2 - prod).abs() <= tol,
        }
    } else {
        DenseTest::Fails
    }
}

fn sparse_test<T: Scalar>(p: T, q: T, r: T, tol: T) -> Option<bool> {
    let half = T::half();
    if p > half + tol || r > half + tol {
        return None;
    }
    let lhs = (half - q) * (half - q);
    let rhs = (half - p) * (half - r);
    (lhs <= rhs + tol).then(|| (lhs - rhs).abs() <= tol)
}

/// Assigns `(p, q, r)` to the dense, sparse or middle regime.
///
/// Tests run in order dense, sparse, middle, so a point on a shared boundary resolves to
/// the earlier regime with the corresponding boundary flag set. A probability of exactly
/// 0 or 1 is handled with `logit = -inf / +inf`; when that leaves the dense test
/// undefined (`inf * 0`, `inf <= inf`) and the point is not sparse, a
/// [`Error::Degenerate`] is returned.
pub fn classify<T: Scalar>(p: T, q: T, r: T, tol: T) -> Result<Region> {
    for (name, v) in [("p", p), ("q", q), ("r", r)] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::InvalidParameter {
                name,
                value: v.as_f64(),
                reason: "edge probability must lie in [0, 1]",
            });
        }
    }
    let dense = dense_test(p, q, r, tol);
    let sparse = sparse_test(p, q, r, tol);
    let boundary_dense = matches!(dense, DenseTest::Holds { on_boundary: true });
    let boundary_sparse = sparse == Some(true);
    let region = |tag| Region {
        tag,
        boundary_dense,
        boundary_sparse,
    };
    match dense {
        DenseTest::Holds { .. } => Ok(region(RegionTag::Dense)),
        DenseTest::Fails if sparse.is_some() => Ok(region(RegionTag::Sparse)),
        DenseTest::Fails => Ok(region(RegionTag::Middle)),
        DenseTest::Undefined if sparse.is_some() => Ok(region(RegionTag::Sparse)),
        DenseTest::Undefined => Err(Error::Degenerate(format!(
            "dense-regime test undefined at (p, q, r) = ({p}, {q}, {r})"
        ))),
    }
}

/// Block-constant inner-product limit `[[k1, k2], [k2, k3]]`.
///
/// `k1` is the inner product within community 1, `k3` within community 2 and `k2`
/// across. The full `n x n` matrix is PSD iff this 2x2 matrix is.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EmbeddingGram<T> {
    pub k1: T,
    pub k2: T,
    pub k3: T,
}

/// Eigendecomposition of a symmetric 2x2 matrix, `values[0] >= values[1]`.
#[derive(Debug, Clone, Copy)]
pub struct SymEigen<T> {
    pub values: [T; 2],
    /// Unit eigenvectors matching `values`.
    pub vectors: [[T; 2]; 2],
}

impl<T: Scalar> EmbeddingGram<T> {
    pub const fn new(k1: T, k2: T, k3: T) -> Self {
        Self { k1, k2, k3 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(k: [T; 3]) -> Self {
        Self::new(k[0], k[1], k[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.k1, self.k2, self.k3]
    }

    pub fn is_finite(&self) -> bool {
        self.k1.is_finite() && self.k2.is_finite() && self.k3.is_finite()
    }

    /// `k1 k3 - k2^2`.
    pub fn det(&self) -> T {
        self.k1 * self.k3 - self.k2 * self.k2
    }

    pub fn is_psd(&self, tol: T) -> bool {
        self.k1 >= -tol && self.k3 >= -tol && self.eigen().values[1] >= -tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.k1 - other.k1)
            .abs()
            .max((self.k2 - other.k2).abs())
            .max((self.k3 - other.k3).abs())
    }

    pub fn max_abs(&self) -> T {
        self.k1.abs().max(self.k2.abs()).max(self.k3.abs())
    }

    pub fn eigen(&self) -> SymEigen<T> {
        let mean = (self.k1 + self.k3) * T::half();
        let diff = (self.k1 - self.k3) * T::half();
        let radius = diff.hypot(self.k2);
        let theta = (T::two() * self.k2).atan2(self.k1 - self.k3) * T::half();
        let (s, c) = theta.sin_cos();
        SymEigen {
            values: [mean + radius, mean - radius],
            vectors: [[c, s], [-s, c]],
        }
    }

    /// `lambda * v v^T`.
    pub fn outer(lambda: T, v: [T; 2]) -> Self {
        Self::new(lambda * v[0] * v[0], lambda * v[0] * v[1], lambda * v[1] * v[1])
    }

    /// Nearest (Frobenius) PSD matrix of rank at most one.
    pub fn rank_one_part(&self) -> Self {
        let e = self.eigen();
        if e.values[0] <= T::zero() {
            return Self::zero();
        }
        Self::outer(e.values[0], e.vectors[0])
    }

    /// Entrywise sigmoid: the edge probabilities an inner-product predictor assigns.
    pub fn sigmoid(&self) -> [T; 3] {
        [sigmoid(self.k1), sigmoid(self.k2), sigmoid(self.k3)]
    }

    /// The gram with community labels exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.k3, self.k2, self.k1)
    }
}

/// Reads the regime off a gram matrix: zero means sparse, rank-deficient means middle,
/// positive definite means dense.
pub fn region_from_gram<T: Scalar>(k: &EmbeddingGram<T>, tol: T) -> Region {
    let tag = if k.max_abs() <= tol {
        RegionTag::Sparse
    } else if (k.k2 * k.k2 - k.k1 * k.k3).abs() <= tol {
        RegionTag::Middle
    } else {
        RegionTag::Dense
    };
    Region {
        tag,
        boundary_dense: false,
        boundary_sparse: false,
    }
}
