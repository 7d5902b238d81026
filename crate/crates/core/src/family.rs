//! Equivalence classes of middle-regime graphons that share one gram matrix.
//!
//! For a rank-one gram `K = (K1, K2, K3)` with `K1, K3 > 0` the graphons embedding to `K`
//! form a segment
//!
//! ```text
//! p = p* + eta * delta,   q = q* + s * delta,   r = r* + delta / eta,   delta in [delta_min, 0]
//! ```
//!
//! anchored at the densest member `(p*, q*, r*) = sigmoid(K)`, with
//! `eta = (1 - a) / a * sqrt(K3 / K1)` and `s = +1` when `K2 <= 0` (sparse cross edges),
//! `-1` otherwise. Along the segment the middle-regime multiplier is
//! `mu = -delta * a (1 - a) / sqrt(K1 K3)`, so every member satisfies the same KKT
//! system and, by convexity, has `K` as its unique minimizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::{sigmoid, EmbeddingGram, SbmGraphon};
use crate::scalar::Scalar;

/// A gram is accepted as rank one when `|lambda_min| <= MANIFOLD_TOL * lambda_max`.
pub const MANIFOLD_TOL: f64 = 1e-3;
/// Guard for divisions by `K1`, `K3` and for the forced-error ratio.
pub const ETA_TOL: f64 = 1e-12;
/// Slack allowed on `delta` and density range checks.
const RANGE_TOL: f64 = 1e-12;

/// Which constraint ends the family on the sparse side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingConstraint {
    /// `p` reaches 0.
    PZero,
    /// `r` reaches 0.
    RZero,
    /// `q` reaches 0 (sparse cross edges, `s = +1`).
    QZero,
    /// `q` reaches 1 (dense cross edges, `s = -1`).
    QOne,
}

impl BindingConstraint {
    pub fn as_str(&self) -> &'static str {
        match self {
            BindingConstraint::PZero => "p=0",
            BindingConstraint::RZero => "r=0",
            BindingConstraint::QZero => "q=0",
            BindingConstraint::QOne => "q=1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceFamily<T> {
    /// The shared gram, projected onto the rank-one manifold.
    pub gram: EmbeddingGram<T>,
    pub a: T,
    /// Densest member.
    pub anchor: SbmGraphon<T>,
    pub eta: T,
    /// Direction of `q` along the family: `+1` or `-1`.
    pub s_fam: T,
    /// Sparse end of the family; the dense end is `delta = 0`.
    pub delta_min: T,
    pub binding: BindingConstraint,
}

/// `(1 - a) / a * sqrt(K3 / K1)`.
pub fn eta_of<T: Scalar>(k: &EmbeddingGram<T>, a: T) -> Result<T> {
    let tol = T::lit(ETA_TOL);
    if !(k.k1 > tol && k.k3 > tol) {
        return Err(Error::EtaUndefined("K1 or K3 is zero; use the forced-error form"));
    }
    Ok((T::one() - a) / a * (k.k3 / k.k1).sqrt())
}

/// `sqrt((sigmoid(K1) - p) / (sigmoid(K3) - r))`, the ratio of forced errors. Equal to
/// [`eta_of`] at the minimizer of any strict middle-regime graphon, and better
/// conditioned when `K1` or `K3` is near zero.
pub fn eta_alt<T: Scalar>(k: &EmbeddingGram<T>, g: &SbmGraphon<T>) -> Result<T> {
    let tol = T::lit(ETA_TOL);
    let num = sigmoid(k.k1) - g.p;
    let den = sigmoid(k.k3) - g.r;
    if !(num > tol && den > tol) {
        return Err(Error::EtaUndefined(
            "no forced error (graphon on the dense boundary); eta is 0/0",
        ));
    }
    Ok((num / den).sqrt())
}

/// Nearest rank-one PSD gram, or an error when `K` is zero or not close to rank one.
pub fn project_rank_one<T: Scalar>(k: &EmbeddingGram<T>, tol: T) -> Result<EmbeddingGram<T>> {
    let e = k.eigen();
    let [hi, lo] = e.values;
    if !(hi > T::zero()) {
        return Err(Error::Degenerate("gram is zero or negative definite".into()));
    }
    let ratio = lo.abs() / hi;
    if ratio > tol {
        return Err(Error::NotRankOne { ratio: ratio.as_f64() });
    }
    Ok(EmbeddingGram::outer(hi, e.vectors[0]))
}

/// Densest graphon embedding to `K`: `(sigmoid(K1), sigmoid(K2), sigmoid(K3))` of the
/// rank-one projection of `K`. It lies on the dense/middle boundary.
pub fn densest_member<T: Scalar>(k: &EmbeddingGram<T>) -> Result<[T; 3]> {
    let k = project_rank_one(k, T::lit(MANIFOLD_TOL))?;
    Ok(k.sigmoid())
}

/// Builds the equivalence class of `K` at community fraction `a`.
pub fn family_of<T: Scalar>(k: &EmbeddingGram<T>, a: T) -> Result<EquivalenceFamily<T>> {
    if !(a > T::zero() && a < T::one()) {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a.as_f64(),
            reason: "community fraction must lie in (0, 1)",
        });
    }
    let gram = project_rank_one(k, T::lit(MANIFOLD_TOL))?;
    let eta = eta_of(&gram, a).map_err(|_| {
        Error::Degenerate("K1 or K3 is zero: the q = 1/2 edge case has no linear family".into())
    })?;
    let [p, q, r] = gram.sigmoid();
    let anchor = SbmGraphon::new(a, p, q, r)?;
    let s_fam = if gram.k2 <= T::zero() { T::one() } else { -T::one() };

    let q_limit = if s_fam > T::zero() {
        (-q, BindingConstraint::QZero)
    } else {
        (-(T::one() - q), BindingConstraint::QOne)
    };
    let (delta_min, binding) = [(-p / eta, BindingConstraint::PZero), (-r * eta, BindingConstraint::RZero), q_limit]
        .into_iter()
        .fold((T::neg_infinity(), BindingConstraint::QZero), |best, c| if c.0 > best.0 { c } else { best });

    Ok(EquivalenceFamily {
        gram,
        a,
        anchor,
        eta,
        s_fam,
        delta_min,
        binding,
    })
}

impl<T: Scalar> EquivalenceFamily<T> {
    /// Direction of the family in `(p, q, r)`: `(eta, s_fam, 1 / eta)`.
    pub fn direction(&self) -> [T; 3] {
        [self.eta, self.s_fam, T::one() / self.eta]
    }

    /// `d edge_density / d delta`; never negative.
    pub fn density_slope(&self) -> T {
        let a = self.a;
        let b = T::one() - a;
        a * a * self.eta + T::two() * a * b * self.s_fam + b * b / self.eta
    }

    /// `delta` of a graphon on this family's line, or [`Error::NotInFamily`].
    pub fn delta_of(&self, g: &SbmGraphon<T>, tol: T) -> Result<T> {
        let diff = [g.p - self.anchor.p, g.q - self.anchor.q, g.r - self.anchor.r];
        let dir = self.direction();
        let dot = diff.iter().zip(dir.iter()).fold(T::zero(), |s, (d, u)| s + *d * *u);
        let norm2 = dir.iter().fold(T::zero(), |s, u| s + *u * *u);
        let delta = dot / norm2;
        let dist = diff
            .iter()
            .zip(dir.iter())
            .fold(T::zero(), |s, (d, u)| s + (*d - delta * *u).powi(2))
            .sqrt();
        let a_gap = (g.a - self.a).abs();
        if dist > tol || a_gap > tol || delta > tol || delta < self.delta_min - tol {
            return Err(Error::NotInFamily {
                p: g.p.as_f64(),
                q: g.q.as_f64(),
                r: g.r.as_f64(),
                distance: dist.max(a_gap).as_f64(),
            });
        }
        Ok(delta.min(T::zero()).max(self.delta_min))
    }
}

/// Family member at `delta`, for `delta` in `[delta_min, 0]`.
pub fn member_at<T: Scalar>(f: &EquivalenceFamily<T>, delta: T) -> Result<SbmGraphon<T>> {
    let tol = T::lit(RANGE_TOL);
    if !(delta >= f.delta_min - tol && delta <= tol) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta.as_f64(),
            lo: f.delta_min.as_f64(),
            hi: 0.0,
        });
    }
    let clamp = |x: T| x.max(T::zero()).min(T::one());
    let [dp, dq, dr] = f.direction();
    SbmGraphon::new(
        f.a,
        clamp(f.anchor.p + dp * delta),
        clamp(f.anchor.q + dq * delta),
        clamp(f.anchor.r + dr * delta),
    )
}

/// `count` members evenly spaced from the anchor (`delta = 0`) to `delta_min`, inclusive.
pub fn sample_members<T: Scalar>(f: &EquivalenceFamily<T>, count: usize) -> Result<Vec<(T, SbmGraphon<T>)>> {
    let denom = T::from_usize(count.saturating_sub(1).max(1)).expect("count fits scalar");
    (0..count)
        .map(|i| {
            let delta = f.delta_min * T::from_usize(i).expect("index fits scalar") / denom;
            member_at(f, delta).map(|g| (delta, g))
        })
        .collect()
}

/// Expected edge probability of a uniformly random node pair:
/// `a^2 p + 2a(1-a) q + (1-a)^2 r`.
pub fn edge_density<T: Scalar>(g: &SbmGraphon<T>) -> T {
    let [w1, w2, w3] = g.block_weights();
    w1 * g.p + w2 * g.q + w3 * g.r
}

/// The unique `delta` whose member has the given edge density.
pub fn delta_from_density<T: Scalar>(f: &EquivalenceFamily<T>, density: T) -> Result<T> {
    let slope = f.density_slope();
    if !(slope.abs() > T::lit(ETA_TOL)) {
        return Err(Error::DegenerateSlope(slope.as_f64()));
    }
    let top = edge_density(&f.anchor);
    let bottom = top + slope * f.delta_min;
    let tol = T::lit(RANGE_TOL);
    if !(density >= bottom - tol && density <= top + tol) {
        return Err(Error::OutOfRange {
            name: "density",
            value: density.as_f64(),
            lo: bottom.as_f64(),
            hi: top.as_f64(),
        });
    }
    Ok(((density - top) / slope).min(T::zero()).max(f.delta_min))
}
