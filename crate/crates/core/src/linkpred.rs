//! Inner-product link prediction and graphon recovery from an embedding gram.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{delta_from_density, family_of, member_at, EquivalenceFamily};
use crate::graphon::{EmbeddingGram, SbmGraphon};
use crate::scalar::Scalar;

/// Membership tolerance for [`predict_interpolated`] origins.
pub const MEMBERSHIP_TOL: f64 = 1e-6;
/// `|eta - 1|` below this counts as balanced densification.
pub const BALANCE_TOL: f64 = 1e-9;

/// `sigmoid(<w_i, w_j>)` per block. For a middle-regime gram this is the densest member
/// of the equivalence class; for a dense-regime gram it inverts the embedding.
pub fn predict_baseline<T: Scalar>(k: &EmbeddingGram<T>) -> [T; 3] {
    k.sigmoid()
}

/// Member of the family at `delta = (1 - t) * delta_origin`: `t = 0` returns `origin`,
/// `t = 1` the densest member. Interpolating along the family line keeps the embedding.
pub fn predict_interpolated<T: Scalar>(
    k: &EmbeddingGram<T>,
    a: T,
    origin: &SbmGraphon<T>,
    t: T,
) -> Result<(SbmGraphon<T>, T)> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t.as_f64(),
            lo: 0.0,
            hi: 1.0,
        });
    }
    let f = family_of(k, a)?;
    let delta_origin = f.delta_of(origin, T::lit(MEMBERSHIP_TOL))?;
    let delta = (T::one() - t) * delta_origin;
    Ok((member_at(&f, delta)?, delta))
}

/// The unique member of `K`'s family with the given edge density.
pub fn recover_from_density<T: Scalar>(k: &EmbeddingGram<T>, a: T, density: T) -> Result<(SbmGraphon<T>, T)> {
    let f = family_of(k, a)?;
    let delta = delta_from_density(&f, density)?;
    Ok((member_at(&f, delta)?, delta))
}

/// Edge density from a mean degree on `n` nodes: `degree / (n - 1)`.
pub fn density_from_average_degree<T: Scalar>(avg_degree: T, n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "need at least two nodes",
        });
    }
    Ok(avg_degree / T::from_usize(n - 1).expect("n fits scalar"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Balance {
    /// `eta > 1`: community 1 gains edges faster.
    Community1Favored,
    /// `eta < 1`: community 2 gains edges faster.
    Community2Favored,
    Balanced,
}

impl Balance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Balance::Community1Favored => "community-1-favored",
            Balance::Community2Favored => "community-2-favored",
            Balance::Balanced => "balanced",
        }
    }
}

/// Rates at which a representation-preserving link predictor densifies each block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensifyRates<T> {
    pub community1: T,
    pub community2: T,
    pub cross: T,
    pub balance: Balance,
    /// 1 or 2; `None` when `a = 1/2`.
    pub larger_community: Option<u8>,
}

pub fn densify_rates<T: Scalar>(f: &EquivalenceFamily<T>) -> DensifyRates<T> {
    let tol = T::lit(BALANCE_TOL);
    let balance = if f.eta > T::one() + tol {
        Balance::Community1Favored
    } else if f.eta < T::one() - tol {
        Balance::Community2Favored
    } else {
        Balance::Balanced
    };
    let larger_community = if f.a > T::half() {
        Some(1)
    } else if f.a < T::half() {
        Some(2)
    } else {
        None
    };
    DensifyRates {
        community1: f.eta,
        community2: T::one() / f.eta,
        cross: f.s_fam,
        balance,
        larger_community,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{densest_member, edge_density};
    use crate::graphon::logit;
    use approx::assert_abs_diff_eq;

    fn worked() -> EmbeddingGram<f64> {
        EmbeddingGram::new(0.49, -0.59, 0.71)
    }

    #[test]
    fn baseline_examples() {
        assert_eq!(predict_baseline(&EmbeddingGram::<f64>::zero()), [0.5, 0.5, 0.5]);
        let b = predict_baseline(&worked());
        // mpmath sigmoids of the raw entries
        assert_abs_diff_eq!(b[0], 0.620_106_432_343_090_1, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], 0.356_634_854_305_598_2, epsilon = 1e-12);
        assert_abs_diff_eq!(b[2], 0.670_401_159_808_868_6, epsilon = 1e-12);
        let d = densest_member(&worked()).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(b[i], d[i], epsilon = 1e-4);
        }
        let k = EmbeddingGram::new(logit(0.8).unwrap(), logit(0.6).unwrap(), logit(0.9).unwrap());
        let back = predict_baseline(&k);
        for (x, y) in back.iter().zip([0.8, 0.6, 0.9]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn interpolation_endpoints() {
        let f = family_of(&worked(), 0.66).unwrap();
        let origin = member_at(&f, -0.3).unwrap();
        let (g0, d0) = predict_interpolated(&worked(), 0.66, &origin, 0.0).unwrap();
        assert_abs_diff_eq!(d0, -0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(g0.p, origin.p, epsilon = 1e-12);
        let (g1, d1) = predict_interpolated(&worked(), 0.66, &origin, 1.0).unwrap();
        assert_eq!(d1, 0.0);
        assert_eq!(g1, f.anchor);
        let (_, dh) = predict_interpolated(&worked(), 0.66, &origin, 0.5).unwrap();
        assert_abs_diff_eq!(dh, -0.15, epsilon = 1e-12);
    }

    #[test]
    fn interpolation_rejects_foreign_origin() {
        let origin = SbmGraphon::new(0.66, 0.5, 0.2, 0.5).unwrap();
        assert!(matches!(
            predict_interpolated(&worked(), 0.66, &origin, 0.5),
            Err(Error::NotInFamily { .. })
        ));
        let f = family_of(&worked(), 0.66).unwrap();
        assert!(predict_interpolated(&worked(), 0.66, &f.anchor, 1.5).is_err());
    }

    #[test]
    fn recovery_examples() {
        let f = family_of(&worked(), 0.66).unwrap();
        let (g, d) = recover_from_density(&worked(), 0.66, edge_density(&f.anchor)).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(g, f.anchor);
        let m = member_at(&f, -0.27).unwrap();
        let (g, _) = recover_from_density(&worked(), 0.66, edge_density(&m)).unwrap();
        for (x, y) in [(g.p, m.p), (g.q, m.q), (g.r, m.r)] {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        assert!(recover_from_density(&worked(), 0.66, 0.95).is_err());
    }

    #[test]
    fn average_degree_conversion() {
        assert_abs_diff_eq!(density_from_average_degree(49.95, 100).unwrap(), 0.5045454545, epsilon = 1e-9);
        assert!(density_from_average_degree(1.0, 1).is_err());
    }

    #[test]
    fn rates() {
        let sym = family_of(&EmbeddingGram::new(1.2, -1.2, 1.2), 0.5).unwrap();
        let r = densify_rates(&sym);
        assert_eq!(r.balance, Balance::Balanced);
        assert_eq!(r.larger_community, None);
        let r = densify_rates(&family_of(&worked(), 0.66).unwrap());
        assert_eq!(r.balance, Balance::Community2Favored);
        assert_eq!(r.larger_community, Some(1));
        assert_abs_diff_eq!(r.community1 * r.community2, 1.0, epsilon = 1e-15);
        assert_eq!(r.cross, 1.0);
    }
}
