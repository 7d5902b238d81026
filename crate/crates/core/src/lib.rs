//! Limiting node-embedding gram matrices of two-block SBM graphons.
//!
//! A graphon `(a, p, q, r)` places a fraction `a` of nodes in community 1, with edge
//! probabilities `p` inside community 1, `r` inside community 2 and `q` across. The
//! embedding objective in the large-graph limit reduces to a convex risk over 2x2 PSD
//! grams `K = (K1, K2, K3)`; this crate solves it, classifies the dense / sparse / middle
//! regimes, builds the line of graphons sharing one gram, and checks all of it against a
//! grid oracle and a simulated embedding fit.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! `f64`.

pub mod empirical;
pub mod error;
pub mod family;
pub mod graphon;
pub mod linkpred;
pub mod oracle;
pub mod risk;
pub mod scalar;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use family::{
    delta_from_density, densest_member, edge_density, eta_alt, eta_of, family_of, member_at, sample_members,
    BindingConstraint, EquivalenceFamily,
};
pub use graphon::{classify, logit, region_from_gram, sigmoid, EmbeddingGram, Region, RegionTag, SbmGraphon};
pub use linkpred::{
    densify_rates, predict_baseline, predict_interpolated, recover_from_density, Balance, DensifyRates,
};
pub use oracle::{grid_oracle, OracleResult};
pub use risk::{risk, risk_gradient};
pub use scalar::Scalar;
pub use solver::{analytic_gram, certify, embed, solve_gram, GramSolution, KktCertificate, SolverOptions};
pub use sweep::{densification_map, eta_partials, eta_surface, DensifyLabel, SweepGrid};

pub type Graphon = SbmGraphon<f64>;
pub type Gram = EmbeddingGram<f64>;
pub type Family = EquivalenceFamily<f64>;
pub type Certificate = KktCertificate<f64>;
pub type Solution = GramSolution<f64>;
pub type Options = SolverOptions<f64>;
pub type Grid = SweepGrid<f64>;

pub type Graphon32 = SbmGraphon<f32>;
pub type Gram32 = EmbeddingGram<f32>;
pub type Family32 = EquivalenceFamily<f32>;
pub type Options32 = SolverOptions<f32>;
