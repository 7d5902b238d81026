use thiserror::Error;

/// Errors raised by the domain routines.
///
/// Numeric payloads are widened to `f64` so the error type is independent of the scalar type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("logit undefined at {0} (domain is the open interval (0, 1))")]
    LogitDomain(f64),

    #[error("degenerate graphon: {0}")]
    Degenerate(String),

    #[error(
        "solver did not converge after {iterations} iterations; best iterate \
         K = [{:.9}, {:.9}, {:.9}], projected-gradient norm {gradient_norm:.3e}",
        best[0], best[1], best[2]
    )]
    NonConvergence {
        iterations: usize,
        best: [f64; 3],
        gradient_norm: f64,
    },

    #[error("gram matrix is not on the rank-one manifold (lambda_min / lambda_max = {ratio:.3e})")]
    NotRankOne { ratio: f64 },

    #[error("eta is undefined: {0}")]
    EtaUndefined(&'static str),

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("edge density is constant along this family (slope {0:.3e}); density cannot identify a member")]
    DegenerateSlope(f64),

    #[error("graphon ({p}, {q}, {r}) is not a member of the family (distance {distance:.3e})")]
    NotInFamily {
        p: f64,
        q: f64,
        r: f64,
        distance: f64,
    },

    #[error("perturbation by h = {h} in {axis} leaves the middle regime")]
    LeavesRegion { axis: &'static str, h: f64 },

    #[error("embedding fit diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("edge list: {0}")]
    EdgeList(String),

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep its message only.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError(e.to_string()))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
