use thiserror::Error;

use crate::arith::Cx;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter spec: {0}")]
    InvalidSpec(String),

    #[error("gamma function pole at {0}")]
    GammaPole(Cx),

    #[error("series does not converge: {0}")]
    NonConvergent(String),

    #[error("bottom parameter {0} is a non-positive integer reached before termination")]
    BottomPole(Cx),

    #[error("normalizer {0} vanishes; use the degenerate (limit) form")]
    DegenerateNormalizer(&'static str),

    #[error("polynomial is identically zero")]
    IdenticallyZero,

    #[error("root finding ill-conditioned: worst scaled residual {0:e}")]
    IllConditioned(f64),

    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("root matching failed: distance {0:e} exceeds bound")]
    MatchingFailure(f64),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
