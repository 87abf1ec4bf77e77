//! Miller–Paris transformations for generalized hypergeometric functions
//! with integral parameter differences, including the degenerate cases, and
//! a harness that checks each identity by independent series evaluation.

pub mod arith;
pub mod charpoly;
pub mod error;
pub mod golden;
pub mod harness;
pub mod hyp;
pub mod poly;
pub mod summation;
pub mod transforms;

pub use arith::{cx, Cx, IpdSpec};
pub use error::{Error, Result};
pub use hyp::{EvalReport, HypSpec};
pub use poly::{CPoly, RootSet};
