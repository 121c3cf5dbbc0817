//! Demi-linear functionals on smooth test functions of one variable.
//!
//! The test-function calculus (`testfn`, `jet`, `compact`, `quad`) is generic
//! over the real scalar; the functional layer works in `f64`.

pub mod bounds;
pub mod catalog;
pub mod certify;
pub mod cli;
pub mod compact;
pub mod demidef;
pub mod error;
pub mod jet;
pub mod probe;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod suite;
pub mod supportx;
pub mod testfn;

pub use catalog::{Apply, Functional};
pub use compact::{CompactSet, Omega};
pub use demidef::{Gamma, NbhdBall};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use testfn::{Expr, SeminormSpec, SupportHint, TestFn};

/// Double-precision test function.
pub type TestFunction = TestFn<f64>;
/// Single-precision test function.
pub type TestFunction32 = TestFn<f32>;
