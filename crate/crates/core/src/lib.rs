// NaN must fail these range checks, which `!(x > 0.0)` does and `x <= 0.0` does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod allocators;
pub mod channel;
pub mod convexity;
pub mod error;
pub mod instance;
pub mod leakage;
pub mod mmse;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod sca;
pub mod special;
