//! Arbitrary-precision scalar, precision schedule and the special functions
//! the moment computations rely on.

mod policy;
mod real;
pub mod special;

pub use policy::PrecisionPolicy;
pub use real::{agreement_digits, bits_to_digits, Real, MIN_PRECISION};
pub use special::{erf, erfc, lower_incomplete_gamma, upper_incomplete_gamma};
