use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Several variants carry magnitudes as preformatted decimal strings because
/// the underlying values routinely sit far outside the `f64` exponent range.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "{what} did not converge after {iterations} iterations (tail bound reached: {tail_bound})"
    )]
    Convergence {
        what: &'static str,
        iterations: usize,
        tail_bound: String,
    },

    #[error("precision exhausted at {max_bits} bits: only {certified_digits} digits certified")]
    PrecisionExhausted {
        certified_digits: u32,
        max_bits: u32,
    },

    #[error("moment recursion ill-conditioned at index {index} ({bits} bits): non-positive norm")]
    IllConditioned { index: usize, bits: u32 },

    #[error("P_{n}(a) vanishes at the gap edge to working precision (|P_n| / scale = {ratio})")]
    EdgeZero { n: usize, ratio: String },

    #[error("sample z = {z} lies within the pole margin of +-a")]
    SampleNearPole { z: String },

    #[error("degenerate denominator at n = {n} (relative size {relative})")]
    DegenerateDenominator { n: usize, relative: String },

    #[error("no branch of the quadratic matches r_{n}: mismatches {plus} (+) and {minus} (-)")]
    BranchInconsistency {
        n: usize,
        plus: String,
        minus: String,
    },

    #[error("finite-difference error estimate {estimate} exceeds tolerance {tolerance}")]
    InaccurateDerivative { estimate: String, tolerance: String },

    #[error("quadrature did not converge: orders {order} and {doubled} differ by {discrepancy}")]
    QuadratureNonConvergence {
        order: usize,
        doubled: usize,
        discrepancy: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
