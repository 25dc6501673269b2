//! Finite-n GUE gap probabilities through orthogonal polynomials for the
//! gap-deformed Hermite weight `e^{-x²}` on `(-∞, -a] ∪ [a, ∞)`, together with
//! residual checks of the algebraic, difference and differential equations
//! satisfied by the associated quantities `R_n(a)`, `r_n(a)` and `σ_n(a)`.

pub mod continuous;
pub mod discrete;
pub mod error;
pub mod fredholm;
pub mod ladder;
pub mod linalg;
pub mod orthopoly;
pub mod precision;
pub mod quadrature;
pub mod residual;
pub mod weight;

pub use error::{Error, Result};
pub use precision::{PrecisionPolicy, Real};
pub use residual::{ResidualEntry, ResidualReport, Tolerances};
