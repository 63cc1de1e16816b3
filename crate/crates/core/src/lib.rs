//! Rearrangement inequalities, sharp exponential constants of Adams and
//! Moser–Trudinger type, and the numerics used to probe their sharpness.
//!
//! Layout:
//! - [`measure`]: finite measure spaces, distribution functions, `f*`, `f**`,
//!   kernel rearrangements `k1*`/`k2*`.
//! - [`exponents`]: the exponent bookkeeping `(β, β′, β₀, γ, p, q, A, B)`.
//! - [`operator`]: integral operators and the improved O'Neil / weak-type checks.
//! - [`symbol`]: sharp constants from kernels and principal symbols.
//! - [`extremal`]: extremal sequences, exponential integrals, sharpness sweeps.
//! - [`garsia`]: the one-dimensional Adams–Garsia functional.

pub mod error;
pub mod exponents;
pub mod extremal;
pub mod garsia;
pub mod measure;
pub mod montecarlo;
pub mod operator;
pub mod optimize;
pub mod quadrature;
pub mod special;
pub mod symbol;

pub use error::{Error, Result};
pub use exponents::ExponentSet;
pub use measure::{FiniteMeasureSpace, RearrangementProfile};
