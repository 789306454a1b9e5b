//! Arbitrary-precision compositional half-iterates.
//!
//! * [`halfexp`]: `exp^[1/2]` (ψ), `ln^[1/2]` and the half-iterate ξ of `e^x - 1`,
//!   built from the Abel function of `e^x - 1` ([`abel`]) and the conjugation
//!   function h that carries `exp` onto `e^x - 1` ([`conj`]).
//! * [`quad`]: the half-iterate f of `1 + x^2` via a plain square-root iteration.
//! * [`asympoly`]: the exact-rational polynomials of the power-logarithmic
//!   expansion of `y_n = ln(1 + y_{n-1})`.
//! * [`numerics`]: precision contexts, `BigReal`, root finding and finite differences.
//! * [`cli`]: evaluation, tables and the reference-constant corpus behind the `demi` binary.

pub mod abel;
pub mod asympoly;
pub mod cli;
pub mod conj;
pub mod error;
pub mod halfexp;
pub mod numerics;
pub mod quad;

pub use error::{Error, Result};
pub use numerics::{BigReal, Bracket, PrecisionContext};
