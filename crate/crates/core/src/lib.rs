//! Exact symbolic computation of hyperbolic controller forms.
//!
//! Given a linear hyperbolic PDE-ODE boundary system with several inputs,
//! this crate builds the input parametrization matrix in the shift and
//! derivative operators, reduces it by generalized polynomial long division
//! with entire correction until leading-coefficient extraction succeeds, and
//! emits the resulting explicit delay-differential description together with
//! its controller-form classification. Every symbolic identity produced on
//! the way can be certified numerically by evaluating Laplace symbols at
//! random complex points.

pub mod division;
pub mod document;
pub mod error;
pub mod gpmatrix;
pub mod gpoly;
pub mod hcf;
pub mod oracle;
pub mod pipeline;
pub mod prec;
pub mod scalars;
pub mod system;
pub mod testing;

pub use error::{Error, Result};
pub use gpoly::{GPoly, GPolyP, GPolyR, PolyD, RatD};
pub use scalars::{ConstField, DelayBasis, ExpConst, Exponent, Scalar};
