//! Numerical laboratory for Muntz spaces `M(Lambda)` inside `C[0, 1]`.
//!
//! Builds and checks asymptotically isometric copies of `c_0` from spike
//! functions `x^alpha - x^beta`, and diameter-2 certificates for convex
//! combinations of slices of the unit ball.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod c0;
pub mod error;
pub mod exponents;
pub mod functional;
pub mod numeric;
pub mod octa;
pub mod point;
pub mod poly;
pub mod spikes;

pub use c0::{C0Certificate, ConditionsReport, InequalityReport};
pub use error::{MuntzError, Result};
pub use exponents::{ExponentSequence, Family, SequenceSpec};
pub use functional::{Atom, DiscreteFunctional};
pub use octa::{OctaCertificate, SliceSpec};
pub use point::PointT;
pub use poly::{MuntzPolynomial, SupNorm, Term};
pub use spikes::{SpikeFunction, SpikeProfile};
