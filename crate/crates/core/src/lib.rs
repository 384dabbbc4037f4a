//! Orthonormal polynomials and de la Vallée Poussin means for exponential
//! weights `w(x) = exp(-Q(x))` on the real line.
//!
//! The crate covers the desk-scale numerics for two weight families (Freud
//! powers `Q = |x|^alpha` and Erdős iterated exponentials), the
//! Mhaskar–Rakhmanov–Saff numbers `a_x`, the three-term recurrence of the
//! polynomials orthonormal with respect to `w(t)^2 dt`, stable weighted
//! evaluation of `p_k^(j)(x) w(x)`, Fourier partial sums and de la Vallée
//! Poussin means, Christoffel functions, and a verification harness that
//! turns the weighted norm inequalities satisfied by these objects into
//! ratio-boundedness experiments.
//!
//! All quantities that would overflow in unweighted form (polynomial values,
//! kernels, Christoffel functions) are exposed only in weighted
//! normalization; the raw values are recoverable through `log w`.

// Negated comparisons like `!(x > 0.0)` are deliberate throughout: they
// reject NaN along with the out-of-range sign, which `x <= 0.0` does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod mrs;
pub mod operators;
pub mod orthopoly;
pub mod quad;
pub mod report;
pub mod weights;

pub use error::{Error, Result};
pub use weights::{WeightFamily, WeightSpec};
