//! Conditioning of discrete Lyapunov (Stein) equation solutions.
//!
//! * [`stein`]: direct and square-root doubling solvers for `P − APA* = BB*`.
//! * [`normal_form`]: input-normal transforms, completion of input-normal
//!   matrices, bilinear and Cayley maps.
//! * [`bounds`]: analytic lower bounds on `κ(P)` and the low-rank ADI iteration.
//! * [`colored`]: state covariance under autocorrelated forcing.
//! * [`ensemble`] and [`canonical`]: random input-pair ensembles, companion and
//!   Jordan forms.
//!
//! Condition numbers are reported as natural logarithms throughout.

pub mod bounds;
pub mod canonical;
pub mod colored;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod normal_form;
pub mod stein;

pub use error::{Error, Result};
pub use matrix::{CMat, ComplexMatrix, InputPair, Spectrum};
pub use num_complex::Complex64;
