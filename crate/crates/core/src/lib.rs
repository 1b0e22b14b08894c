//! Projected ensembles of mixed quantum states.
//!
//! The crate builds projected ensembles from evolved statevectors, computes
//! their moment operators and compares them against analytic reference
//! ensembles: the mixed-state deep-thermal ensemble (an `h_sigma`-weighted
//! sum of permutation operators), the Haar ensemble, the generalised
//! Hilbert-Schmidt ensemble and the reweighted-Haar (Scrooge) estimator.
//! Dynamics are provided for the kicked Ising chain, including its self-dual
//! point.
//!
//! Conventions used throughout:
//! - qubit 0 is the most significant bit of a basis index;
//! - bit 0 is the `+1` eigenstate of `Z`;
//! - permutation operators act by pull-back, `|i_1..i_k> -> |i_{s^-1(1)}..i_{s^-1(k)}>`;
//! - the trace norm is the plain sum of absolute eigenvalues (no factor 1/2).

pub mod ensembles;
pub mod error;
pub mod kim;
pub mod limits;
pub mod moment;
pub mod parallel;
pub mod projected;
pub mod seed;
pub mod symm;
pub mod tensor;

pub use error::{Error, Result};
pub use limits::Limits;
pub use num_complex::Complex64 as C64;
