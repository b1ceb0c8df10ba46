//! Optimal (r,δ)-locally repairable codes over finite fields, matrix-product
//! codes built from them, and the parameters of the quantum codes they induce.
//!
//! Every property a construction is expected to have (dimension, minimum
//! distance, locality, dual containment, bound equalities) is recomputed
//! exactly rather than taken from the construction.

pub mod error;
pub mod galois;
pub mod matrix;
pub mod code;
pub mod locality;
pub mod mpkit;
pub mod families;
pub mod io;
pub mod cli;

pub use error::{Error, Result};
pub use galois::{Field, FieldElement, GaloisField};
pub use matrix::{Mat, Permutation};
pub use code::{DistanceResult, Duality, LinearCode};
