//! Quantum error-correcting codes built from spin coherent states.
//!
//! The spin-j space (the lowest Landau level of a charge around a monopole)
//! hosts approximate codes whose codewords are coherent states placed at
//! symmetric points of the sphere. This crate provides the spin algebra,
//! Wigner matrices, coherent states and their closed-form matrix elements,
//! the antipodal / equatorial / cyclic code families, approximate
//! Knill–Laflamme verification, a syndrome-extraction simulator, monopole
//! harmonics, and exact finite GKP qudit codes as a baseline.
//!
//! All matrices use the basis ordering `m = j, j-1, ..., -j` (index `i`
//! holds `m = j - i`).

pub mod coherent;
pub mod error;
pub mod finite_gkp;
pub mod lll_codes;
pub mod monopole;
pub mod qec_check;
pub mod recovery;
pub mod reference;
pub mod rotations;
pub mod special;
pub mod spin_core;

pub use error::{Error, Result};
pub use spin_core::{HalfInt, Operator, StateVec};

pub use num_complex::Complex64;
