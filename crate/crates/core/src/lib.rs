//! Spacelike surfaces in de Sitter 3-space and their twistor lifts.
//!
//! The crate is organized bottom-up:
//!
//! - [`lorentz`]: the Minkowski pairing, so(3,1) with its `k ⊕ p` split, SO₀(3,1).
//! - [`chart`]: finite-difference Wirtinger calculus on rectangular charts.
//! - [`surface`]: conformal immersions, their invariants `(u, H, ξ)` and residuals.
//! - [`twistor`]: the twistor bundle, its fibrations and the structures J′, J″.
//! - [`frames`]: adapted frames, connection matrices, the λ-family and reconstruction.
//! - [`energy`]: twistor and Willmore energies and the Gauss equation solver.

// comparisons are negated on purpose so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod energy;
pub mod error;
pub mod frames;
pub mod lorentz;
pub mod surface;
pub mod twistor;

pub use error::{Error, Result};
