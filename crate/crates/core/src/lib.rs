//! Realizability and catalysis analysis for pure-state transformations on a
//! bipartite system A⊗B.
//!
//! A transformation is given as pairs `|a_i⟩ → |b_i⟩`. The crate decides
//! whether some unitary on A⊗B plus an environment implements it, builds
//! that unitary, checks whether Alice's factor survives every pair, and
//! searches for a separable input whose image is entangled.

pub mod catalysis;
pub mod cli;
pub mod numerics;
pub mod process;
pub mod quantum;
pub mod teleport;

pub use numerics::{ComplexScalar, DenseMatrix, DenseVector, DEFAULT_TOLERANCE};
pub use quantum::PureState;
