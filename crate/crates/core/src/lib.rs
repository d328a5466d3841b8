//! Representation theory of groups generated by lattice translations and
//! modulations on L²(R^d).
//!
//! The exact layer (lattices, group law, dual parametrization, induced
//! representations) is over [`Integer`] and [`Rational`]. Sampled signals,
//! Zak transforms and frame sums are generic over [`scalar::Real`].

pub mod cli;
pub mod dual;
pub mod gabor;
pub mod group;
pub mod heisenberg;
pub mod lattice;
pub mod matrix;
pub mod plancherel;
pub mod scalar;

pub use dual::{DualParameter, InducedRepresentation, MonomialMatrix, RationalDual};
pub use group::{classify, classify_irrational, GroupElement, GroupKind, GroupSpec};
pub use lattice::Lattice;
pub use matrix::{IntegerMatrix, Matrix, RationalMatrix};
pub use plancherel::{GroupFunction, PlancherelConfig, PlancherelEngine};
pub use scalar::{Integer, Rational};

/// Signals on the default float type.
pub type Signal = gabor::SampledSignal<f64>;
