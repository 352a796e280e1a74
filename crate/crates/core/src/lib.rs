//! Exact integer linear algebra and combinatorics for differential posets.
//!
//! The crate is organized around a handful of small layers:
//!
//! * [`matrix`] — dense matrices of arbitrary-precision integers with exact
//!   determinants, characteristic polynomials, and ranks mod p.
//! * [`smith`] — Smith normal forms over the integers, determinantal-divisor
//!   oracles, and cokernel structure.
//! * [`graph`] — graded graphs and dual graded graph pairs, their up/down
//!   operators, and differential-poset validation.
//! * [`families`] — constructors for Young's lattice, Cartesian products,
//!   the Fibonacci posets Z(r), Wagner rank extensions, and the dual graded
//!   graphs of shifted shapes.
//! * [`predict`] — the rank-size driven predictions: spectra, parametrized
//!   Smith entries, specializations, ones counts, and last-entry formulas.
//! * [`enumerate`] — isomorph-free exhaustive generation of partial
//!   differential posets rank by rank.
//! * [`verify`] — the checking harness that compares computed Smith forms
//!   against predictions and reports pass/fail/skip per check.

pub mod enumerate;
pub mod families;
pub mod graph;
pub mod matrix;
pub mod predict;
pub mod smith;
pub mod verify;

pub use graph::{DualPair, GradedGraph, GraphKind};
pub use matrix::IntMatrix;
pub use smith::{CokernelStructure, SmithForm};
