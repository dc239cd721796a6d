//! Proof kernel, checker and analysis toolkit for cyclic proofs in the base
//! system of first-order inductive definitions.

pub mod syntax;
pub mod congruence;
pub mod proofgraph;
pub mod trace;
pub mod analysis;
pub mod fixtures;
