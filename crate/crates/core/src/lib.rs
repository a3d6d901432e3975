//! Width measures for morphisms in monoidal categories.
//!
//! A decomposition of a morphism is a syntax tree over sequential composition
//! and monoidal product; its width is the most expensive atom or cut it
//! contains, and the width of a morphism is the width of its cheapest
//! decomposition. This crate implements the generic decomposition machinery
//! and instantiates it in three concrete algebras — natural-number matrices,
//! cospans of hypergraphs, and graphs with boundaries — together with the
//! constructive conversions from tree, branch and rank decompositions, and
//! brute-force oracles that certify the resulting width bounds on small
//! instances.

pub mod bialg;
pub mod boundary;
pub mod branch;
pub mod cospan;
pub mod decomp;
pub mod error;
pub mod instances;
pub mod matrix;
pub mod oracle;

pub use error::{Error, Result};
