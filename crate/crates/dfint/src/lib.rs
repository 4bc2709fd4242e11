//! Exact integrability and creative telescoping for D-finite functions.
//!
//! The engine works in the quotient module A = C(x)[D]/<L> of an Ore algebra
//! with Dx = xD + 1. It computes integral bases, performs Hermite reduction
//! at finite places and at infinity, decides integrability via additive
//! decompositions, and searches for minimal-order telescopers by linear
//! algebra on reduction remainders.

pub mod basis;
pub mod coeff;
pub mod decomp;
pub mod error;
pub mod expr;
pub mod hermite;
pub mod linalg;
pub mod local;
pub mod ore;
pub mod poly;
pub mod ratfunc;
pub mod residue;
pub mod series;
pub mod telescope;

pub use error::{Error, Result};
