//! Borcherds products on the period domain of Enriques surfaces.
//!
//! The crate is organized in layers:
//!
//! * [`qseries`] — exact truncated one- and two-variable Laurent series over
//!   big rationals, η-quotients, `j`, and the Monster denominator identity;
//! * [`modular`] — arbitrary-precision evaluation of η, θ-constants, λ, `j`
//!   and the Weber function on the upper half-plane;
//! * [`lattice`] — quadratic lattices, discriminant groups, Nikulin
//!   invariants and Fincke–Pohst enumeration;
//! * [`enriques`] — the fifteen involution classes, their glue lattices and
//!   tube-domain charts;
//! * [`borcherds`] — numerical and formal evaluation of the level-1 and
//!   level-2 Borcherds products restricted along the period maps;
//! * [`verify`] — the identity suite and JSON reports used by the CLI.

pub mod borcherds;
pub mod error;
pub mod enriques;
pub mod lattice;
pub mod modular;
pub mod qseries;
pub mod verify;

pub use error::{Error, Result};
