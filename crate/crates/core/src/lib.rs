//! Exact engine for generating functions of refined invariants of
//! semistable sheaves on Hirzebruch surfaces and the projective plane.

pub mod blowup;
mod error;
pub mod genfun;
pub mod geometry;
pub mod hn;
pub mod invariants;
pub mod memo;
pub mod modular;
pub mod series;
pub mod wallcross;

pub use error::{BpsError, Result};
