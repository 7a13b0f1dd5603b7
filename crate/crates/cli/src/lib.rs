//! Front end for the engine: job dispatch, JSON/CSV encoding, an on-disk
//! result cache and the verification suites.

pub mod cache;
pub mod check;
pub mod job;
pub mod output;
pub mod wire;
