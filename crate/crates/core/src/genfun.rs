//! Generating functions tagged with the data they enumerate.

use std::fmt;

use crate::geometry::{Polarization, SurfaceId};
use crate::series::QSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// Integer BPS invariants `Ω`.
    Omega,
    /// Rational invariants `Ω̄`.
    OmegaBar,
    /// `Ω̄` for μ-semistability.
    OmegaBarMu,
    /// Stack invariants `I`.
    Stack,
    /// Stack invariants for μ-semistability.
    StackMu,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flavor::Omega => "omega",
            Flavor::OmegaBar => "omegabar",
            Flavor::OmegaBarMu => "omegabar_mu",
            Flavor::Stack => "stack",
            Flavor::StackMu => "stack_mu",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenFun {
    pub surface: SurfaceId,
    pub r: u32,
    pub c1: Vec<i64>,
    pub polarization: Polarization,
    pub flavor: Flavor,
    pub series: QSeries,
}

impl GenFun {
    pub fn with_series(&self, series: QSeries, flavor: Flavor) -> Self {
        GenFun { series, flavor, ..self.clone() }
    }
}
