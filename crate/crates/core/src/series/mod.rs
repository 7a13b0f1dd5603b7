//! Exact algebra: Laurent polynomials and rational functions in the
//! refinement variable, and truncated q-series with rational exponents.

mod qseries;
mod vpoly;
mod wrat;

pub use qseries::{QSeries, Substitution};
pub use vpoly::VPoly;
pub use wrat::{cyclotomic, WRat};

use num_rational::Ratio;

/// Exponent of `q`. Denominators stay small (divisors of 24 times small
/// lattice factors), so machine-word fractions are enough.
pub type QExp = Ratio<i64>;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("non-invertible zero series")]
    NonInvertible,
    #[error("series without cutoff has no exact inverse")]
    InexactInverse,
    #[error("substitution factor must be positive")]
    BadSubstitution,
    #[error("multicover substitution needs integer powers of w")]
    HalfIntegerSupport,
}

/// `p/q` as a q-exponent.
pub fn qexp(p: i64, q: i64) -> QExp {
    QExp::new(p, q)
}

/// Small-integer rational.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}
