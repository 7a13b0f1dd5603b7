//! JSON encoding of series and tables. Exponents and coefficients are exact
//! fraction strings.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use bps_core::invariants::{InvariantTable, TableRow};
use bps_core::series::{QExp, QSeries, VPoly, WRat};

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("bad fraction {0:?}")]
    Fraction(String),
    #[error("zero denominator polynomial")]
    ZeroDenominator,
    #[error("non-integral c2 {0}")]
    Chern(String),
}

/// Laurent polynomial in `v`: coefficient `i` belongs to `v^(low + i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyWire {
    pub low: i64,
    pub coeffs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffWire {
    pub num: PolyWire,
    pub den: PolyWire,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermWire {
    pub exponent: String,
    pub coefficient: CoeffWire,
}

/// A q-series; `cutoff: null` marks an exact (finite) series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesWire {
    pub cutoff: Option<String>,
    pub terms: Vec<TermWire>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowWire {
    pub c2: i64,
    pub delta: String,
    pub dim: i64,
    pub betti: Vec<i64>,
    pub euler: i64,
}

fn poly_to_wire(p: &VPoly) -> PolyWire {
    if p.is_zero() {
        return PolyWire { low: 0, coeffs: Vec::new() };
    }
    let coeffs = (p.low()..=p.high()).map(|e| p.coeff(e).to_string()).collect();
    PolyWire { low: p.low(), coeffs }
}

fn parse_big(s: &str) -> Result<BigRational, WireError> {
    BigRational::from_str(s).map_err(|_| WireError::Fraction(s.to_string()))
}

pub fn parse_exponent(s: &str) -> Result<QExp, WireError> {
    QExp::from_str(s).map_err(|_| WireError::Fraction(s.to_string()))
}

fn poly_from_wire(w: &PolyWire) -> Result<VPoly, WireError> {
    let coeffs = w.coeffs.iter().map(|c| parse_big(c)).collect::<Result<Vec<_>, _>>()?;
    let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
    Ok(VPoly::from_parts(w.low, ints, den))
}

pub fn coeff_to_wire(c: &WRat) -> CoeffWire {
    CoeffWire { num: poly_to_wire(c.numer()), den: poly_to_wire(c.denom()) }
}

pub fn coeff_from_wire(w: &CoeffWire) -> Result<WRat, WireError> {
    let den = poly_from_wire(&w.den)?;
    if den.is_zero() {
        return Err(WireError::ZeroDenominator);
    }
    Ok(WRat::new(poly_from_wire(&w.num)?, den))
}

pub fn series_to_wire(s: &QSeries) -> SeriesWire {
    SeriesWire {
        cutoff: s.cutoff().map(|c| c.to_string()),
        terms: s.terms().map(|(e, c)| TermWire { exponent: e.to_string(), coefficient: coeff_to_wire(c) }).collect(),
    }
}

pub fn series_from_wire(w: &SeriesWire) -> Result<QSeries, WireError> {
    let cutoff = w.cutoff.as_deref().map(parse_exponent).transpose()?;
    let mut terms = Vec::with_capacity(w.terms.len());
    for t in &w.terms {
        terms.push((parse_exponent(&t.exponent)?, coeff_from_wire(&t.coefficient)?));
    }
    Ok(QSeries::from_terms(terms, cutoff))
}

pub fn row_to_wire(row: &TableRow) -> Result<RowWire, WireError> {
    if !row.c2.is_integer() {
        return Err(WireError::Chern(row.c2.to_string()));
    }
    Ok(RowWire {
        c2: row.c2.to_integer(),
        delta: row.delta.to_string(),
        dim: row.dim,
        betti: row.betti.clone(),
        euler: row.euler,
    })
}

pub fn table_to_wire(t: &InvariantTable) -> Result<Vec<RowWire>, WireError> {
    t.rows.iter().map(row_to_wire).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use bps_core::geometry::SurfaceId;
    use bps_core::modular::{eta_series, rank1_series};
    use bps_core::series::qexp;
    use proptest::prelude::*;

    fn round_trip(s: &QSeries) -> QSeries {
        let text = serde_json::to_string(&series_to_wire(s)).unwrap();
        series_from_wire(&serde_json::from_str(&text).unwrap()).unwrap()
    }

    #[test]
    fn rank_one_leading_coefficient() {
        let s = rank1_series(SurfaceId::Hirzebruch(1), qexp(2, 1));
        let w = series_to_wire(&s);
        let lead = &w.terms[0].coefficient;
        // v²/(v⁴ − 1) = 1/(w − w⁻¹)
        assert_eq!(lead.num, PolyWire { low: 2, coeffs: vec!["1".into()] });
        assert_eq!(lead.den, PolyWire { low: 0, coeffs: ["-1", "0", "0", "0", "1"].map(String::from).to_vec() });
        assert_eq!(coeff_from_wire(lead).unwrap(), WRat::w_minus_winv().recip());
        assert_eq!(w.terms[0].exponent, "-1/6");
    }

    #[test]
    fn known_series_round_trip() {
        for s in [
            rank1_series(SurfaceId::ProjectivePlane, qexp(6, 1)),
            rank1_series(SurfaceId::Hirzebruch(2), qexp(5, 1)),
            eta_series(qexp(9, 2)),
            QSeries::zero_to(qexp(1, 3)),
            QSeries::one(),
        ] {
            assert_eq!(round_trip(&s), s);
        }
    }

    #[test]
    fn bad_fraction_rejected() {
        let w = SeriesWire { cutoff: Some("1/x".into()), terms: Vec::new() };
        assert!(series_from_wire(&w).is_err());
    }

    fn arb_coeff() -> impl Strategy<Value = WRat> {
        (prop::collection::vec(-20i64..20, 1..5), -4i64..4, 1i64..7, 0usize..3, 1i64..4).prop_map(
            |(nums, low, den, poles, k)| {
                let num = VPoly::from_ints(low, &nums).scale(&BigRational::new(1.into(), den.into()));
                let mut c = WRat::from_poly(num);
                for _ in 0..poles {
                    c = &c / &(&WRat::one() - &WRat::w_pow(k));
                }
                c
            },
        )
    }

    proptest! {
        #[test]
        fn series_round_trip(terms in prop::collection::vec((-12i64..40, 1i64..7, arb_coeff()), 0..8), cut in prop::option::of(40i64..60)) {
            let s = QSeries::from_terms(terms.into_iter().map(|(p, q, c)| (qexp(p, q), c)), cut.map(|c| qexp(c, 6)));
            prop_assert_eq!(round_trip(&s), s);
        }
    }
}
