//! Rational functions in `v`, kept in lowest terms.
//!
//! Canonical form: the denominator is an ordinary polynomial with nonzero
//! constant term and leading coefficient one; any power of `v` lives in the
//! numerator. Denominators met in practice are products of cyclotomic
//! polynomials, so reduction first tries trial division by those factors and
//! only falls back to a Euclidean gcd when that fails.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use num_rational::BigRational;
use num_traits::{One, Zero};
use parking_lot::RwLock;

use super::vpoly::VPoly;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WRat {
    num: VPoly,
    den: VPoly,
}

/// `Φ_n(v)` as an integer polynomial.
pub fn cyclotomic(n: usize) -> VPoly {
    static TABLE: OnceLock<RwLock<HashMap<usize, VPoly>>> = OnceLock::new();
    let table = TABLE.get_or_init(Default::default);
    if let Some(p) = table.read().get(&n) {
        return p.clone();
    }
    let mut p = &VPoly::v_pow(n as i64) - &VPoly::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = p.div_exact(&cyclotomic(d));
        }
    }
    table.write().insert(n, p.clone());
    p
}

/// Factorization of a monic denominator into cyclotomic factors, if it has one.
fn cyclotomic_factors(d: &VPoly) -> Option<Vec<(usize, u32)>> {
    static MEMO: OnceLock<RwLock<HashMap<VPoly, Option<Vec<(usize, u32)>>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(f) = memo.read().get(d) {
        return f.clone();
    }
    let result = (|| {
        if !d.is_integral() || !d.leading_coeff().is_one() {
            return None;
        }
        let mut rest = d.clone();
        let mut out = Vec::new();
        let deg = d.high() as usize;
        // φ(n) ≤ deg forces n ≤ deg² for the sizes seen here; cap the scan.
        let mut n = 1;
        while rest.high() > 0 && n <= 4 * deg + 8 {
            let phi = cyclotomic(n);
            if phi.high() <= rest.high() {
                let mut e = 0;
                loop {
                    let (q, r) = rest.div_rem(&phi);
                    if !r.is_zero() {
                        break;
                    }
                    rest = q;
                    e += 1;
                }
                if e > 0 {
                    out.push((n, e));
                }
            }
            n += 1;
        }
        if rest.is_one() {
            Some(out)
        } else {
            None
        }
    })();
    memo.write().insert(d.clone(), result.clone());
    result
}

/// Least common multiple of two monic denominators.
pub(crate) fn den_lcm(a: &VPoly, b: &VPoly) -> VPoly {
    if a == b || b.is_one() {
        return a.clone();
    }
    if a.is_one() {
        return b.clone();
    }
    if let (Some(fa), Some(fb)) = (cyclotomic_factors(a), cyclotomic_factors(b)) {
        let mut out = a.clone();
        for (n, eb) in fb {
            let ea = fa.iter().find(|(m, _)| *m == n).map_or(0, |(_, e)| *e);
            for _ in ea..eb {
                out = &out * &cyclotomic(n);
            }
        }
        return out;
    }
    let g = VPoly::gcd(a, b);
    a * &b.div_exact(&g)
}

impl WRat {
    pub fn zero() -> Self {
        WRat { num: VPoly::zero(), den: VPoly::one() }
    }

    pub fn one() -> Self {
        WRat { num: VPoly::one(), den: VPoly::one() }
    }

    pub fn from_poly(p: VPoly) -> Self {
        WRat { num: p, den: VPoly::one() }
    }

    pub fn from_rational(c: BigRational) -> Self {
        Self::from_poly(VPoly::constant(c))
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_poly(VPoly::from_int(c))
    }

    /// `w^k`
    pub fn w_pow(k: i64) -> Self {
        Self::from_poly(VPoly::w_pow(k))
    }

    /// `w − w⁻¹`
    pub fn w_minus_winv() -> Self {
        Self::from_poly(VPoly::from_ints(-2, &[-1, 0, 0, 0, 1]))
    }

    pub fn new(num: VPoly, den: VPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let shift = num.low() - den.low();
        let mut n = num.shift(-num.low());
        let mut d = den.shift(-den.low());
        if d.high() > 0 {
            let lc = d.leading_coeff();
            if !lc.is_one() {
                let inv = lc.recip();
                n = n.scale(&inv);
                d = d.scale(&inv);
            }
            if let Some(factors) = cyclotomic_factors(&d) {
                for (k, e) in factors {
                    let phi = cyclotomic(k);
                    for _ in 0..e {
                        if n.high() < phi.high() {
                            break;
                        }
                        let (q, r) = n.div_rem(&phi);
                        if !r.is_zero() {
                            break;
                        }
                        n = q;
                        d = d.div_exact(&phi);
                    }
                }
            } else {
                let g = VPoly::gcd(&n, &d);
                if g.high() > 0 {
                    n = n.div_exact(&g);
                    d = d.div_exact(&g);
                }
            }
        }
        if d.high() == 0 {
            let c = d.coeff(0);
            n = n.scale(&c.recip());
            d = VPoly::one();
        }
        WRat { num: n.shift(shift), den: d }
    }

    pub fn numer(&self) -> &VPoly {
        &self.num
    }

    pub fn denom(&self) -> &VPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True when the denominator is one.
    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_poly(&self) -> Option<&VPoly> {
        self.is_poly().then_some(&self.num)
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        WRat { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_poly(&self, p: &VPoly) -> Self {
        if p.is_monomial() {
            return WRat { num: &self.num * p, den: self.den.clone() };
        }
        if self.den.is_one() {
            return Self::from_poly(&self.num * p);
        }
        Self::new(&self.num * p, self.den.clone())
    }

    pub fn pow(&self, n: i32) -> Self {
        let base = if n < 0 { self.recip() } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// Apply a sign-twisted substitution `v^e ↦ ±v^{m e}` to numerator and denominator.
    pub fn substitute_with<F: Fn(i64) -> bool + Copy>(&self, m: i64, negate: F) -> Self {
        Self::new(self.num.substitute_with(m, negate), self.den.substitute_with(m, negate))
    }

    /// `v ↦ v⁻¹`
    pub fn reflect(&self) -> Self {
        Self::new(self.num.reflect(), self.den.reflect())
    }

    pub fn has_even_support(&self) -> bool {
        self.num.has_even_support() && self.den.has_even_support()
    }

    /// Value at `v = 1`, if finite.
    pub fn eval_at_one(&self) -> Option<BigRational> {
        let d = self.den.eval_at_one();
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_at_one() / d)
    }
}

impl std::ops::Add for &WRat {
    type Output = WRat;
    fn add(self, rhs: &WRat) -> WRat {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if self.den == rhs.den {
            if self.den.is_one() {
                return WRat::from_poly(&self.num + &rhs.num);
            }
            return WRat::new(&self.num + &rhs.num, self.den.clone());
        }
        if rhs.den.is_one() {
            return WRat::new(&self.num + &(&rhs.num * &self.den), self.den.clone());
        }
        if self.den.is_one() {
            return WRat::new(&(&self.num * &rhs.den) + &rhs.num, rhs.den.clone());
        }
        WRat::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
    }
}

impl std::ops::Neg for &WRat {
    type Output = WRat;
    fn neg(self) -> WRat {
        WRat { num: -&self.num, den: self.den.clone() }
    }
}
impl std::ops::Neg for WRat {
    type Output = WRat;
    fn neg(self) -> WRat {
        -&self
    }
}

impl std::ops::Sub for &WRat {
    type Output = WRat;
    fn sub(self, rhs: &WRat) -> WRat {
        self + &(-rhs)
    }
}

impl std::ops::Mul for &WRat {
    type Output = WRat;
    fn mul(self, rhs: &WRat) -> WRat {
        if self.is_zero() || rhs.is_zero() {
            return WRat::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return WRat::from_poly(&self.num * &rhs.num);
        }
        WRat::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl std::ops::Div for &WRat {
    type Output = WRat;
    fn div(self, rhs: &WRat) -> WRat {
        assert!(!rhs.is_zero(), "division by zero");
        WRat::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr for WRat {
            type Output = WRat;
            fn $m(self, rhs: WRat) -> WRat {
                (&self).$m(&rhs)
            }
        }
        impl std::ops::$tr<&WRat> for WRat {
            type Output = WRat;
            fn $m(self, rhs: &WRat) -> WRat {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl From<VPoly> for WRat {
    fn from(p: VPoly) -> Self {
        WRat::from_poly(p)
    }
}

impl From<i64> for WRat {
    fn from(c: i64) -> Self {
        WRat::from_int(c)
    }
}

impl fmt::Display for WRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(k: i64) -> WRat {
        WRat::w_pow(k)
    }

    #[test]
    fn cyclotomic_small() {
        assert_eq!(cyclotomic(1), VPoly::from_ints(0, &[-1, 1]));
        assert_eq!(cyclotomic(4), VPoly::from_ints(0, &[1, 0, 1]));
        assert_eq!(cyclotomic(6), VPoly::from_ints(0, &[1, -1, 1]));
        assert_eq!(cyclotomic(12), VPoly::from_ints(0, &[1, 0, -1, 0, 1]));
    }

    #[test]
    fn one_over_w_minus_winv() {
        // -w/(1-w²) = 1/(w - w⁻¹)
        let a = &(-&w(1)) / &(&WRat::one() - &w(2));
        let b = WRat::w_minus_winv().recip();
        assert_eq!(a, b);
        assert_eq!(b.numer(), &VPoly::v_pow(2));
        assert_eq!(b.denom(), &VPoly::from_ints(0, &[-1, 0, 0, 0, 1]));
    }

    #[test]
    fn canonical_after_cancellation() {
        let a = &(&w(2) - &WRat::one()) / &(&w(4) - &WRat::one());
        let b = (&w(2) + &WRat::one()).recip();
        assert_eq!(a, b);
        let half = WRat::from_rational(BigRational::new(1.into(), 2.into()));
        assert_eq!(&half + &half, WRat::one());
    }

    #[test]
    fn non_cyclotomic_denominator_uses_gcd() {
        let p = WRat::from_poly(VPoly::from_ints(0, &[3, 1]));
        let q = WRat::from_poly(VPoly::from_ints(0, &[5, 0, 1]));
        let r = &(&p * &q) / &(&q * &q);
        assert_eq!(r, &p / &q);
    }

    #[test]
    fn eval_at_one() {
        let a = &(&WRat::one() - &w(4)) / &(&WRat::one() - &w(2));
        assert_eq!(a.eval_at_one(), Some(BigRational::from_integer(2.into())));
        assert_eq!(WRat::w_minus_winv().recip().eval_at_one(), None);
    }
}
