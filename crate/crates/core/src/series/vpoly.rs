//! Laurent polynomials in `v` (with `v² = w`) over the rationals.
//!
//! Coefficients are stored densely as integers over one shared positive
//! denominator. Keeping the integer part separate lets products run on
//! machine integers most of the time.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug)]
pub struct VPoly {
    low: i64,
    coeffs: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for VPoly {
    fn eq(&self, other: &Self) -> bool {
        self.low == other.low && self.den == other.den && self.coeffs == other.coeffs
    }
}
impl Eq for VPoly {}

impl Hash for VPoly {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.low.hash(state);
        self.den.hash(state);
        self.coeffs.hash(state);
    }
}

fn bits(x: &BigInt) -> u64 {
    x.bits()
}

/// Integer convolution of two coefficient vectors, skipping zero entries.
fn convolve(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let n = a.len() + b.len() - 1;
    let ba = a.iter().map(bits).max().unwrap_or(0);
    let bb = b.iter().map(bits).max().unwrap_or(0);
    let terms = a.len().min(b.len()) as u64;
    let headroom = 64 - terms.leading_zeros() as u64;
    if ba + bb + headroom < 126 {
        let sa: Vec<(usize, i128)> =
            a.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.to_i128().unwrap())).collect();
        let sb: Vec<(usize, i128)> =
            b.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.to_i128().unwrap())).collect();
        let mut out = vec![0i128; n];
        for &(i, x) in &sa {
            for &(j, y) in &sb {
                out[i + j] += x * y;
            }
        }
        return out.into_iter().map(BigInt::from).collect();
    }
    let mut out = vec![BigInt::zero(); n];
    let sb: Vec<(usize, &BigInt)> = b.iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for &(j, y) in &sb {
            out[i + j] += x * y;
        }
    }
    out
}

impl VPoly {
    pub fn zero() -> Self {
        VPoly { low: 0, coeffs: Vec::new(), den: BigInt::one() }
    }

    pub fn one() -> Self {
        Self::monomial(0, BigRational::one())
    }

    pub fn monomial(exp: i64, c: BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        VPoly { low: exp, coeffs: vec![c.numer().clone()], den: c.denom().clone() }
    }

    /// `v^exp`
    pub fn v_pow(exp: i64) -> Self {
        Self::monomial(exp, BigRational::one())
    }

    /// `w^exp = v^{2 exp}`
    pub fn w_pow(exp: i64) -> Self {
        Self::v_pow(2 * exp)
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, c)
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(c.into()))
    }

    /// Builds from integer coefficients starting at `low`.
    pub fn from_ints(low: i64, coeffs: &[i64]) -> Self {
        Self::from_parts(low, coeffs.iter().map(|&c| BigInt::from(c)).collect(), BigInt::one())
    }

    /// Builds from `(v-exponent, coefficient)` pairs; repeated exponents add up.
    pub fn from_terms<I: IntoIterator<Item = (i64, BigRational)>>(terms: I) -> Self {
        let mut acc = Self::zero();
        for (e, c) in terms {
            acc = &acc + &Self::monomial(e, c);
        }
        acc
    }

    pub fn from_parts(low: i64, coeffs: Vec<BigInt>, den: BigInt) -> Self {
        let mut p = VPoly { low, coeffs, den };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        let Some(first) = lead else {
            *self = Self::zero();
            return;
        };
        let last = self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap();
        if first > 0 || last + 1 < self.coeffs.len() {
            self.coeffs.truncate(last + 1);
            self.coeffs.drain(..first);
            self.low += first as i64;
        }
        if self.den.is_negative() {
            self.den = -std::mem::take(&mut self.den);
            for c in &mut self.coeffs {
                *c = -std::mem::take(c);
            }
        }
        if !self.den.is_one() {
            let mut g = self.den.clone();
            for c in &self.coeffs {
                if g.is_one() {
                    break;
                }
                g = g.gcd(c);
            }
            if !g.is_one() {
                self.den /= &g;
                for c in &mut self.coeffs {
                    *c /= &g;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.low == 0 && self.coeffs.len() == 1 && self.coeffs[0] == self.den
    }

    /// True when the polynomial is `c·v^k` for some `k`.
    pub fn is_monomial(&self) -> bool {
        self.coeffs.len() == 1
    }

    /// True when all coefficients are integers.
    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Lowest v-exponent with a nonzero coefficient (0 for the zero polynomial).
    pub fn low(&self) -> i64 {
        self.low
    }

    /// Highest v-exponent with a nonzero coefficient.
    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn int_coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn common_den(&self) -> &BigInt {
        &self.den
    }

    pub fn coeff(&self, exp: i64) -> BigRational {
        let i = exp - self.low;
        if i < 0 || i >= self.coeffs.len() as i64 {
            return BigRational::zero();
        }
        BigRational::new(self.coeffs[i as usize].clone(), self.den.clone())
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.coeff(self.high())
    }

    pub fn trailing_coeff(&self) -> BigRational {
        self.coeff(self.low)
    }

    /// Nonzero `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> Vec<(i64, BigRational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.low + i as i64, BigRational::new(c.clone(), self.den.clone())))
            .collect()
    }

    /// True when every nonzero coefficient sits at an even v-exponent.
    pub fn has_even_support(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(i, c)| c.is_zero() || (self.low + i as i64) % 2 == 0)
    }

    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        VPoly { low: self.low + k, coeffs: self.coeffs.clone(), den: self.den.clone() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() || self.is_zero() {
            return Self::zero();
        }
        Self::from_parts(self.low, self.coeffs.iter().map(|x| x * c.numer()).collect(), &self.den * c.denom())
    }

    pub fn eval_at_one(&self) -> BigRational {
        let s: BigInt = self.coeffs.iter().sum();
        BigRational::new(s, self.den.clone())
    }

    /// `v ↦ v⁻¹`
    pub fn reflect(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = self.coeffs.clone();
        c.reverse();
        VPoly { low: -self.high(), coeffs: c, den: self.den.clone() }
    }

    /// `v^e ↦ sign(e)·v^{m e}`
    pub fn substitute_with<F: Fn(i64) -> bool>(&self, m: i64, negate: F) -> Self {
        assert!(m >= 1);
        if self.is_zero() {
            return Self::zero();
        }
        let len = (self.coeffs.len() - 1) * m as usize + 1;
        let mut out = vec![BigInt::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.low + i as i64;
            out[i * m as usize] = if negate(e) { -c } else { c.clone() };
        }
        VPoly { low: self.low * m, coeffs: out, den: self.den.clone() }
    }

    fn add_signed(&self, other: &Self, negate: bool) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { -other } else { other.clone() };
        }
        let low = self.low.min(other.low);
        let high = self.high().max(other.high());
        let len = (high - low + 1) as usize;
        let (fa, fb, den) = if self.den == other.den {
            (BigInt::one(), BigInt::one(), self.den.clone())
        } else {
            let l = self.den.lcm(&other.den);
            (&l / &self.den, &l / &other.den, l)
        };
        let mut out = vec![BigInt::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = (self.low - low) as usize + i;
            out[k] = if fa.is_one() { c.clone() } else { c * &fa };
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            let k = (other.low - low) as usize + i;
            let t = if fb.is_one() { c.clone() } else { c * &fb };
            if negate {
                out[k] -= t;
            } else {
                out[k] += t;
            }
        }
        Self::from_parts(low, out, den)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let coeffs = convolve(&self.coeffs, &other.coeffs);
        let den = &self.den * &other.den;
        let mut p = VPoly { low: self.low + other.low, coeffs, den };
        if !p.den.is_one() {
            p.normalize();
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Polynomial division with remainder, treating both as polynomials in
    /// `v` after the common lowest power has been factored out of `divisor`.
    /// Only valid when `divisor.low() == 0` and `self.low() >= 0`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        assert!(divisor.low == 0 && (self.is_zero() || self.low >= 0));
        if self.is_zero() || self.high() < divisor.high() {
            return (Self::zero(), self.clone());
        }
        let dl = divisor.leading_coeff();
        let ddeg = divisor.high() as usize;
        if dl.is_one() && divisor.is_integral() {
            // Monic integer divisor: stay in integers.
            let mut rem: Vec<BigInt> = vec![BigInt::zero(); (self.high() + 1) as usize];
            for (i, c) in self.coeffs.iter().enumerate() {
                rem[self.low as usize + i] = c.clone();
            }
            let qdeg = rem.len() - 1 - ddeg;
            let mut quo = vec![BigInt::zero(); qdeg + 1];
            for k in (0..=qdeg).rev() {
                let c = std::mem::take(&mut rem[k + ddeg]);
                if c.is_zero() {
                    continue;
                }
                for (j, d) in divisor.coeffs.iter().enumerate().take(ddeg) {
                    if !d.is_zero() {
                        rem[k + j] -= &c * d;
                    }
                }
                quo[k] = c;
            }
            return (Self::from_parts(0, quo, self.den.clone()), Self::from_parts(0, rem, self.den.clone()));
        }
        let mut rem: Vec<BigRational> = vec![BigRational::zero(); (self.high() + 1) as usize];
        for (e, c) in self.terms() {
            rem[e as usize] = c;
        }
        let dv: Vec<BigRational> = (0..=ddeg as i64).map(|e| divisor.coeff(e)).collect();
        let qdeg = rem.len() - 1 - ddeg;
        let mut quo = vec![BigRational::zero(); qdeg + 1];
        for k in (0..=qdeg).rev() {
            let c = &rem[k + ddeg] / &dl;
            if c.is_zero() {
                continue;
            }
            for j in 0..=ddeg {
                let t = &c * &dv[j];
                rem[k + j] -= t;
            }
            quo[k] = c;
        }
        (
            Self::from_terms(quo.into_iter().enumerate().map(|(i, c)| (i as i64, c))),
            Self::from_terms(rem.into_iter().enumerate().map(|(i, c)| (i as i64, c))),
        )
    }

    /// Exact quotient; panics when the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Self) -> Self {
        let shift = divisor.low;
        let d = divisor.shift(-shift);
        let lift = if self.low < 0 { -self.low } else { 0 };
        let (q, r) = self.shift(lift).div_rem(&d);
        assert!(r.is_zero(), "inexact polynomial division");
        q.shift(-lift - shift)
    }

    /// Integer primitive part with positive leading coefficient.
    fn primitive(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        let sgn = self.coeffs.last().unwrap().sign() == Sign::Minus;
        let coeffs = self.coeffs.iter().map(|c| if sgn { -(c / &g) } else { c / &g }).collect();
        VPoly { low: self.low, coeffs, den: BigInt::one() }
    }

    /// Monic gcd of two ordinary polynomials (lowest exponent ≥ 0).
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut x, mut y) = (a.primitive(), b.primitive());
        if x.is_zero() {
            return y.monic();
        }
        if y.is_zero() {
            return x.monic();
        }
        let common = x.low.min(y.low);
        x = x.shift(-x.low);
        y = y.shift(-y.low);
        if x.high() < y.high() {
            std::mem::swap(&mut x, &mut y);
        }
        while !y.is_zero() {
            if y.high() == 0 {
                return Self::v_pow(common);
            }
            let r = pseudo_rem(&x, &y);
            x = y;
            y = r.primitive();
        }
        x.monic().shift(common)
    }

    /// Scales so that the highest-exponent coefficient equals one.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let lc = self.leading_coeff();
        self.scale(&lc.recip())
    }
}

/// Pseudo-remainder `lc(b)^k · a mod b` over the integers.
fn pseudo_rem(a: &VPoly, b: &VPoly) -> VPoly {
    let mut rem: Vec<BigInt> = vec![BigInt::zero(); (a.high() + 1) as usize];
    for (i, c) in a.coeffs.iter().enumerate() {
        rem[a.low as usize + i] = c.clone();
    }
    let bdeg = b.high() as usize;
    let bl = b.coeffs.last().unwrap().clone();
    let mut bfull = vec![BigInt::zero(); bdeg + 1];
    for (i, c) in b.coeffs.iter().enumerate() {
        bfull[b.low as usize + i] = c.clone();
    }
    let mut top = rem.len();
    while top > bdeg {
        let k = top - 1;
        let c = std::mem::take(&mut rem[k]);
        top -= 1;
        if c.is_zero() {
            continue;
        }
        for r in rem.iter_mut().take(k) {
            *r *= &bl;
        }
        let off = k - bdeg;
        for j in 0..bdeg {
            if !bfull[j].is_zero() {
                rem[off + j] -= &c * &bfull[j];
            }
        }
    }
    rem.truncate(bdeg);
    VPoly::from_parts(0, rem, BigInt::one())
}

impl std::ops::Add for &VPoly {
    type Output = VPoly;
    fn add(self, rhs: &VPoly) -> VPoly {
        self.add_signed(rhs, false)
    }
}
impl std::ops::Sub for &VPoly {
    type Output = VPoly;
    fn sub(self, rhs: &VPoly) -> VPoly {
        self.add_signed(rhs, true)
    }
}
impl std::ops::Mul for &VPoly {
    type Output = VPoly;
    fn mul(self, rhs: &VPoly) -> VPoly {
        self.mul_ref(rhs)
    }
}
impl std::ops::Neg for &VPoly {
    type Output = VPoly;
    fn neg(self) -> VPoly {
        VPoly { low: self.low, coeffs: self.coeffs.iter().map(|c| -c).collect(), den: self.den.clone() }
    }
}
impl std::ops::Neg for VPoly {
    type Output = VPoly;
    fn neg(self) -> VPoly {
        -&self
    }
}

impl PartialOrd for VPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for VPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.low, &self.den, &self.coeffs).cmp(&(other.low, &other.den, &other.coeffs))
    }
}

impl fmt::Display for VPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms().into_iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_c = !a.is_one() || e == 0;
            if show_c {
                write!(f, "{a}")?;
            }
            match e {
                0 => {}
                1 => write!(f, "{}v", if show_c { "*" } else { "" })?,
                _ => write!(f, "{}v^{e}", if show_c { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}
