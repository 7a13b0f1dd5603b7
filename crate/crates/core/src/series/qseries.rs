//! Sparse truncated series in `q` with rational exponents and [`WRat`] coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::vpoly::VPoly;
use super::wrat::{den_lcm, WRat};
use super::{QExp, SeriesError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSeries {
    terms: BTreeMap<QExp, WRat>,
    /// Exclusive bound on known exponents; `None` means the series is exact.
    cutoff: Option<QExp>,
}

/// Substitution flavour for [`QSeries::substitute`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Substitution {
    /// `q ↦ q^m`, `w ↦ w^m`
    Plain,
    /// `q ↦ q^m`, `w ↦ −(−w)^m`
    Multicover,
}

fn min_cut(a: Option<QExp>, b: Option<QExp>) -> Option<QExp> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

fn add_cut(a: Option<QExp>, b: Option<QExp>) -> Option<QExp> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

impl QSeries {
    /// The zero series, known exactly.
    pub fn zero() -> Self {
        QSeries { terms: BTreeMap::new(), cutoff: None }
    }

    /// The zero series known only below `cutoff`.
    pub fn zero_to(cutoff: QExp) -> Self {
        QSeries { terms: BTreeMap::new(), cutoff: Some(cutoff) }
    }

    pub fn one() -> Self {
        Self::monomial(QExp::zero(), WRat::one())
    }

    pub fn monomial(exp: QExp, c: WRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        QSeries { terms, cutoff: None }
    }

    pub fn constant(c: WRat) -> Self {
        Self::monomial(QExp::zero(), c)
    }

    /// Builds a series from terms, summing repeated exponents and dropping
    /// anything at or beyond the cutoff.
    pub fn from_terms<I: IntoIterator<Item = (QExp, WRat)>>(terms: I, cutoff: Option<QExp>) -> Self {
        let mut s = QSeries { terms: BTreeMap::new(), cutoff };
        for (e, c) in terms {
            s.add_term(e, &c);
        }
        s
    }

    /// Adds `c·q^e` in place; ignored when `e` is at or beyond the cutoff.
    pub fn add_term(&mut self, e: QExp, c: &WRat) {
        if c.is_zero() || self.cutoff.is_some_and(|k| e >= k) {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(old) => {
                let s = &*old + c;
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn cutoff(&self) -> Option<QExp> {
        self.cutoff
    }

    /// Lowers the cutoff, discarding terms beyond it.
    pub fn truncate(&self, cutoff: QExp) -> Self {
        let cut = min_cut(self.cutoff, Some(cutoff));
        QSeries { terms: self.terms.range(..cut.unwrap()).map(|(e, c)| (*e, c.clone())).collect(), cutoff: cut }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&QExp, &WRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: QExp) -> WRat {
        self.terms.get(&e).cloned().unwrap_or_else(WRat::zero)
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn leading(&self) -> Option<(QExp, &WRat)> {
        self.terms.iter().next().map(|(e, c)| (*e, c))
    }

    /// Lowest exponent that could carry a nonzero coefficient: the leading
    /// term, or the cutoff for a zero series.
    fn order(&self) -> Option<QExp> {
        match self.leading() {
            Some((e, _)) => Some(e),
            None => self.cutoff,
        }
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: QExp) -> Self {
        QSeries {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            cutoff: self.cutoff.map(|c| c + k),
        }
    }

    pub fn scale(&self, c: &WRat) -> Self {
        if c.is_zero() {
            return QSeries { terms: BTreeMap::new(), cutoff: self.cutoff };
        }
        QSeries { terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect(), cutoff: self.cutoff }
    }

    pub fn scale_rational(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return QSeries { terms: BTreeMap::new(), cutoff: self.cutoff };
        }
        QSeries { terms: self.terms.iter().map(|(e, x)| (*e, x.scale(c))).collect(), cutoff: self.cutoff }
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        let cutoff = min_cut(self.cutoff, other.cutoff);
        let mut out = QSeries { terms: BTreeMap::new(), cutoff };
        for (e, c) in &self.terms {
            if cutoff.is_none_or(|k| *e < k) {
                out.terms.insert(*e, c.clone());
            }
        }
        for (e, c) in &other.terms {
            if negate {
                out.add_term(*e, &-c);
            } else {
                out.add_term(*e, c);
            }
        }
        out
    }

    /// Exact product. Coefficients on each side are first brought over a
    /// common denominator so the inner loop multiplies polynomials only.
    fn product(&self, other: &Self) -> Self {
        let cutoff = min_cut(add_cut(self.cutoff, other.order()), add_cut(other.cutoff, self.order()));
        let mut out = QSeries { terms: BTreeMap::new(), cutoff };
        if self.is_zero() || other.is_zero() {
            return out;
        }
        let (da, na) = over_common_den(self);
        let (db, nb) = over_common_den(other);
        let den = &da * &db;
        let mut acc: BTreeMap<QExp, VPoly> = BTreeMap::new();
        for (ea, pa) in &na {
            for (eb, pb) in &nb {
                let e = ea + eb;
                if cutoff.is_some_and(|k| e >= k) {
                    // Exponents of `nb` are increasing.
                    break;
                }
                let t = pa * pb;
                match acc.get_mut(&e) {
                    Some(old) => *old = &*old + &t,
                    None => {
                        acc.insert(e, t);
                    }
                }
            }
        }
        for (e, p) in acc {
            if p.is_zero() {
                continue;
            }
            let c = if den.is_one() { WRat::from_poly(p) } else { WRat::new(p, den.clone()) };
            out.terms.insert(e, c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse up to the induced cutoff.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let Some((e0, c0)) = self.leading() else {
            return Err(SeriesError::NonInvertible);
        };
        let Some(cut) = self.cutoff else {
            if self.terms.len() == 1 {
                return Ok(Self::monomial(-e0, c0.recip()));
            }
            return Err(SeriesError::InexactInverse);
        };
        // self = c0 q^{e0} (1 + t), with t supported on positive exponents.
        let rel_cut = cut - e0;
        // Over a common denominator L: a_e = N_e / L.  The inverse takes the
        // form b_x = L Q_x / N_0^{k_x + 1} with polynomial Q_x, where k_x is
        // the longest chain of positive exponents summing to x.
        let (l, nums) = over_common_den(self);
        let nums: Vec<(QExp, VPoly)> = nums.into_iter().map(|(e, p)| (e - e0, p)).collect();
        let n0 = nums[0].1.clone();
        let tail = &nums[1..];
        let mut reach = std::collections::BTreeSet::new();
        reach.insert(QExp::zero());
        let mut frontier: Vec<QExp> = vec![QExp::zero()];
        while let Some(x) = frontier.pop() {
            for (e, _) in tail {
                let y = x + e;
                if y < rel_cut && reach.insert(y) {
                    frontier.push(y);
                }
            }
        }
        let mut powers: Vec<VPoly> = vec![VPoly::one()];
        let mut q: BTreeMap<QExp, (VPoly, usize)> = BTreeMap::new();
        q.insert(QExp::zero(), (VPoly::one(), 0));
        for &x in reach.iter().skip(1) {
            let depth =
                tail.iter().take_while(|(e, _)| *e <= x).filter_map(|(e, _)| q.get(&(x - e)).map(|(_, k)| *k)).max();
            let Some(dmax) = depth else { continue };
            let k = dmax + 1;
            while powers.len() <= k + 1 {
                let next = powers.last().unwrap() * &n0;
                powers.push(next);
            }
            let mut s = VPoly::zero();
            for (e, ne) in tail {
                if *e > x {
                    break;
                }
                if let Some((qp, kp)) = q.get(&(x - e)) {
                    let t = &(ne * qp) * &powers[k - 1 - kp];
                    s = &s - &t;
                }
            }
            q.insert(x, (s, k));
        }
        let c0 = c0.clone();
        let mut terms = BTreeMap::new();
        for (x, (qx, k)) in q {
            if qx.is_zero() {
                continue;
            }
            let c = if k == 0 {
                c0.recip()
            } else {
                while powers.len() <= k + 1 {
                    let next = powers.last().unwrap() * &n0;
                    powers.push(next);
                }
                WRat::new(&l * &qx, powers[k + 1].clone())
            };
            terms.insert(x - e0, c);
        }
        let out = QSeries { terms, cutoff: Some(rel_cut - e0) };
        Ok(out)
    }

    /// `q ↦ q^m` together with the chosen action on `w`.
    pub fn substitute(&self, m: u32, flavor: Substitution) -> Result<Self, SeriesError> {
        if m == 0 {
            return Err(SeriesError::BadSubstitution);
        }
        let mi = m as i64;
        let mq = QExp::from_integer(mi);
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let c2 = match flavor {
                Substitution::Plain => c.substitute_with(mi, |_| false),
                Substitution::Multicover => {
                    if !c.has_even_support() {
                        return Err(SeriesError::HalfIntegerSupport);
                    }
                    // w^k ↦ (−1)^{k(m+1)} w^{mk}, with k = e/2 for v-exponent e.
                    c.substitute_with(mi, move |ve| (ve / 2) * (mi + 1) % 2 != 0)
                }
            };
            terms.insert(e * mq, c2);
        }
        Ok(QSeries { terms, cutoff: self.cutoff.map(|c| c * mq) })
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs<F: Fn(&WRat) -> WRat>(&self, f: F) -> Self {
        let mut out = QSeries { terms: BTreeMap::new(), cutoff: self.cutoff };
        for (e, c) in &self.terms {
            let d = f(c);
            if !d.is_zero() {
                out.terms.insert(*e, d);
            }
        }
        out
    }

    /// True when both agree on every exponent below the smaller cutoff.
    pub fn agrees_with(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}

/// Returns `(D, [(e, p_e)])` with `c_e = p_e / D` for every term.
fn over_common_den(s: &QSeries) -> (VPoly, Vec<(QExp, VPoly)>) {
    let mut dens: Vec<&VPoly> = Vec::new();
    for c in s.terms.values() {
        let d = c.denom();
        if !d.is_one() && !dens.contains(&d) {
            dens.push(d);
        }
    }
    if dens.is_empty() {
        return (VPoly::one(), s.terms.iter().map(|(e, c)| (*e, c.numer().clone())).collect());
    }
    let mut l = dens[0].clone();
    for d in &dens[1..] {
        l = den_lcm(&l, d);
    }
    let factors: Vec<(VPoly, VPoly)> = dens.iter().map(|d| ((*d).clone(), l.div_exact(d))).collect();
    let nums = s
        .terms
        .iter()
        .map(|(e, c)| {
            let d = c.denom();
            let p = if d.is_one() {
                c.numer() * &l
            } else {
                let f = &factors.iter().find(|(x, _)| x == d).unwrap().1;
                c.numer() * f
            };
            (*e, p)
        })
        .collect();
    (l, nums)
}

impl std::ops::Add for &QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        self.combine(rhs, false)
    }
}
impl std::ops::Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, rhs: &QSeries) -> QSeries {
        self.combine(rhs, true)
    }
}
impl std::ops::Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        self.product(rhs)
    }
}
impl std::ops::Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        self.scale_rational(&-BigRational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr for QSeries {
            type Output = QSeries;
            fn $m(self, rhs: QSeries) -> QSeries {
                (&self).$m(&rhs)
            }
        }
        impl std::ops::$tr<&QSeries> for QSeries {
            type Output = QSeries;
            fn $m(self, rhs: &QSeries) -> QSeries {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c}] q^({e})")?;
        }
        match self.cutoff {
            Some(k) => write!(f, " + O(q^({k}))"),
            None => Ok(()),
        }
    }
}
