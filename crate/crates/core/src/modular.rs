//! η, θ₁ at even multiples of `z`, and the products and lattice sums built
//! from them.
//!
//! `θ₁(2kz, τ) = i·ThetaHat(k)`; every formula below has been rewritten in
//! terms of `ThetaHat` so that no factor of `i` survives.

use std::sync::OnceLock;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{BpsError, Result};
use crate::genfun::{Flavor, GenFun};
use crate::geometry::{Polarization, SurfaceId};
use crate::memo::SeriesCache;
use crate::series::{qexp, QExp, QSeries, VPoly, WRat};

/// Truncated product `∏ (1 − w^a qⁿ)^{±1}` over integer powers of `q`, with
/// Laurent-polynomial coefficients.
#[derive(Clone, Debug)]
pub(crate) struct IntProduct {
    coeffs: Vec<VPoly>,
}

impl IntProduct {
    /// The constant `1`, tracked for `q⁰ … q^{len−1}`.
    pub fn one(len: usize) -> Self {
        let mut coeffs = vec![VPoly::zero(); len];
        if len > 0 {
            coeffs[0] = VPoly::one();
        }
        IntProduct { coeffs }
    }

    /// Multiplies by `1 − w^a qⁿ`.
    pub fn mul_factor(&mut self, a: i64, n: usize) {
        for i in (n..self.coeffs.len()).rev() {
            if !self.coeffs[i - n].is_zero() {
                let t = self.coeffs[i - n].shift(2 * a);
                self.coeffs[i] = &self.coeffs[i] - &t;
            }
        }
    }

    /// Divides by `1 − w^a qⁿ`.
    pub fn div_factor(&mut self, a: i64, n: usize) {
        for i in n..self.coeffs.len() {
            if !self.coeffs[i - n].is_zero() {
                let t = self.coeffs[i - n].shift(2 * a);
                self.coeffs[i] = &self.coeffs[i] + &t;
            }
        }
    }

    /// Applies `∏_{n≥1} (1 − w^a qⁿ)^e` for every `n` below the tracked length.
    pub fn apply_tower(&mut self, a: i64, e: i32) {
        for n in 1..self.coeffs.len() {
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    self.mul_factor(a, n);
                } else {
                    self.div_factor(a, n);
                }
            }
        }
    }

    /// `prefactor · q^{lead} · Σ cᵢ qⁱ`, cut at `cutoff`.
    pub fn into_series(self, lead: QExp, prefactor: &WRat, cutoff: QExp) -> QSeries {
        let terms = self
            .coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (lead + i as i64, prefactor.mul_poly(&c)));
        QSeries::from_terms(terms, Some(cutoff))
    }
}

/// Number of integer steps above `lead` needed to reach `cutoff`.
pub(crate) fn steps(lead: QExp, cutoff: QExp) -> usize {
    let d = cutoff - lead;
    if d <= QExp::zero() {
        0
    } else {
        d.ceil().to_integer() as usize
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Block {
    EtaPow(i64),
    Theta(u32),
    Rank1(u32),
    Fibre(u32),
    Blowup(u32, u32),
}

fn cache() -> &'static SeriesCache<Block> {
    static C: OnceLock<SeriesCache<Block>> = OnceLock::new();
    C.get_or_init(SeriesCache::default)
}

/// `η(τ)` from the pentagonal-number expansion.
pub fn eta_series(cutoff: QExp) -> QSeries {
    let lead = qexp(1, 24);
    let mut terms = Vec::new();
    for k in 0i64.. {
        let mut any = false;
        for j in if k == 0 { vec![0] } else { vec![k, -k] } {
            let e = lead + j * (3 * j - 1) / 2;
            if e < cutoff {
                any = true;
                let sign = if j.is_odd() { -1 } else { 1 };
                terms.push((e, WRat::from_int(sign)));
            }
        }
        if !any {
            break;
        }
    }
    QSeries::from_terms(terms, Some(cutoff))
}

/// `η(τ)^p` for any integer `p`.
pub fn eta_pow(p: i64, cutoff: QExp) -> QSeries {
    cache().get_or(&Block::EtaPow(p), cutoff, || {
        let lead = qexp(p, 24);
        let mut prod = IntProduct::one(steps(lead, cutoff));
        prod.apply_tower(0, p as i32);
        prod.into_series(lead, &WRat::one(), cutoff)
    })
}

/// `ThetaHat(k) = q^{1/8}(w^k − w^{−k}) ∏ (1−qⁿ)(1−w^{2k}qⁿ)(1−w^{−2k}qⁿ)`,
/// evaluated through its triple-product sum `Σ (−1)ⁿ q^{(n+1/2)²/2} w^{k(2n+1)}`.
pub fn theta_hat(k: u32, cutoff: QExp) -> QSeries {
    cache().get_or(&Block::Theta(k), cutoff, || {
        let k = k as i64;
        let mut terms = Vec::new();
        for n in 0i64.. {
            // n and −n−1 share the exponent (n+1/2)²/2.
            let e = QExp::new((2 * n + 1) * (2 * n + 1), 8);
            if e >= cutoff {
                break;
            }
            let sign = if n.is_odd() { -1 } else { 1 };
            let c = &WRat::w_pow(k * (2 * n + 1)) - &WRat::w_pow(-k * (2 * n + 1));
            terms.push((e, &WRat::from_int(sign) * &c));
        }
        QSeries::from_terms(terms, Some(cutoff))
    })
}

/// `1/∏ⱼ ThetaHat(kⱼ)^{eⱼ} · η^p` in product form; every coefficient is a
/// Laurent polynomial times one common rational prefactor.
pub(crate) fn theta_eta_quotient(thetas: &[(u32, u32)], eta_power: i64, cutoff: QExp) -> QSeries {
    let theta_count: u32 = thetas.iter().map(|(_, e)| e).sum();
    let lead = qexp(eta_power, 24) - qexp(theta_count as i64, 8);
    let mut prod = IntProduct::one(steps(lead, cutoff));
    let mut pref = WRat::one();
    prod.apply_tower(0, eta_power as i32 - theta_count as i32);
    for &(k, e) in thetas {
        let k = k as i64;
        prod.apply_tower(2 * k, -(e as i32));
        prod.apply_tower(-2 * k, -(e as i32));
        let f = &WRat::w_pow(k) - &WRat::w_pow(-k);
        pref = &pref / &f.pow(e as i32);
    }
    prod.into_series(lead, &pref, cutoff)
}

/// Rank-one generating function `1/(ThetaHat(1) η^{b₂−1})`.
pub fn rank1_series(surface: SurfaceId, cutoff: QExp) -> QSeries {
    let b2 = surface.b2() as u32;
    cache().get_or(&Block::Rank1(b2), cutoff, || theta_eta_quotient(&[(1, 1)], 1 - b2 as i64, cutoff))
}

pub fn rank1_genfun(surface: SurfaceId, cutoff: QExp) -> GenFun {
    let polarization = match surface {
        SurfaceId::ProjectivePlane => Polarization::jmn(1, 1),
        SurfaceId::Hirzebruch(_) => Polarization::SuitableNearFibre,
    };
    GenFun {
        surface,
        r: 1,
        c1: vec![0; surface.b2()],
        polarization,
        flavor: Flavor::OmegaBar,
        series: rank1_series(surface, cutoff),
    }
}

/// `H_r = η^{2r−3}/(∏_{j<r} ThetaHat(j)² · ThetaHat(r))`, or zero when
/// `c₁·f ≢ 0 mod r`.
pub fn fibre_product_series(r: u32, c1_dot_f: i64, cutoff: QExp) -> Result<QSeries> {
    if r == 0 {
        return Err(BpsError::InvalidInput("rank must be positive".into()));
    }
    if r > 1 && c1_dot_f.mod_floor(&(r as i64)) != 0 {
        return Ok(QSeries::zero_to(cutoff));
    }
    Ok(cache().get_or(&Block::Fibre(r), cutoff, || {
        let mut thetas: Vec<(u32, u32)> = (1..r).map(|j| (j, 2)).collect();
        thetas.push((r, 1));
        theta_eta_quotient(&thetas, 2 * r as i64 - 3, cutoff)
    }))
}

/// Stack-flavour generating function of sheaves semistable on the generic
/// fibre of Σ_ℓ.
pub fn fibre_product_genfun(r: u32, c1: &[i64], ell: u32, cutoff: QExp) -> Result<GenFun> {
    let s = SurfaceId::Hirzebruch(ell);
    Ok(GenFun {
        surface: s,
        r,
        c1: c1.to_vec(),
        polarization: Polarization::SuitableNearFibre,
        flavor: Flavor::Stack,
        series: fibre_product_series(r, c1[0], cutoff)?,
    })
}

/// Virtual Poincaré function of the stack of rank-`r` bundles on a genus-`g`
/// curve.
pub fn total_set_curve(r: u32, g: u32) -> WRat {
    let r = r as i64;
    let g = g as i32;
    let one = WRat::one();
    let odd = |j: i64| (&one + &WRat::w_pow(2 * j - 1)).pow(2 * g);
    let mut out = -&(&(&WRat::w_pow(r * r * (1 - g as i64)) * &odd(r)) / &(&one - &WRat::w_pow(2 * r)));
    for j in 1..r {
        out = &out * &(&odd(j) / &(&one - &WRat::w_pow(2 * j)).pow(2));
    }
    out
}

/// Blow-up factor `B_{r,k} = η^{−r} Σ q^{Σaᵢ²/2} w^{Σ_{i<j}(aᵢ−aⱼ)}` over
/// `aᵢ ∈ ℤ + k/r` with `Σaᵢ = 0`.
pub fn blowup_factor(r: u32, k: u32, cutoff: QExp) -> Result<QSeries> {
    if r == 0 {
        return Err(BpsError::InvalidInput("rank must be positive".into()));
    }
    let k = k % r;
    let eta_lead = qexp(-(r as i64), 24);
    let theta_cut = cutoff - eta_lead;
    Ok(cache().get_or(&Block::Blowup(r, k), cutoff, || {
        let theta = lattice_theta(r, k, theta_cut);
        let eta = eta_pow(-(r as i64), cutoff - lattice_min(r, k));
        (&eta * &theta).truncate(cutoff)
    }))
}

/// Smallest `Σaᵢ²/2` on the shifted lattice.
fn lattice_min(r: u32, k: u32) -> QExp {
    let kk = qexp(k as i64, r as i64);
    // r−k entries equal k/r and k entries equal k/r − 1 is optimal.
    let (a, b) = (kk, kk - 1);
    (a * a * (r - k) as i64 + b * b * k as i64) / 2
}

/// The lattice sum of `B_{r,k}` without the η factor, all points with
/// `Σaᵢ²/2 < cutoff`.
pub(crate) fn lattice_theta(r: u32, k: u32, cutoff: QExp) -> QSeries {
    let ri = r as i64;
    let shift = qexp(k as i64, ri);
    let mut terms = Vec::new();
    if r == 1 {
        if QExp::zero() < cutoff {
            terms.push((QExp::zero(), WRat::one()));
        }
        return QSeries::from_terms(terms, Some(cutoff));
    }
    // Σaᵢ²/2 ≥ aᵢ²/2 for each i bounds every coordinate.
    let bound = if cutoff.is_positive() { (cutoff * 2).ceil().to_integer() } else { 0 };
    let amax = ((bound as f64).sqrt().ceil() as i64) + 2;
    let free = (r - 1) as usize;
    let mut idx = vec![-amax; free];
    loop {
        let mut a: Vec<QExp> = idx.iter().map(|&n| shift + n).collect();
        let last = -a.iter().copied().sum::<QExp>();
        a.push(last);
        let e = a.iter().map(|x| x * x).sum::<QExp>() / 2;
        if e < cutoff {
            let wexp: QExp = a.iter().enumerate().map(|(i, x)| x * (ri + 1 - 2 * (i as i64 + 1))).sum();
            debug_assert!(wexp.is_integer());
            terms.push((e, WRat::w_pow(wexp.to_integer())));
        }
        let mut p = 0;
        loop {
            if p == free {
                return QSeries::from_terms(terms, Some(cutoff));
            }
            idx[p] += 1;
            if idx[p] <= amax {
                break;
            }
            idx[p] = -amax;
            p += 1;
        }
    }
}
