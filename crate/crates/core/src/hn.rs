//! Generating functions at the suitable polarization `J_{ε,1}`: the
//! Harder–Narasimhan subtraction recursion and its closed-form solution.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::LazyLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{BpsError, Result};
use crate::genfun::{Flavor, GenFun};
use crate::geometry::{self, ChernVector, Polarization, SlopeFlavor, SurfaceId, Q};
use crate::invariants::{compositions, cutoff_for, equal_slope_log};
use crate::memo::SeriesCache;
use crate::modular::fibre_product_series;
use crate::series::{QExp, QSeries, VPoly, WRat};

/// `w^e` for `e ∈ ½ℤ`.
pub(crate) fn w_power(e: Q) -> Result<WRat> {
    let v = e * 2;
    if !v.is_integer() {
        return Err(BpsError::Integrality(format!("w-exponent {e} is not half-integral")));
    }
    Ok(WRat::from_poly(VPoly::v_pow(v.to_integer())))
}

/// `−Σ_{i<j} rᵢrⱼ(μⱼ−μᵢ)·K_S`, the exponent of the filtration weight.
pub fn filtration_exponent(pieces: &[ChernVector], s: SurfaceId) -> Q {
    let k = geometry::to_q(&s.canonical());
    let mut acc = Q::zero();
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let d = geometry::sub(&pieces[j].mu(), &pieces[i].mu());
            acc -= s.intersect(&d, &k) * (pieces[i].r as i64 * pieces[j].r as i64);
        }
    }
    acc
}

/// Weight `w^{−Σ rᵢrⱼ(μⱼ−μᵢ)·K}` and `1/|Aut|` of an extended HN filtration
/// with quotients `pieces` (non-increasing reduced Hilbert polynomials).
pub fn filtration_weight(pieces: &[ChernVector], j: Polarization, s: SurfaceId) -> Result<(WRat, BigRational)> {
    if pieces.is_empty() {
        return Err(BpsError::InvalidInput("empty filtration".into()));
    }
    let mut aut = BigInt::one();
    let mut run = 1u32;
    for pair in pieces.windows(2) {
        match geometry::slope_order(&pair[0], &pair[1], j, s, SlopeFlavor::Gieseker) {
            Ordering::Less => {
                return Err(BpsError::InvalidInput("filtration quotients are not ordered".into()));
            }
            Ordering::Equal => {
                run += 1;
                aut *= run;
            }
            Ordering::Greater => run = 1,
        }
    }
    let weight = w_power(filtration_exponent(pieces, s))?;
    Ok((weight, BigRational::new(BigInt::one(), aut)))
}

fn lcm_all(r: &[u32]) -> i64 {
    r.iter().fold(1i64, |a, &b| a.lcm(&(b as i64)))
}

/// Sums of filtration weights over all μ-HN types at `J_{ε,1}` with quotient
/// ranks `ranks` and total `c₁`, grouped by the residues `c₁(Eᵢ)·C mod rᵢ`.
///
/// The quotients share `μ·f`, so `c₁(Eᵢ) = (rᵢβ/r)C + dᵢf` with `dᵢ/rᵢ`
/// strictly decreasing. The weight is linear in the gaps `dₘ/rₘ − dₘ₊₁/rₘ₊₁`
/// and each gap is periodic modulo `r/gcd(r, r₁+…+rₘ)`; summing the
/// geometric tower over every period leaves a finite sum over
/// representatives.
pub fn cone_weights(s: SurfaceId, ranks: &[u32], c1: &[i64]) -> Result<BTreeMap<Vec<i64>, WRat>> {
    let r: u32 = ranks.iter().sum();
    let ri = r as i64;
    let mut xs = Vec::with_capacity(ranks.len());
    for &rk in ranks {
        let n = c1[0] * rk as i64;
        if n % ri != 0 {
            return Ok(BTreeMap::new());
        }
        xs.push(n / ri);
    }
    let k = ranks.len();
    let l = lcm_all(ranks);
    let partial: Vec<i64> = ranks
        .iter()
        .scan(0i64, |acc, &x| {
            *acc += x as i64;
            Some(*acc)
        })
        .collect();
    let periods: Vec<i64> = (0..k - 1).map(|m| ri / ri.gcd(&partial[m])).collect();

    // Quotient classes from gaps; None unless every dᵢ is an integer.
    let pieces_at = |t: &[Q]| -> Option<Vec<ChernVector>> {
        let shift: Q = (0..k - 1).map(|m| t[m] * partial[m]).sum();
        let yk = (Q::from_integer(c1[1]) - shift) / ri;
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let y = yk + t[i..k - 1].iter().copied().sum::<Q>();
            let d = y * ranks[i] as i64;
            if !d.is_integer() {
                return None;
            }
            out.push(ChernVector::new(ranks[i], vec![xs[i], d.to_integer()], Q::zero()));
        }
        Some(out)
    };

    let mut out: BTreeMap<Vec<i64>, WRat> = BTreeMap::new();
    let mut idx = vec![1i64; k - 1];
    loop {
        let t: Vec<Q> = idx.iter().map(|&n| Q::new(n, l)).collect();
        if let Some(pieces) = pieces_at(&t) {
            let e0 = filtration_exponent(&pieces, s);
            let mut term = w_power(e0)?;
            for m in 0..k - 1 {
                let mut t2 = t.clone();
                t2[m] += periods[m];
                let shifted = pieces_at(&t2).expect("period preserves integrality");
                let step = filtration_exponent(&shifted, s) - e0;
                if step >= Q::zero() {
                    return Err(BpsError::Unbounded(format!("non-decaying filtration tower for ranks {ranks:?}")));
                }
                term = &term / &(&WRat::one() - &w_power(step)?);
            }
            let res: Vec<i64> = pieces.iter().map(|p| p.c1[1].mod_floor(&(p.r as i64))).collect();
            let slot = out.entry(res).or_insert_with(WRat::zero);
            *slot = &*slot + &term;
        }
        // Next multi-index in Π [1, P_m·L].
        let mut m = 0;
        loop {
            if m == k - 1 {
                return Ok(out);
            }
            idx[m] += 1;
            if idx[m] <= periods[m] * l {
                break;
            }
            idx[m] = 1;
            m += 1;
        }
    }
}

type StackKey = (u32, u32, i64, i64);

static STACK_MU: LazyLock<SeriesCache<StackKey>> = LazyLock::new(SeriesCache::default);

fn hirzebruch_ell(s: SurfaceId) -> Result<u32> {
    match s {
        SurfaceId::Hirzebruch(l) => Ok(l),
        SurfaceId::ProjectivePlane => Err(BpsError::Unsupported("suitable polarization on P2".into())),
    }
}

/// Stack invariants of μ-semistable sheaves at `J_{ε,1}`, for classes with
/// `rΔ < bound`: the fibre product formula minus every μ-HN type of length
/// at least two.
pub fn suitable_stack_mu(s: SurfaceId, r: u32, c1: &[i64], bound: QExp) -> Result<QSeries> {
    let ell = hirzebruch_ell(s)?;
    if r == 0 || c1.len() != 2 {
        return Err(BpsError::InvalidInput(format!("bad class ({r}, {c1:?}) on {s}")));
    }
    let ri = r as i64;
    let beta = c1[0].mod_floor(&ri);
    let gamma = c1[1].mod_floor(&ri);
    let cutoff = cutoff_for(s, r, bound);
    STACK_MU.get_or_try(&(ell, r, beta, gamma), cutoff, || {
        let mut h = fibre_product_series(r, beta, cutoff)?;
        for ranks in compositions(r).into_iter().filter(|p| p.len() > 1) {
            for (res, weight) in cone_weights(s, &ranks, &[beta, gamma])? {
                let mut prod: Option<QSeries> = None;
                for (i, &rk) in ranks.iter().enumerate() {
                    let x = beta * rk as i64 / ri;
                    let f = suitable_stack_mu(s, rk, &[x, res[i]], bound)?;
                    prod = Some(match prod {
                        None => f,
                        Some(p) => &p * &f,
                    });
                }
                h = &h - &prod.unwrap().scale(&weight);
            }
        }
        Ok(h)
    })
}

/// `Ω̄` generating function at `J_{ε,1}` via the HN recursion.
pub fn suitable_genfun_recursive(r: u32, c1: &[i64], ell: u32, cutoff: QExp) -> Result<GenFun> {
    let s = SurfaceId::Hirzebruch(ell);
    let bound = cutoff - cutoff_for(s, r, QExp::zero());
    let series = suitable_omegabar(s, r, c1, bound)?;
    Ok(GenFun {
        surface: s,
        r,
        c1: c1.to_vec(),
        polarization: Polarization::SuitableNearFibre,
        flavor: Flavor::OmegaBar,
        series,
    })
}

/// `Ω̄` at `J_{ε,1}` for classes with `rΔ < bound`.
pub fn suitable_omegabar(s: SurfaceId, r: u32, c1: &[i64], bound: QExp) -> Result<QSeries> {
    let out = equal_slope_log(r, c1, |ri, ci| suitable_stack_mu(s, ri, ci, bound))?;
    Ok(if out.cutoff().is_none() { QSeries::zero_to(cutoff_for(s, r, bound)) } else { out })
}

/// `M(r₁,…,r_ℓ; λ) = Σ_{j<ℓ} (r_j + r_{j+1}) {(r₁+…+r_j) λ}`.
pub fn closed_form_exponent(ranks: &[u32], lambda: Q) -> Q {
    let mut acc = Q::zero();
    let mut partial = 0i64;
    for pair in ranks.windows(2) {
        partial += pair[0] as i64;
        acc += (lambda * partial).fract_pos() * (pair[0] + pair[1]) as i64;
    }
    acc
}

trait FractPos {
    fn fract_pos(self) -> Self;
}

impl FractPos for Q {
    fn fract_pos(self) -> Q {
        self - self.floor()
    }
}

/// `Σ_{r₁+…+r_ℓ = r} w^{2M(r_•;λ)} / ∏(1 − w^{2(r_j+r_{j+1})}) · ∏ H_{r_j}`.
fn closed_stack(r: u32, lambda: Q, s: SurfaceId, bound: QExp) -> Result<QSeries> {
    let mut acc = QSeries::zero();
    for ranks in compositions(r) {
        let mut coeff = w_power(closed_form_exponent(&ranks, lambda) * 2)?;
        for pair in ranks.windows(2) {
            let e = 2 * (pair[0] + pair[1]) as i64;
            coeff = &coeff / &(&WRat::one() - &WRat::w_pow(e));
        }
        let mut prod = QSeries::constant(coeff);
        for &rk in &ranks {
            prod = &prod * &fibre_product_series(rk, 0, cutoff_for(s, rk, bound))?;
        }
        acc = &acc + &prod;
    }
    Ok(acc)
}

/// Closed-form `h_{r,−af}` at `J_{ε,1}`.
pub fn suitable_genfun_closed(r: u32, a: i64, ell: u32, cutoff: QExp) -> Result<GenFun> {
    let s = SurfaceId::Hirzebruch(ell);
    let bound = cutoff - cutoff_for(s, r, QExp::zero());
    let lambda = Q::new(a, r as i64);
    let series = equal_slope_log(r, &[a], |ri, _| closed_stack(ri, lambda, s, bound))?;
    Ok(GenFun {
        surface: s,
        r,
        c1: vec![0, -a],
        polarization: Polarization::SuitableNearFibre,
        flavor: Flavor::OmegaBar,
        series,
    })
}

/// The `g = 0` case of `H₂ + (1/(1−w⁴) − 1/2)·H₁²` with `H_r` the total
/// set of a curve.
pub fn kirwan_combination_genus0() -> WRat {
    use crate::modular::total_set_curve;
    let h1 = total_set_curve(1, 0);
    let c = &(&WRat::one() - &WRat::w_pow(4)).recip() - &WRat::from_rational(BigRational::new(1.into(), 2.into()));
    &total_set_curve(2, 0) + &(&c * &(&h1 * &h1))
}
