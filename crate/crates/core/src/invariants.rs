//! Conversions between `Ω`, `Ω̄` and stack invariants, and extraction of
//! Betti tables.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{BpsError, Result};
use crate::genfun::{Flavor, GenFun};
use crate::geometry::{self, ChernVector, SurfaceId, Q};
use crate::series::{QExp, QSeries, Substitution, VPoly, WRat};

/// `−r·χ(S)/24`, the exponent of `Δ = 0` in rank `r` generating functions.
pub fn vacuum_exponent(s: SurfaceId, r: u32) -> QExp {
    QExp::new(-(r as i64) * s.chi_top(), 24)
}

/// Cutoff on exponents of rank-`r` series for classes with `rΔ < bound`.
pub fn cutoff_for(s: SurfaceId, r: u32, bound: QExp) -> QExp {
    bound + vacuum_exponent(s, r)
}

/// Ordered compositions of `r` into `k ≥ 1` positive parts.
pub fn compositions(r: u32) -> Vec<Vec<u32>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=r {
        for mut rest in compositions(r - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(n: usize) -> BigInt {
    (1..=n as u64).map(BigInt::from).product()
}

/// `c₁/r · rᵢ` when integral.
fn scaled_class(c1: &[i64], r: u32, ri: u32) -> Option<Vec<i64>> {
    c1.iter()
        .map(|&c| {
            let n = c * ri as i64;
            (n % r as i64 == 0).then(|| n / r as i64)
        })
        .collect()
}

/// Compositions of `(r, c₁)` into pieces of equal slope `c₁/r`.
pub fn equal_slope_splits(r: u32, c1: &[i64]) -> Vec<Vec<(u32, Vec<i64>)>> {
    compositions(r)
        .into_iter()
        .filter_map(|parts| parts.iter().map(|&ri| scaled_class(c1, r, ri).map(|c| (ri, c))).collect())
        .collect()
}

/// Series-level `I = Σ (1/k!) ∏ Ω̄` over equal-slope decompositions.
pub fn equal_slope_exp<F>(r: u32, c1: &[i64], mut piece: F) -> Result<QSeries>
where
    F: FnMut(u32, &[i64]) -> Result<QSeries>,
{
    equal_slope_combine(r, c1, &mut piece, |k| BigRational::new(BigInt::one(), factorial(k)))
}

/// Series-level `Ω̄ = Σ ((−1)^{k+1}/k) ∏ I` over equal-slope decompositions.
pub fn equal_slope_log<F>(r: u32, c1: &[i64], mut piece: F) -> Result<QSeries>
where
    F: FnMut(u32, &[i64]) -> Result<QSeries>,
{
    equal_slope_combine(r, c1, &mut piece, |k| {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        BigRational::new(BigInt::from(sign), BigInt::from(k))
    })
}

fn equal_slope_combine<F, W>(r: u32, c1: &[i64], piece: &mut F, weight: W) -> Result<QSeries>
where
    F: FnMut(u32, &[i64]) -> Result<QSeries>,
    W: Fn(usize) -> BigRational,
{
    let mut acc: Option<QSeries> = None;
    for split in equal_slope_splits(r, c1) {
        let mut prod: Option<QSeries> = None;
        for (ri, ci) in &split {
            let s = piece(*ri, ci)?;
            prod = Some(match prod {
                None => s,
                Some(p) => &p * &s,
            });
        }
        let term = prod.unwrap().scale_rational(&weight(split.len()));
        acc = Some(match acc {
            None => term,
            Some(a) => &a + &term,
        });
    }
    Ok(acc.unwrap_or_else(QSeries::zero))
}

/// `Ω̄ → Ω` by peeling off multi-cover contributions
/// `(1/m)·Ω(Γ/m, −(−w)^m)` for every `m > 1` dividing `Γ`.
pub fn omegabar_to_omega<F>(h: &GenFun, mut lower: F) -> Result<GenFun>
where
    F: FnMut(u32, &[i64]) -> Result<QSeries>,
{
    if h.flavor != Flavor::OmegaBar {
        return Err(BpsError::InvalidInput(format!("expected omegabar flavor, got {}", h.flavor)));
    }
    let mut out = h.series.clone();
    for m in 2..=h.r {
        if !h.r.is_multiple_of(m) || h.c1.iter().any(|c| c % m as i64 != 0) {
            continue;
        }
        let c1: Vec<i64> = h.c1.iter().map(|c| c / m as i64).collect();
        let sub = lower(h.r / m, &c1)?.substitute(m, Substitution::Multicover)?;
        out = &out - &sub.scale_rational(&BigRational::new(BigInt::one(), BigInt::from(m)));
    }
    Ok(h.with_series(out, Flavor::Omega))
}

/// Per-class invariants keyed by `(r, c₁, ch₂)`.
pub type ClassMap = BTreeMap<(u32, Vec<i64>, Q), WRat>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StackDirection {
    ToStack,
    FromStack,
}

/// Decompositions `Γ = Γ₁ + … + Γ_k` into classes present in `inputs`, all
/// with the reduced Hilbert polynomial of `Γ` (equal slope and equal `Δ` at a
/// generic polarization).
fn equal_hilbert_splits(g: &ChernVector, s: SurfaceId, inputs: &ClassMap) -> Vec<Vec<ChernVector>> {
    let delta = geometry::discriminant(g, s);
    let mut out = Vec::new();
    for split in equal_slope_splits(g.r, &g.c1) {
        let pieces: Vec<ChernVector> = split
            .into_iter()
            .map(|(ri, c)| {
                let mu = geometry::to_q(&c).iter().map(|x| x / ri as i64).collect::<Vec<_>>();
                let ch2 = (s.square(&mu) / 2 - delta) * ri as i64;
                ChernVector::new(ri, c, ch2)
            })
            .collect();
        if pieces.iter().all(|p| inputs.contains_key(&(p.r, p.c1.clone(), p.ch2))) {
            out.push(pieces);
        }
    }
    out
}

/// `I(Γ) = Σ (1/k!) ∏ Ω̄(Γᵢ)` or its inverse `Ω̄(Γ) = Σ ((−1)^{k+1}/k) ∏ I(Γᵢ)`.
/// Classes absent from `inputs` count as zero; the decomposition must be
/// bounded, which holds since every piece shares `Δ(Γ)`.
pub fn stack_conversion(inputs: &ClassMap, dir: StackDirection, g: &ChernVector, s: SurfaceId) -> Result<WRat> {
    let delta = geometry::discriminant(g, s);
    if delta.is_negative() && !inputs.keys().any(|(_, _, ch2)| ch2 == &g.ch2) {
        return Err(BpsError::Unbounded(format!("no lower bound on Δ for {g:?}")));
    }
    let mut acc = WRat::zero();
    for pieces in equal_hilbert_splits(g, s, inputs) {
        let k = pieces.len();
        let w = match dir {
            StackDirection::ToStack => BigRational::new(BigInt::one(), factorial(k)),
            StackDirection::FromStack => {
                BigRational::new(BigInt::from(if k % 2 == 1 { 1 } else { -1 }), BigInt::from(k))
            }
        };
        let mut prod = WRat::one();
        for p in &pieces {
            prod = &prod * &inputs[&(p.r, p.c1.clone(), p.ch2)];
        }
        acc = &acc + &prod.scale(&w);
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub c2: Q,
    pub delta: Q,
    pub dim: i64,
    /// `(w − w⁻¹)·Ω` as a Laurent polynomial in `v = w^{1/2}`.
    pub poincare: VPoly,
    /// `b₀, b₂, …, b_{2·dim}`.
    pub betti: Vec<i64>,
    pub euler: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantTable {
    pub surface: SurfaceId,
    pub r: u32,
    pub c1: Vec<i64>,
    pub rows: Vec<TableRow>,
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or_else(|| BpsError::Integrality(format!("coefficient {x} out of range")))
}

/// Reads Betti numbers and Euler numbers off an `Ω`-flavour series.
pub fn extract_table(h: &GenFun) -> Result<InvariantTable> {
    if h.flavor != Flavor::Omega {
        return Err(BpsError::InvalidInput(format!("expected omega flavor, got {}", h.flavor)));
    }
    let s = h.surface;
    let r = h.r as i64;
    let c1sq = s.square(&geometry::to_q(&h.c1));
    let wm = WRat::w_minus_winv();
    let mut rows = Vec::new();
    for (e, c) in h.series.terms() {
        let r_delta = e - vacuum_exponent(s, h.r);
        let delta = r_delta / r;
        let c2 = r_delta + c1sq * (r - 1) / (2 * r);
        let g = ChernVector::from_c2(s, h.r, h.c1.clone(), c2);
        let dim = geometry::expected_dimension(&g, s)?;
        let p = c * &wm;
        let Some(poly) = p.as_poly() else {
            return Err(BpsError::Integrality(format!("non-polynomial coefficient at c2 = {c2}: {p}")));
        };
        if !poly.is_integral() {
            return Err(BpsError::Integrality(format!("non-integer coefficient at c2 = {c2}: {p}")));
        }
        if dim < 0 {
            return Err(BpsError::Integrality(format!("nonzero invariant at c2 = {c2} with dimension {dim}")));
        }
        if &poly.reflect() != poly {
            return Err(BpsError::Integrality(format!("non-palindromic coefficient at c2 = {c2}: {p}")));
        }
        if poly.low() != -2 * dim || poly.high() != 2 * dim {
            return Err(BpsError::Integrality(format!(
                "degree span [{}, {}] does not match dimension {dim} at c2 = {c2}",
                poly.low(),
                poly.high()
            )));
        }
        let mut betti = Vec::with_capacity(dim as usize + 1);
        for i in 0..=dim {
            let b = poly.coeff(4 * i - 2 * dim);
            debug_assert!(b.is_integer());
            let b = to_i64(&b.to_integer())?;
            if b < 0 {
                return Err(BpsError::Integrality(format!("negative Betti number at c2 = {c2}")));
            }
            betti.push(b);
        }
        for (ve, _) in poly.terms() {
            if (ve + 2 * dim).mod_floor(&4) != 0 {
                return Err(BpsError::Integrality(format!("odd cohomology at c2 = {c2}")));
            }
        }
        let euler = betti.iter().sum();
        rows.push(TableRow { c2, delta, dim, poincare: poly.clone(), betti, euler });
    }
    Ok(InvariantTable { surface: s, r: h.r, c1: h.c1.clone(), rows })
}

impl InvariantTable {
    pub fn row(&self, c2: i64) -> Option<&TableRow> {
        self.rows.iter().find(|row| row.c2 == Q::from_integer(c2))
    }
}

impl TableRow {
    /// Betti numbers up to and including the middle degree.
    pub fn lower_half(&self) -> &[i64] {
        &self.betti[..=(self.dim as usize / 2)]
    }

    /// `2·Σ(sub-middle) + middle`, which must equal the Euler number.
    pub fn duality_sum(&self) -> i64 {
        let half = self.lower_half();
        if self.dim % 2 == 0 {
            let (mid, rest) = half.split_last().unwrap();
            2 * rest.iter().sum::<i64>() + mid
        } else {
            2 * half.iter().sum::<i64>()
        }
    }
}

/// Euler number from a polynomial in `v` (value at `w = 1`).
pub fn euler_of(p: &VPoly) -> BigRational {
    p.eval_at_one()
}
