//! From Σ₁ to P²: μ-semistable stack functions at the pull-back of the
//! hyperplane class, division by the blow-up factor and the Gieseker
//! refinement on P².
//!
//! Classes on Σ₁ are `[β, γ] = βC + γf`; the pull-back of `cH` twisted by
//! `−kC` is `[c − k, c]`.

use std::sync::LazyLock;

use num_traits::Zero;

use crate::error::{BpsError, Result};
use crate::genfun::{Flavor, GenFun};
use crate::geometry::{Polarization, SurfaceId};
use crate::hn::w_power;
use crate::invariants::{cutoff_for, equal_slope_exp, equal_slope_log, omegabar_to_omega, vacuum_exponent};
use crate::memo::SeriesCache;
use crate::modular::{blowup_factor, rank1_series};
use crate::series::{QExp, QSeries};
use crate::wallcross::{genfun_at_polarization, product_of, wall_sequences};

/// Generating function of μ-semistable stack invariants (`I^μ`) or of their
/// logarithm (`Ω̄^μ`); may carry higher-order poles at `w = ±1`.
pub type MuGenFun = GenFun;

const SIGMA1: SurfaceId = SurfaceId::Hirzebruch(1);
const P2: SurfaceId = SurfaceId::ProjectivePlane;

fn check_rank(r: u32) -> Result<()> {
    if r == 0 || r > 3 {
        return Err(BpsError::Unsupported(format!("blow-up pipeline for rank {r}")));
    }
    Ok(())
}

fn reduce(c: i64, r: u32) -> i64 {
    c.rem_euclid(r as i64)
}

/// `k` with `[β, γ] = φ*(γH) − kC`, modulo `r`.
pub fn blowup_residue(r: u32, c1: &[i64]) -> u32 {
    reduce(c1[1] - c1[0], r) as u32
}

/// The Σ₁ class `φ*(cH) − kC`.
pub fn pulled_back_class(c: i64, k: i64) -> [i64; 2] {
    [c - k, c]
}

/// Smallest exponent of `B_{r,k}` beyond `−r/24`, i.e. the shift
/// `rΔ(Σ₁) − rΔ(P²) = (r−1)k²/2r` for `k` reduced to `|k| ≤ r/2`.
pub fn blowup_shift(r: u32, k: u32) -> QExp {
    let ri = r as i64;
    let k = reduce(k as i64, r);
    let k = k.min(ri - k);
    QExp::new((ri - 1) * k * k, 2 * ri)
}

/// `Σ₁` bound needed for all pieces of a rank-`r` P² computation with
/// `rΔ < bound`.
fn sigma_bound(r: u32, bound: QExp) -> QExp {
    let extra = (0..r).map(|k| blowup_shift(r, k)).max().unwrap_or_else(QExp::zero);
    bound + extra
}

static NEAR: LazyLock<SeriesCache<(u32, i64, i64)>> = LazyLock::new(SeriesCache::default);

/// `Ω̄` on Σ₁ at `J_{1,ε}`, classes with `rΔ < bound`.
pub fn near_pullback_omegabar(r: u32, c1: &[i64], bound: QExp) -> Result<QSeries> {
    check_rank(r)?;
    let cutoff = cutoff_for(SIGMA1, r, bound);
    let key = (r, reduce(c1[0], r), reduce(c1[1], r));
    NEAR.get_or_try(&key, cutoff, || match r {
        1 => Ok(rank1_series(SIGMA1, cutoff)),
        _ => Ok(genfun_at_polarization(r, &[key.1, key.2], 1, Polarization::NearPullback, cutoff)?.series),
    })
}

/// `I^μ` on Σ₁ at `J_{1,ε}` with the top class replaced by `top`.
fn near_pullback_stack(r: u32, c1: &[i64], top: Option<&QSeries>, bound: QExp) -> Result<QSeries> {
    equal_slope_exp(r, c1, |ri, ci| match top {
        Some(h) if ri == r => Ok(h.clone()),
        _ => near_pullback_omegabar(ri, ci, bound),
    })
}

/// Step 1: `I^μ` at `J_{1,0}` from the Gieseker function `h` at `J_{1,ε}`.
///
/// Adds every HN type for `J_{1,ε}` whose factors have equal μ-slope for
/// `J_{1,0}`; their slopes differ by multiples of `C` and decrease along the
/// filtration. Lower-rank factors are taken from the closed forms at
/// `J_{1,ε}`.
pub fn gieseker_to_mu(h: &GenFun, bound: QExp) -> Result<MuGenFun> {
    check_rank(h.r)?;
    if h.surface != SIGMA1 || h.flavor != Flavor::OmegaBar || h.polarization != Polarization::NearPullback {
        return Err(BpsError::InvalidInput("expected Ω̄ on Σ₁ at J(1,ε)".into()));
    }
    let r = h.r;
    let cutoff = cutoff_for(SIGMA1, r, bound);
    let mut acc = near_pullback_stack(r, &h.c1, Some(&h.series), bound)?;
    for seq in wall_sequences(SIGMA1, r, &h.c1, [1, 0], bound) {
        if seq.trend <= 0 {
            continue;
        }
        let mut factors = Vec::with_capacity(seq.pieces.len());
        for (ri, ci) in &seq.pieces {
            factors.push(near_pullback_stack(*ri, ci, None, bound)?);
        }
        acc = &acc + &product_of(factors).shift(seq.cross).scale(&w_power(seq.wexp)?);
    }
    Ok(GenFun {
        surface: SIGMA1,
        r,
        c1: h.c1.clone(),
        polarization: Polarization::PullbackH,
        flavor: Flavor::StackMu,
        series: acc.truncate(cutoff),
    })
}

/// Step 2: `H^μ(P²) = H^μ(Σ₁, φ*H) / B_{r,k}`.
pub fn blowup_divide(hmu: &MuGenFun) -> Result<MuGenFun> {
    check_rank(hmu.r)?;
    if hmu.surface != SIGMA1 || hmu.flavor != Flavor::StackMu || hmu.polarization != Polarization::PullbackH {
        return Err(BpsError::InvalidInput("expected I^μ on Σ₁ at φ*H".into()));
    }
    let r = hmu.r;
    let k = blowup_residue(r, &hmu.c1);
    let cut = hmu.series.cutoff().ok_or_else(|| BpsError::InvalidInput("exact input series".into()))?;
    let lead_b = blowup_shift(r, k) + QExp::new(-(r as i64), 24);
    // Enough precision of 1/B to cover the product up to `cut − lead_b`.
    let b = blowup_factor(r, k, cut + lead_b - vacuum_exponent(SIGMA1, r))?;
    let quotient = (&hmu.series * &b.invert()?).truncate(cut - lead_b);
    if quotient.terms().any(|(_, c)| !c.has_even_support()) {
        return Err(BpsError::Parity);
    }
    Ok(GenFun {
        surface: P2,
        r,
        c1: vec![reduce(hmu.c1[1], r)],
        polarization: Polarization::PullbackH,
        flavor: Flavor::StackMu,
        series: quotient,
    })
}

/// Step 3: `Ω̄` on P² from `I^μ`, given `I^μ` of the lower equal-slope
/// classes.
pub fn mu_to_gieseker<F>(hmu: &MuGenFun, mut lower: F) -> Result<GenFun>
where
    F: FnMut(u32, &[i64]) -> Result<QSeries>,
{
    if hmu.surface != P2 || hmu.flavor != Flavor::StackMu {
        return Err(BpsError::InvalidInput("expected I^μ on P2".into()));
    }
    let series =
        equal_slope_log(hmu.r, &hmu.c1, |ri, ci| if ri == hmu.r { Ok(hmu.series.clone()) } else { lower(ri, ci) })?;
    Ok(hmu.with_series(series, Flavor::OmegaBar))
}

static P2_STACK: LazyLock<SeriesCache<(u32, i64, u32)>> = LazyLock::new(SeriesCache::default);

/// Steps 1 and 2 for `(r, cH)` on P² through the Σ₁ class `φ*(cH) − kC`.
pub fn p2_stack_mu_via(r: u32, c: i64, k: i64, bound: QExp) -> Result<QSeries> {
    check_rank(r)?;
    let (c, k) = (reduce(c, r), reduce(k, r));
    let cutoff = cutoff_for(P2, r, bound);
    if r == 1 {
        return Ok(rank1_series(P2, cutoff));
    }
    P2_STACK.get_or_try(&(r, c, k as u32), cutoff, || {
        let sb = sigma_bound(r, bound);
        let c1 = pulled_back_class(c, k).to_vec();
        let h = GenFun {
            surface: SIGMA1,
            r,
            c1: c1.clone(),
            polarization: Polarization::NearPullback,
            flavor: Flavor::OmegaBar,
            series: near_pullback_omegabar(r, &c1, sb)?,
        };
        let hmu = gieseker_to_mu(&h, sb)?;
        Ok(blowup_divide(&hmu)?.series.truncate(cutoff))
    })
}

/// Residue `k` used by default: the class `φ*(cH) + C`.
pub fn default_residue(r: u32) -> i64 {
    r as i64 - 1
}

/// `Ω̄` generating function of `(r, cH)` on P² via the route `k`; lower
/// classes use the default route.
pub fn p2_genfun_via(r: u32, c: i64, k: i64, bound: QExp) -> Result<GenFun> {
    check_rank(r)?;
    let c = reduce(c, r);
    let hmu = GenFun {
        surface: P2,
        r,
        c1: vec![c],
        polarization: Polarization::PullbackH,
        flavor: Flavor::StackMu,
        series: p2_stack_mu_via(r, c, k, bound)?,
    };
    let out = mu_to_gieseker(&hmu, |ri, ci| p2_stack_mu_via(ri, ci[0], default_residue(ri), bound))?;
    Ok(out.with_series(out.series.truncate(cutoff_for(P2, r, bound)), Flavor::OmegaBar))
}

/// `Ω̄` generating function of `(r, cH)` on P², classes with `rΔ < bound`.
pub fn p2_genfun(r: u32, c: i64, bound: QExp) -> Result<GenFun> {
    p2_genfun_via(r, c, default_residue(r), bound)
}

/// Integer invariants `Ω` of `(r, cH)` on P².
pub fn p2_omega(r: u32, c: i64, bound: QExp) -> Result<GenFun> {
    let h = p2_genfun(r, c, bound)?;
    omegabar_to_omega(&h, |ri, ci| Ok(p2_omega(ri, ci[0], bound)?.series))
}
