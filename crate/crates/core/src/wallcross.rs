//! Wall-crossing on Σ_ℓ: from the suitable chamber to arbitrary
//! polarizations `J_{m,n}`.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use parking_lot::{Mutex, RwLock};

use crate::error::{BpsError, Result};
use crate::genfun::{Flavor, GenFun};
use crate::geometry::{self, ChernVector, Polarization, SurfaceId, Q};
use crate::hn::{filtration_exponent, suitable_omegabar, suitable_stack_mu, w_power};
use crate::invariants::{compositions, cutoff_for, equal_slope_log, equal_slope_splits, vacuum_exponent};
use crate::modular::rank1_series;
use crate::series::{QExp, QSeries, WRat};

/// Position of a polarization on the ray `t = n/m ∈ (0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayPoint {
    /// `J_{ε,1}`, beyond every wall.
    Top,
    At(Q),
    /// Infinitesimally above or below `t`.
    Above(Q),
    Below(Q),
    /// `J_{1,ε}`, below every wall.
    Bottom,
}

impl RayPoint {
    pub fn of(j: Polarization) -> Result<RayPoint> {
        match j {
            Polarization::SuitableNearFibre => Ok(RayPoint::Top),
            Polarization::NearPullback => Ok(RayPoint::Bottom),
            Polarization::Jmn { .. } if j.is_ample() => Ok(RayPoint::At(j.ratio().unwrap())),
            _ => Err(BpsError::InvalidInput(format!("polarization {j} is not ample"))),
        }
    }

    /// Sign of `D·J` for `D = xC + yf`, i.e. of `x·t − y`.
    pub fn sign(&self, x: Q, y: Q) -> i32 {
        let sg = |v: Q| v.cmp(&Q::zero()) as i32;
        let first_nonzero = |a: Q, b: Q| if !a.is_zero() { sg(a) } else { sg(b) };
        match *self {
            RayPoint::Top => first_nonzero(x, -y),
            RayPoint::Bottom => first_nonzero(-y, x),
            RayPoint::At(t) => sg(x * t - y),
            RayPoint::Above(t) => first_nonzero(x * t - y, x),
            RayPoint::Below(t) => first_nonzero(x * t - y, -x),
        }
    }

    /// Whether the point lies strictly above the wall at `t`.
    fn above(&self, t: Q) -> Option<bool> {
        match *self {
            RayPoint::Top => Some(true),
            RayPoint::Bottom => Some(false),
            RayPoint::At(u) => (u != t).then_some(u > t),
            RayPoint::Above(u) => Some(u >= t),
            RayPoint::Below(u) => Some(u > t),
        }
    }
}

/// Primitive direction `qC − pf` of the wall at `t = p/q`.
fn wall_direction(t: Q) -> [i64; 2] {
    [*t.denom(), -*t.numer()]
}

/// Walls of all classes of rank `2..=max_rank` with `rΔ < bound`, in
/// decreasing order of `t`.
pub fn global_walls(s: SurfaceId, max_rank: u32, bound: QExp) -> Vec<Q> {
    let mut ts = Vec::new();
    for r in 2..=max_rank {
        let ri = r as i64;
        for b in 0..ri {
            for e in 0..ri {
                for sp in geometry::negative_splits(s, r, &[b, e], bound, true) {
                    if let Some(t) = geometry::wall_of_direction(&sp.d) {
                        ts.push(t);
                    }
                }
            }
        }
    }
    ts.sort_by(|a, b| b.cmp(a));
    ts.dedup();
    ts
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallSplit {
    pub t: Q,
    pub splits: Vec<geometry::Split>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChamberPath {
    pub start: Polarization,
    pub end: Polarization,
    pub walls: Vec<WallSplit>,
}

/// Walls of `Γ` met when moving from `start` to `end`, in order.
pub fn chamber_path(g: &ChernVector, s: SurfaceId, start: Polarization, end: Polarization) -> Result<ChamberPath> {
    let mut walls: Vec<WallSplit> = Vec::new();
    if s.ell().is_some() {
        let (a, b) = (RayPoint::of(start)?, RayPoint::of(end)?);
        let bound = geometry::discriminant(g, s) * g.r as i64;
        let mut by_t: HashMap<Q, Vec<geometry::Split>> = HashMap::new();
        for sp in geometry::negative_splits(s, g.r, &g.c1, bound, false) {
            if let Some(t) = geometry::wall_of_direction(&sp.d) {
                let crosses = match (a.above(t), b.above(t)) {
                    (Some(x), Some(y)) => x != y,
                    _ => false,
                };
                if crosses {
                    by_t.entry(t).or_default().push(sp);
                }
            }
        }
        walls = by_t.into_iter().map(|(t, splits)| WallSplit { t, splits }).collect();
        walls.sort_by_key(|x| x.t);
        let start_high = match (a, b) {
            (RayPoint::Top, _) | (_, RayPoint::Bottom) => true,
            (RayPoint::Bottom, _) | (_, RayPoint::Top) => false,
            _ => pos_ratio(a) > pos_ratio(b),
        };
        if start_high {
            walls.reverse();
        }
    }
    Ok(ChamberPath { start, end, walls })
}

fn reduce(c1: &[i64], r: u32) -> Vec<i64> {
    c1.iter().map(|c| c.mod_floor(&(r as i64))).collect()
}

/// An ordered decomposition of a class along a wall: pieces
/// `(rᵢ, c₁ᵢ)` with `μᵢ = μ + sᵢ·D_W` and the induced weight and cross term.
#[derive(Clone, Debug)]
pub(crate) struct WallSequence {
    pub(crate) pieces: Vec<(u32, Vec<i64>)>,
    /// +1 when `sᵢ` strictly decrease, −1 when they strictly increase,
    /// 0 when all are equal.
    pub(crate) trend: i32,
    pub(crate) wexp: Q,
    pub(crate) cross: Q,
}

/// Sequences of pieces with pairwise distinct or all-equal slopes on the wall
/// line; `runs` selects pieces of arbitrary rank with distinct slopes
/// (`trend ≠ 0`), the single-slope case is handled by callers.
pub(crate) fn wall_sequences(s: SurfaceId, r: u32, c1: &[i64], dir: [i64; 2], bound: QExp) -> Vec<WallSequence> {
    let ri = r as i64;
    let dq = geometry::to_q(&dir);
    let neg_sq = -s.square(&dq);
    debug_assert!(neg_sq.is_positive());
    let mu: Vec<Q> = c1.iter().map(|&c| Q::new(c, ri)).collect();
    // |sᵢ − sⱼ|² ≤ 2r·bound/(−D²); hence |uᵢ| = rᵢ|sᵢ| ≤ rᵢ·smax.
    let smax_sq = bound * 2 * ri / neg_sq;
    let smax = {
        let mut k = 0i64;
        while Q::from_integer(k * k) < smax_sq {
            k += 1;
        }
        k
    };
    let mut out = Vec::new();
    for ranks in compositions(r).into_iter().filter(|p| p.len() > 1) {
        let k = ranks.len();
        // Base offset u₀ ∈ [0, 1) with rᵢμ + u₀D integral, if any.
        let mut base = Vec::with_capacity(k);
        for &rk in &ranks {
            let x = mu[0] * rk as i64;
            let y = mu[1] * rk as i64;
            let mut found = None;
            for j in 0..dir[0] {
                let u = (Q::from_integer(x.floor().to_integer() + j) - x) / dir[0];
                let u = u - u.floor();
                if (y + u * dir[1]).is_integer() && (x + u * dir[0]).is_integer() {
                    found = Some(u);
                    break;
                }
            }
            match found {
                Some(u) => base.push(u),
                None => break,
            }
        }
        if base.len() < k {
            continue;
        }
        let ranges: Vec<i64> = ranks.iter().map(|&rk| rk as i64 * smax + 1).collect();
        let mut idx: Vec<i64> = ranges[..k - 1].iter().map(|m| -m).collect();
        'outer: loop {
            let mut us: Vec<Q> = idx.iter().zip(&base).map(|(&j, &b)| b + j).collect();
            let last = -us.iter().copied().sum::<Q>();
            if (last - base[k - 1]).is_integer() {
                us.push(last);
                let slopes: Vec<Q> = us.iter().zip(&ranks).map(|(u, &rk)| u / rk as i64).collect();
                let trend = if slopes.windows(2).all(|p| p[0] > p[1]) {
                    1
                } else if slopes.windows(2).all(|p| p[0] < p[1]) {
                    -1
                } else {
                    0
                };
                if trend != 0 {
                    let pieces: Vec<ChernVector> = ranks
                        .iter()
                        .zip(&us)
                        .map(|(&rk, u)| {
                            let c: Vec<i64> = (0..2).map(|a| (mu[a] * rk as i64 + u * dir[a]).to_integer()).collect();
                            ChernVector::new(rk, c, Q::zero())
                        })
                        .collect();
                    let mut cross = Q::zero();
                    for a in 0..k {
                        for b in a + 1..k {
                            let d = geometry::sub(&pieces[a].mu(), &pieces[b].mu());
                            cross -= s.square(&d) * (pieces[a].r as i64 * pieces[b].r as i64) / (2 * ri);
                        }
                    }
                    if cross < bound {
                        out.push(WallSequence {
                            wexp: filtration_exponent(&pieces, s),
                            pieces: pieces.into_iter().map(|p| (p.r, p.c1)).collect(),
                            trend,
                            cross,
                        });
                    }
                }
            }
            let mut m = 0;
            loop {
                if m == k - 1 {
                    break 'outer;
                }
                idx[m] += 1;
                if idx[m] <= ranges[m] {
                    break;
                }
                idx[m] = -ranges[m];
                m += 1;
            }
        }
    }
    out
}

pub(crate) fn product_of(factors: Vec<QSeries>) -> QSeries {
    let mut it = factors.into_iter();
    let first = it.next().unwrap_or_else(QSeries::one);
    it.fold(first, |a, b| &a * &b)
}

/// Product of equal-slope pieces constrained to share `Δ`: the coefficient at
/// `Δ` is `∏ₐ cₐ(Δ)`.
pub fn diagonal_product(s: SurfaceId, parts: &[(u32, QSeries)]) -> QSeries {
    let total: u32 = parts.iter().map(|p| p.0).sum();
    let chi = |r: u32| -vacuum_exponent(s, r);
    let mut dmax: Option<Q> = None;
    for (r, f) in parts {
        if let Some(c) = f.cutoff() {
            let d = (c + chi(*r)) / *r as i64;
            dmax = Some(dmax.map_or(d, |x: Q| x.min(d)));
        }
    }
    let cutoff = dmax.map(|d| d * total as i64 - chi(total));
    let (r0, f0) = &parts[0];
    let mut out = Vec::new();
    for (e, c) in f0.terms() {
        let delta = (e + chi(*r0)) / *r0 as i64;
        let mut prod = c.clone();
        for (r, f) in &parts[1..] {
            let x = f.coeff(delta * *r as i64 - chi(*r));
            if x.is_zero() {
                prod = WRat::zero();
                break;
            }
            prod = &prod * &x;
        }
        if !prod.is_zero() {
            out.push((delta * total as i64 - chi(total), prod));
        }
    }
    QSeries::from_terms(out, cutoff)
}

type ClassKey = (u32, Vec<i64>);

/// Chamber-by-chamber invariants on Σ_ℓ for classes with `rΔ < bound`.
/// Chamber `0` is the suitable one; chamber `k` lies below the `k`-th wall.
pub struct WallEngine {
    surface: SurfaceId,
    bound: QExp,
    max_rank: u32,
    walls: Vec<Q>,
    stack: Mutex<HashMap<ClassKey, Vec<Arc<QSeries>>>>,
    literal: Mutex<HashMap<ClassKey, Vec<Arc<QSeries>>>>,
}

static ENGINES: LazyLock<RwLock<HashMap<(u32, u32, QExp), Arc<WallEngine>>>> = LazyLock::new(Default::default);

impl WallEngine {
    pub fn new(surface: SurfaceId, max_rank: u32, bound: QExp) -> Result<WallEngine> {
        if surface.ell().is_none() {
            return Err(BpsError::Unsupported("wall-crossing on P2".into()));
        }
        Ok(WallEngine {
            surface,
            bound,
            max_rank,
            walls: global_walls(surface, max_rank, bound),
            stack: Mutex::new(HashMap::new()),
            literal: Mutex::new(HashMap::new()),
        })
    }

    /// Shared engine per `(ℓ, max_rank, bound)`.
    pub fn shared(ell: u32, max_rank: u32, bound: QExp) -> Result<Arc<WallEngine>> {
        let key = (ell, max_rank, bound);
        if let Some(e) = ENGINES.read().get(&key) {
            return Ok(e.clone());
        }
        let e = Arc::new(WallEngine::new(SurfaceId::Hirzebruch(ell), max_rank, bound)?);
        Ok(ENGINES.write().entry(key).or_insert(e).clone())
    }

    pub fn surface(&self) -> SurfaceId {
        self.surface
    }

    pub fn bound(&self) -> QExp {
        self.bound
    }

    pub fn walls(&self) -> &[Q] {
        &self.walls
    }

    pub fn chamber_count(&self) -> usize {
        self.walls.len() + 1
    }

    /// Chamber containing `p`, or `OnWall` if `p` sits on a wall.
    pub fn chamber_of(&self, p: RayPoint) -> Result<usize> {
        let mut k = 0;
        for &t in &self.walls {
            match p.above(t) {
                Some(true) => return Ok(k),
                Some(false) => k += 1,
                None => return Err(BpsError::OnWall),
            }
        }
        Ok(k)
    }

    fn check(&self, r: u32, c1: &[i64]) -> Result<()> {
        if r == 0 || r > self.max_rank.max(1) || c1.len() != 2 {
            return Err(BpsError::InvalidInput(format!("class ({r}, {c1:?}) outside engine range")));
        }
        Ok(())
    }

    fn cutoff(&self, r: u32) -> QExp {
        cutoff_for(self.surface, r, self.bound)
    }

    fn sequences(&self, r: u32, c1: &[i64], wall: usize) -> Vec<WallSequence> {
        wall_sequences(self.surface, r, c1, wall_direction(self.walls[wall]), self.bound)
    }

    /// Stack invariants of μ-semistable sheaves in chamber `k`.
    pub fn stack_mu(&self, r: u32, c1: &[i64], k: usize) -> Result<QSeries> {
        self.check(r, c1)?;
        let c1 = reduce(c1, r);
        let key = (r, c1.clone());
        loop {
            let have = self.stack.lock().get(&key).map_or(0, |v| v.len());
            if have > k {
                return Ok((*self.stack.lock()[&key][k]).clone());
            }
            let next = if have == 0 {
                suitable_stack_mu(self.surface, r, &c1, self.bound)?
            } else {
                self.cross_stack(r, &c1, have - 1)?
            };
            let mut map = self.stack.lock();
            let v = map.entry(key.clone()).or_default();
            if v.len() == have {
                let shared = match v.last() {
                    Some(prev) if **prev == next => prev.clone(),
                    _ => Arc::new(next),
                };
                v.push(shared);
            }
        }
    }

    /// `I^μ` below wall `w` from the values above it:
    /// `I₋ = Σ_{s↓} w^E q^X ∏ I₊ − Σ_{s↑, ℓ≥2} w^E q^X ∏ I₋`.
    fn cross_stack(&self, r: u32, c1: &[i64], w: usize) -> Result<QSeries> {
        let mut acc = (*self.stack.lock()[&(r, c1.to_vec())][w]).clone();
        for seq in self.sequences(r, c1, w) {
            let side = if seq.trend > 0 { w } else { w + 1 };
            let mut factors = Vec::with_capacity(seq.pieces.len());
            for (rk, ck) in &seq.pieces {
                factors.push(self.stack_mu(*rk, ck, side)?);
            }
            let term = product_of(factors).shift(seq.cross).scale(&w_power(seq.wexp)?);
            acc = if seq.trend > 0 { &acc + &term } else { &acc - &term };
        }
        Ok(acc.truncate(self.cutoff(r)))
    }

    /// `Ω̄` in chamber `k`, as the equal-slope logarithm of `I^μ`.
    pub fn omegabar(&self, r: u32, c1: &[i64], k: usize) -> Result<QSeries> {
        let out = equal_slope_log(r, c1, |ri, ci| self.stack_mu(ri, ci, k))?;
        Ok(out.truncate(self.cutoff(r)))
    }

    /// `Ω̄` in chamber `k` obtained by iterating the per-class two-sided
    /// wall-crossing sums with Gieseker orderings and `1/|Aut|` factors.
    pub fn omegabar_literal(&self, r: u32, c1: &[i64], k: usize) -> Result<QSeries> {
        self.check(r, c1)?;
        let c1 = reduce(c1, r);
        let key = (r, c1.clone());
        loop {
            let have = self.literal.lock().get(&key).map_or(0, |v| v.len());
            if have > k {
                return Ok((*self.literal.lock()[&key][k]).clone());
            }
            let next = if have == 0 {
                suitable_omegabar(self.surface, r, &c1, self.bound)?
            } else {
                let prev = (*self.literal.lock()[&key][have - 1]).clone();
                (&prev + &self.literal_delta(r, &c1, have - 1)?).truncate(self.cutoff(r))
            };
            let mut map = self.literal.lock();
            let v = map.entry(key.clone()).or_default();
            if v.len() == have {
                v.push(Arc::new(next));
            }
        }
    }

    /// Sum over ordered equal-slope decompositions of `(r, c₁)` with at least
    /// `min_parts` parts of `(1/m!)·∏Ω̄` with all parts at a common `Δ`.
    fn equal_p_factor(&self, r: u32, c1: &[i64], k: usize, min_parts: usize) -> Result<QSeries> {
        let mut acc = QSeries::zero_to(self.cutoff(r));
        for split in equal_slope_splits(r, c1) {
            if split.len() < min_parts {
                continue;
            }
            let mut parts = Vec::with_capacity(split.len());
            for (ri, ci) in &split {
                parts.push((*ri, self.omegabar_literal(*ri, ci, k)?));
            }
            let m = split.len();
            let fact: BigInt = (1..=m as u64).map(BigInt::from).product();
            acc = &acc + &diagonal_product(self.surface, &parts).scale_rational(&BigRational::new(BigInt::one(), fact));
        }
        Ok(acc)
    }

    /// `ΔΩ̄(Γ; J → J′)` across wall `w` for every class of type `(r, c₁)`.
    fn literal_delta(&self, r: u32, c1: &[i64], w: usize) -> Result<QSeries> {
        let mut acc = QSeries::zero_to(self.cutoff(r));
        // All pieces at one slope: equal reduced Hilbert polynomials.
        let same_j = self.equal_p_factor(r, c1, w, 2)?;
        let same_j2 = self.equal_p_factor(r, c1, w + 1, 2)?;
        acc = &(&acc + &same_j) - &same_j2;
        for seq in self.sequences(r, c1, w) {
            let side = if seq.trend > 0 { w } else { w + 1 };
            let mut factors = Vec::with_capacity(seq.pieces.len());
            for (rk, ck) in &seq.pieces {
                factors.push(self.equal_p_factor(*rk, ck, side, 1)?);
            }
            let term = product_of(factors).shift(seq.cross).scale(&w_power(seq.wexp)?);
            acc = if seq.trend > 0 { &acc + &term } else { &acc - &term };
        }
        Ok(acc)
    }

    fn adjacent_chambers(&self, j: Polarization, j2: Polarization) -> Result<(usize, usize)> {
        let (a, b) = (self.chamber_of(RayPoint::of(j)?)?, self.chamber_of(RayPoint::of(j2)?)?);
        if a.abs_diff(b) > 1 {
            return Err(BpsError::NonAdjacent);
        }
        Ok((a, b))
    }

    fn exponent_of(&self, g: &ChernVector) -> QExp {
        geometry::discriminant(g, self.surface) * g.r as i64 + vacuum_exponent(self.surface, g.r)
    }

    /// Per-class `ΔΩ̄(Γ; J → J′)` for polarizations in the same or adjacent
    /// chambers.
    pub fn wallcross_delta(&self, g: &ChernVector, j: Polarization, j2: Polarization) -> Result<WRat> {
        let (a, b) = self.adjacent_chambers(j, j2)?;
        if a == b {
            return Ok(WRat::zero());
        }
        let (red, _) = geometry::twist_reduce(g, self.surface);
        let e = self.exponent_of(g);
        Ok(&self.omegabar(g.r, &red.c1, b)?.coeff(e) - &self.omegabar(g.r, &red.c1, a)?.coeff(e))
    }

    /// Same as [`WallEngine::wallcross_delta`] but from the two-sided sums
    /// over Gieseker-ordered pieces only. Exact for `r ≤ 2`; at `r = 3` it
    /// misses filtrations whose equal-μ pieces differ in `Δ`.
    pub fn wallcross_delta_literal(&self, g: &ChernVector, j: Polarization, j2: Polarization) -> Result<WRat> {
        let (a, b) = self.adjacent_chambers(j, j2)?;
        if a == b {
            return Ok(WRat::zero());
        }
        let (red, _) = geometry::twist_reduce(g, self.surface);
        let d = self.literal_delta(g.r, &red.c1, a.min(b))?.coeff(self.exponent_of(g));
        Ok(if a < b { d } else { -d })
    }
}

/// Which limit to take for a rank-2 factor evaluated on one of its walls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WallSide {
    /// Toward `J_{ε,1}`.
    Above,
    Below,
    /// Mean of both sides.
    Average,
}

type Rank2Key = (u32, Vec<i64>, Q, i8, QExp);

static RANK2: LazyLock<RwLock<HashMap<Rank2Key, QSeries>>> = LazyLock::new(Default::default);

fn sgn(v: i32) -> Q {
    Q::from_integer(v as i64)
}

/// Window terms of the rank-2 closed form: `(X, Y) = (2b−β, 2a−α)` with
/// `X·Y > 0` and `q`-exponent `(ℓ/4)X² + (1/2)XY` below `bound`. The exponent
/// is at least `X²(ℓ + 2t)/4` in the window, which caps `|X|`.
fn window(ell: i64, r: i64, parity: (i64, i64), t_min: Q, bound: QExp) -> Vec<(i64, i64, Q)> {
    // exponent = (ℓX² + 2XY)/(4·(r−1)) for r = 2, /12 for r = 3.
    let scale = if r == 2 { 4 } else { 12 };
    let mut out = Vec::new();
    let xlim = {
        let denom = Q::from_integer(ell) + t_min * 2;
        let mut k = 1i64;
        if denom.is_positive() {
            while Q::from_integer(k * k) * denom < bound * scale {
                k += 1;
            }
        } else {
            k = 0;
        }
        k + 1
    };
    for x in -xlim..=xlim {
        if x == 0 || (x - parity.0).rem_euclid(r) != 0 {
            continue;
        }
        // Y has the sign of X and |Y| ≤ (scale·bound − ℓX²)/(2|X|).
        let ymax = ((bound * scale - Q::from_integer(ell * x * x)) / (2 * x.abs())).floor().to_integer() + 1;
        for ya in 1..=ymax.max(0) {
            let y = ya * x.signum();
            if (y - parity.1).rem_euclid(r) != 0 {
                continue;
            }
            let e = Q::new(ell * x * x + 2 * x * y, scale);
            if e < bound {
                out.push((x, y, e));
            }
        }
    }
    out
}

fn pos_ratio(p: RayPoint) -> Q {
    match p {
        RayPoint::Top => Q::from_integer(i64::MAX / 4),
        RayPoint::Bottom => Q::zero(),
        RayPoint::At(t) | RayPoint::Above(t) | RayPoint::Below(t) => t,
    }
}

/// Rank-2 closed form at a point of the ray; `rΔ < bound`.
fn rank2_closed(ell: u32, c1: &[i64], p: RayPoint, bound: QExp) -> Result<QSeries> {
    let s = SurfaceId::Hirzebruch(ell);
    let (beta, alpha) = (c1[0].rem_euclid(2), (-c1[1]).rem_euclid(2));
    let mut acc = suitable_omegabar(s, 2, &[beta, -alpha], bound)?;
    if p == RayPoint::Top {
        return Ok(acc);
    }
    let h1 = rank1_series(s, cutoff_for(s, 1, bound));
    let h1sq = &h1 * &h1;
    let l = ell as i64;
    let mut coeffs: HashMap<QExp, WRat> = HashMap::new();
    for (x, y, e) in window(l, 2, (beta, alpha), pos_ratio(p), bound) {
        let (xq, yq) = (Q::from_integer(x), Q::from_integer(y));
        // D′·J has the sign of X·n − Y·m, i.e. of D′ = XC − Yf paired with J.
        let here = p.sign(xq, yq);
        if here == 0 {
            return Err(BpsError::OnWall);
        }
        let diff = sgn(here) - sgn(RayPoint::Top.sign(xq, yq));
        if diff.is_zero() {
            continue;
        }
        let a = (l - 2) * x + 2 * y;
        let f = (&WRat::w_pow(-a) - &WRat::w_pow(a))
            .scale(&BigRational::new((*diff.numer()).into(), (4 * *diff.denom()).into()));
        let slot = coeffs.entry(e).or_insert_with(WRat::zero);
        *slot = &*slot + &f;
    }
    for (e, f) in coeffs {
        acc = &acc + &(&QSeries::monomial(e, f) * &h1sq);
    }
    Ok(acc)
}

fn rank2_at(ell: u32, c1: &[i64], p: RayPoint, side: WallSide, bound: QExp) -> Result<QSeries> {
    let t = pos_ratio(p);
    let c1r = vec![c1[0].rem_euclid(2), c1[1].rem_euclid(2)];
    let key = (ell, c1r.clone(), t, side as i8, bound);
    if let Some(s) = RANK2.read().get(&key) {
        return Ok(s.clone());
    }
    let out = match rank2_closed(ell, &c1r, p, bound) {
        Err(BpsError::OnWall) => match side {
            WallSide::Above => rank2_closed(ell, &c1r, RayPoint::Above(t), bound)?,
            WallSide::Below => rank2_closed(ell, &c1r, RayPoint::Below(t), bound)?,
            WallSide::Average => {
                let a = rank2_closed(ell, &c1r, RayPoint::Above(t), bound)?;
                let b = rank2_closed(ell, &c1r, RayPoint::Below(t), bound)?;
                (&a + &b).scale_rational(&BigRational::new(1.into(), 2.into()))
            }
        },
        other => other?,
    };
    RANK2.write().insert(key, out.clone());
    Ok(out)
}

/// Rank-3 closed form: the suitable function plus a window sum over
/// `(X, Y) = (3b−2β, 3a−2α)` of rank-1 × rank-2 terms, the rank-2 factor
/// taken at `J_{|X|,|Y|}`.
fn rank3_closed(ell: u32, c1: &[i64], p: RayPoint, side: WallSide, bound: QExp) -> Result<QSeries> {
    let s = SurfaceId::Hirzebruch(ell);
    let (beta, alpha) = (c1[0].rem_euclid(3), (-c1[1]).rem_euclid(3));
    let mut acc = suitable_omegabar(s, 3, &[beta, -alpha], bound)?;
    if p == RayPoint::Top {
        return Ok(acc);
    }
    let h1 = rank1_series(s, cutoff_for(s, 1, bound));
    let l = ell as i64;
    let parity = ((-2 * beta).rem_euclid(3), (-2 * alpha).rem_euclid(3));
    for (x, y, e) in window(l, 3, parity, pos_ratio(p), bound) {
        let (xq, yq) = (Q::from_integer(x), Q::from_integer(y));
        let here = p.sign(xq, yq);
        if here == 0 {
            return Err(BpsError::OnWall);
        }
        let diff = sgn(here) - sgn(RayPoint::Top.sign(xq, yq));
        if diff.is_zero() {
            continue;
        }
        // b, a from X = 3b − 2β, Y = 3a − 2α.
        let b = (x + 2 * beta) / 3;
        let a = (y + 2 * alpha) / 3;
        let jw = RayPoint::At(Q::new(y.abs(), x.abs()));
        let h2 = rank2_at(ell, &[b, -a], jw, side, bound)?;
        let w = (l - 2) * x + 2 * y;
        let f = (&WRat::w_pow(-w) - &WRat::w_pow(w))
            .scale(&BigRational::new((*diff.numer()).into(), (2 * *diff.denom()).into()));
        acc = &acc + &(&(&h2 * &h1).shift(e) * &QSeries::constant(f));
    }
    Ok(acc.truncate(cutoff_for(s, 3, bound)))
}

/// `h_{r,c₁}` at a polarization of Σ_ℓ by the explicit `r = 2, 3` formulas.
pub fn genfun_at_polarization(r: u32, c1: &[i64], ell: u32, j: Polarization, cutoff: QExp) -> Result<GenFun> {
    genfun_at_polarization_with(r, c1, ell, j, cutoff, WallSide::Average)
}

pub fn genfun_at_polarization_with(
    r: u32,
    c1: &[i64],
    ell: u32,
    j: Polarization,
    cutoff: QExp,
    side: WallSide,
) -> Result<GenFun> {
    let s = SurfaceId::Hirzebruch(ell);
    let p = RayPoint::of(j)?;
    if p == RayPoint::Bottom && ell == 0 {
        return Err(BpsError::Unsupported("J(1,eps) on Σ₀".into()));
    }
    let bound = cutoff - vacuum_exponent(s, r);
    let series = match r {
        2 => rank2_closed(ell, c1, p, bound)?,
        3 => rank3_closed(ell, c1, p, side, bound)?,
        _ => return Err(BpsError::Unsupported(format!("closed wall-crossing formula for rank {r}"))),
    };
    Ok(GenFun { surface: s, r, c1: c1.to_vec(), polarization: j, flavor: Flavor::OmegaBar, series })
}

/// `Ω̄` generating function at `j` through the chamber engine.
pub fn genfun_via_chambers(r: u32, c1: &[i64], ell: u32, j: Polarization, cutoff: QExp) -> Result<GenFun> {
    let s = SurfaceId::Hirzebruch(ell);
    let bound = cutoff - vacuum_exponent(s, r);
    let eng = WallEngine::shared(ell, r.max(2), bound)?;
    let k = eng.chamber_of(RayPoint::of(j)?)?;
    let series = eng.omegabar(r, c1, k)?;
    Ok(GenFun { surface: s, r, c1: c1.to_vec(), polarization: j, flavor: Flavor::OmegaBar, series })
}

#[cfg(test)]
mod tests;
