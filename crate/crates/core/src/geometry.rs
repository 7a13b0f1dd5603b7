//! Intersection theory on Σ_ℓ and P², Chern vectors, stability orderings,
//! walls and suitability.
//!
//! Classes on Σ_ℓ are written in the basis `(C, f)` with `C² = −ℓ`,
//! `C·f = 1`, `f² = 0`; on P² in the basis `(H)`.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::BpsError;

/// Small exact rational used for geometric quantities.
pub type Q = Ratio<i64>;

fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SurfaceId {
    Hirzebruch(u32),
    ProjectivePlane,
}

impl SurfaceId {
    /// Rank of the Picard lattice, `b₂`.
    pub fn b2(&self) -> usize {
        match self {
            SurfaceId::Hirzebruch(_) => 2,
            SurfaceId::ProjectivePlane => 1,
        }
    }

    pub fn chi_top(&self) -> i64 {
        self.b2() as i64 + 2
    }

    /// Holomorphic Euler characteristic `χ(O_S)`.
    pub fn chi_o(&self) -> i64 {
        1
    }

    pub fn canonical(&self) -> Vec<i64> {
        match *self {
            SurfaceId::Hirzebruch(l) => vec![-2, -2 - l as i64],
            SurfaceId::ProjectivePlane => vec![-3],
        }
    }

    pub fn fibre(&self) -> Option<Vec<i64>> {
        match self {
            SurfaceId::Hirzebruch(_) => Some(vec![0, 1]),
            SurfaceId::ProjectivePlane => None,
        }
    }

    pub fn ell(&self) -> Option<i64> {
        match *self {
            SurfaceId::Hirzebruch(l) => Some(l as i64),
            SurfaceId::ProjectivePlane => None,
        }
    }

    pub fn intersect(&self, a: &[Q], b: &[Q]) -> Q {
        match *self {
            SurfaceId::Hirzebruch(l) => -qi(l as i64) * a[0] * b[0] + a[0] * b[1] + a[1] * b[0],
            SurfaceId::ProjectivePlane => a[0] * b[0],
        }
    }

    pub fn intersect_int(&self, a: &[i64], b: &[i64]) -> i64 {
        let r = self.intersect(&to_q(a), &to_q(b));
        debug_assert!(r.is_integer());
        r.to_integer()
    }

    pub fn square(&self, a: &[Q]) -> Q {
        self.intersect(a, a)
    }
}

impl fmt::Display for SurfaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceId::Hirzebruch(l) => write!(f, "hirzebruch:{l}"),
            SurfaceId::ProjectivePlane => write!(f, "p2"),
        }
    }
}

pub fn to_q(a: &[i64]) -> Vec<Q> {
    a.iter().map(|&x| qi(x)).collect()
}

/// Topological class `(r, c₁, ch₂)` of a sheaf.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChernVector {
    pub r: u32,
    pub c1: Vec<i64>,
    pub ch2: Q,
}

impl ChernVector {
    pub fn new(r: u32, c1: Vec<i64>, ch2: Q) -> Self {
        ChernVector { r, c1, ch2 }
    }

    /// Builds from `(r, c₁, c₂)` via `ch₂ = c₁²/2 − c₂`.
    pub fn from_c2(s: SurfaceId, r: u32, c1: Vec<i64>, c2: Q) -> Self {
        let c1sq = s.square(&to_q(&c1));
        ChernVector { r, c1, ch2: c1sq / 2 - c2 }
    }

    pub fn c2(&self, s: SurfaceId) -> Q {
        s.square(&to_q(&self.c1)) / 2 - self.ch2
    }

    pub fn mu(&self) -> Vec<Q> {
        self.c1.iter().map(|&x| Q::new(x, self.r as i64)).collect()
    }

    pub fn discriminant(&self, s: SurfaceId) -> Q {
        discriminant(self, s)
    }
}

impl std::ops::Add for &ChernVector {
    type Output = ChernVector;
    fn add(self, o: &ChernVector) -> ChernVector {
        ChernVector {
            r: self.r + o.r,
            c1: self.c1.iter().zip(&o.c1).map(|(a, b)| a + b).collect(),
            ch2: self.ch2 + o.ch2,
        }
    }
}

/// `Δ = (1/r)(c₂ − (r−1)c₁²/(2r))`, equivalently `μ²/2 − ch₂/r`.
pub fn discriminant(g: &ChernVector, s: SurfaceId) -> Q {
    let r = qi(g.r as i64);
    s.square(&g.mu()) / 2 - g.ch2 / r
}

/// Discriminant of the total class of a filtration, computed from the pieces:
/// `rΔ = Σ rᵢΔᵢ − (1/2r) Σ_{i<j} rᵢrⱼ(μᵢ−μⱼ)²`.
pub fn discriminant_of_filtration(pieces: &[ChernVector], s: SurfaceId) -> Q {
    let r: i64 = pieces.iter().map(|p| p.r as i64).sum();
    let mut acc = Q::zero();
    for p in pieces {
        acc += qi(p.r as i64) * discriminant(p, s);
    }
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let d = sub(&pieces[i].mu(), &pieces[j].mu());
            acc -= qi(pieces[i].r as i64 * pieces[j].r as i64) * s.square(&d) / (2 * r);
        }
    }
    acc / r
}

/// `2r²Δ − r²χ(O) + 1`.
pub fn expected_dimension(g: &ChernVector, s: SurfaceId) -> Result<i64, BpsError> {
    let r2 = (g.r as i64).pow(2);
    let d = discriminant(g, s) * 2 * r2 - qi(r2 * s.chi_o()) + 1;
    if !d.is_integer() {
        return Err(BpsError::InvalidInput(format!("non-integral dimension {d} for {g:?}")));
    }
    Ok(d.to_integer())
}

/// Twists `c₁` into `{0, …, r−1}` per basis class. Returns the reduced class
/// and the line bundle `L` with `Γ = Γ′ ⊗ L`.
pub fn twist_reduce(g: &ChernVector, s: SurfaceId) -> (ChernVector, Vec<i64>) {
    let r = g.r as i64;
    let red: Vec<i64> = g.c1.iter().map(|x| x.mod_floor(&r)).collect();
    let l: Vec<i64> = g.c1.iter().zip(&red).map(|(a, b)| (a - b) / r).collect();
    (twist(g, &l.iter().map(|x| -x).collect::<Vec<_>>(), s), l)
}

/// `Γ ⊗ L`: `c₁ ↦ c₁ + rL`, `ch₂ ↦ ch₂ + c₁·L + rL²/2`.
pub fn twist(g: &ChernVector, l: &[i64], s: SurfaceId) -> ChernVector {
    let lq = to_q(l);
    let c1: Vec<i64> = g.c1.iter().zip(l).map(|(a, b)| a + g.r as i64 * b).collect();
    let ch2 = g.ch2 + s.intersect(&to_q(&g.c1), &lq) + qi(g.r as i64) * s.square(&lq) / 2;
    ChernVector { r: g.r, c1, ch2 }
}

/// Polarizations on Σ_ℓ. `Jmn` is `m(C + ℓf) + nf`; the other variants are
/// symbolic limits with an infinitesimal parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    Jmn {
        m: Q,
        n: Q,
    },
    /// `J_{ε,1}`, adjacent to the fibre class.
    SuitableNearFibre,
    /// `J_{1,ε}`, adjacent to the pull-back of the hyperplane class on Σ₁.
    NearPullback,
    /// `J_{1,0}`, the boundary ray itself.
    PullbackH,
}

impl Polarization {
    pub fn jmn(m: i64, n: i64) -> Self {
        Polarization::Jmn { m: qi(m), n: qi(n) }
    }

    /// Position along the ray parameter `t = n/m`; symbolic limits are `None`.
    pub fn ratio(&self) -> Option<Q> {
        match self {
            Polarization::Jmn { m, n } => Some(n / m),
            Polarization::PullbackH => Some(Q::zero()),
            _ => None,
        }
    }

    pub fn is_ample(&self) -> bool {
        match self {
            Polarization::Jmn { m, n } => m.is_positive() && n.is_positive(),
            Polarization::PullbackH => false,
            _ => true,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::Jmn { m, n } => write!(f, "J({m},{n})"),
            Polarization::SuitableNearFibre => write!(f, "J(eps,1)"),
            Polarization::NearPullback => write!(f, "J(1,eps)"),
            Polarization::PullbackH => write!(f, "J(1,0)"),
        }
    }
}

/// `D·J` as a lexicographic pair: the value, then the coefficient of the
/// infinitesimal parameter.
pub fn pair_with(d: &[Q], j: Polarization, s: SurfaceId) -> (Q, Q) {
    match s {
        SurfaceId::ProjectivePlane => (d[0], Q::zero()),
        SurfaceId::Hirzebruch(_) => {
            let (x, y) = (d[0], d[1]);
            match j {
                Polarization::Jmn { m, n } => (m * y + n * x, Q::zero()),
                Polarization::SuitableNearFibre => (x, y),
                Polarization::NearPullback => (y, x),
                Polarization::PullbackH => (y, Q::zero()),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlopeFlavor {
    Mu,
    Gieseker,
}

/// Constant term of the reduced Hilbert polynomial, up to the common `χ(O)`.
pub fn hilbert_constant(g: &ChernVector, s: SurfaceId) -> Q {
    let mu = g.mu();
    let k = to_q(&s.canonical());
    s.square(&mu) / 2 - s.intersect(&k, &mu) / 2 - discriminant(g, s)
}

pub fn slope_order(a: &ChernVector, b: &ChernVector, j: Polarization, s: SurfaceId, flavor: SlopeFlavor) -> Ordering {
    let d = sub(&a.mu(), &b.mu());
    let (v, e) = pair_with(&d, j, s);
    let o = v.cmp(&Q::zero()).then(e.cmp(&Q::zero()));
    match flavor {
        SlopeFlavor::Mu => o,
        SlopeFlavor::Gieseker => o.then_with(|| hilbert_constant(a, s).cmp(&hilbert_constant(b, s))),
    }
}

pub fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// The ray `t = n/m` on which `(μ(Γ′) − μ(Γ))·J_{m,n}` vanishes, if positive.
pub fn wall_locus(sub_class: &ChernVector, g: &ChernVector, s: SurfaceId) -> Option<Q> {
    if s == SurfaceId::ProjectivePlane {
        return None;
    }
    let d = sub(&sub_class.mu(), &g.mu());
    wall_of_direction(&d)
}

/// `t` with `x·t + y = 0` for `D = xC + yf`, when positive.
pub fn wall_of_direction(d: &[Q]) -> Option<Q> {
    let (x, y) = (d[0], d[1]);
    if x.is_zero() {
        return None;
    }
    let t = -y / x;
    t.is_positive().then_some(t)
}

/// A two-block splitting `Γ = Γ₁ + Γ₂` with `rank Γ₁ = r1`, described by
/// `c₁(Γ₁)` and `D = μ₁ − μ₂`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub r1: u32,
    pub c1_sub: Vec<i64>,
    pub d: Vec<Q>,
    /// `(r₁r₂/2r)(−D²)`, the amount the splitting contributes to `rΔ`.
    pub cross: Q,
}

/// All two-block splittings of `(r, c₁)` on Σ_ℓ with `D² < 0` and cross term
/// at most `bound` (`strict` makes it `< bound`).
pub fn negative_splits(s: SurfaceId, r: u32, c1: &[i64], bound: Q, strict: bool) -> Vec<Split> {
    let mut out = Vec::new();
    let Some(l) = s.ell() else { return out };
    if bound.is_negative() || (strict && bound.is_zero()) {
        return out;
    }
    let ri = r as i64;
    for r1 in 1..r {
        let r1i = r1 as i64;
        let r2i = ri - r1i;
        // −D² ≤ bmax
        let bmax = bound * 2 * ri / (r1i * r2i);
        // x = X/(r1 r2) with integer X; |X| ≤ bmax (r1 r2)².
        let den = r1i * r2i;
        let xmax = (bmax * den * den).to_integer() + 1;
        for b in -(xmax + c1[0].abs() + 1)..=(xmax + c1[0].abs() + 1) {
            // x = b/r1 − (β − b)/r2
            let x = Q::new(b, r1i) - Q::new(c1[0] - b, r2i);
            if x.is_zero() || (x.abs() * den).to_integer() > xmax {
                continue;
            }
            // y = e/r1 − (γ − e)/r2 = (r e − r1 γ)/(r1 r2); solve the window in e.
            let lq = qi(l);
            let (ylo, yhi) = if x.is_positive() {
                (lq * x / 2 - bmax / (x * 2), lq * x / 2)
            } else {
                (lq * x / 2, lq * x / 2 - bmax / (x * 2))
            };
            // e = (y r1 r2 + r1 γ)/r
            let to_e = |y: Q| (y * den + qi(r1i * c1[1])) / ri;
            let elo = to_e(ylo).floor().to_integer() - 1;
            let ehi = to_e(yhi).ceil().to_integer() + 1;
            for e in elo..=ehi {
                let y = Q::new(e, r1i) - Q::new(c1[1] - e, r2i);
                let d = vec![x, y];
                let negsq = -s.square(&d);
                if !negsq.is_positive() {
                    continue;
                }
                let cross = negsq * r1i * r2i / (2 * ri);
                if cross > bound || (strict && cross == bound) {
                    continue;
                }
                out.push(Split { r1, c1_sub: vec![b, e], d, cross });
            }
        }
    }
    out
}

/// Suitability of `J` for `Γ`, testing all numerical subsheaf classes allowed
/// by the Bogomolov inequality on both factors.
pub fn is_suitable(j: Polarization, g: &ChernVector, s: SurfaceId) -> bool {
    let (Polarization::Jmn { .. }, Some(_)) = (j, s.ell()) else {
        return matches!(j, Polarization::SuitableNearFibre);
    };
    let bound = qi(g.r as i64) * discriminant(g, s);
    for sp in negative_splits(s, g.r, &g.c1, bound, false) {
        let (dj, _) = pair_with(&sp.d, j, s);
        if dj.is_zero() {
            return false;
        }
        let df = sp.d[0];
        if !df.is_zero() && df.signum() != dj.signum() {
            return false;
        }
    }
    true
}
