//! Acceptance run. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;

use bps_core::blowup::{p2_genfun_via, p2_omega};
use bps_core::genfun::GenFun;
use bps_core::geometry::{Polarization, SurfaceId, Q};
use bps_core::hn::{suitable_genfun_closed, suitable_genfun_recursive, suitable_omegabar};
use bps_core::invariants::{cutoff_for, extract_table, omegabar_to_omega, InvariantTable};
use bps_core::modular::{fibre_product_genfun, fibre_product_series, rank1_genfun, total_set_curve};
use bps_core::series::{qexp, QExp, QSeries, WRat};
use bps_core::wallcross::{genfun_at_polarization, RayPoint, WallEngine};

const P2: SurfaceId = SurfaceId::ProjectivePlane;

fn hz(l: u32) -> SurfaceId {
    SurfaceId::Hirzebruch(l)
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Number of `Δ`-levels between the first nonzero term and the cutoff.
fn q_orders(s: &QSeries) -> i64 {
    match (s.leading(), s.cutoff()) {
        (Some((e, _)), Some(c)) => (c - e).ceil().to_integer(),
        _ => 0,
    }
}

// Rank-3 Betti table on P2.

const BETTI_ROWS: [(i64, &[i64], i64); 4] = [
    (3, &[1, 1, 2, 2, 2, 2], 18),
    (4, &[1, 2, 5, 9, 15, 19, 22, 23, 24], 216),
    (5, &[1, 2, 6, 12, 25, 43, 70, 98, 125, 142, 154, 156], 1512),
    (6, &[1, 2, 6, 13, 28, 53, 99, 165, 264, 383, 515, 631, 723, 774, 795], 8109),
];

fn rank_three_table() -> InvariantTable {
    extract_table(&p2_omega(3, 0, qexp(7, 1)).unwrap()).unwrap()
}

fn criterion_table1() -> Outcome {
    let start = Instant::now();
    let t = rank_three_table();
    let elapsed = start.elapsed();
    for (c2, betti, euler) in BETTI_ROWS {
        let row = t.row(c2).ok_or(format!("missing row c2={c2}"))?;
        ensure(row.lower_half() == betti, || format!("c2={c2}: betti {:?}", row.lower_half()))?;
        ensure(row.euler == euler, || format!("c2={c2}: euler {}", row.euler))?;
    }
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!("c2=3..6 exact, euler 18/216/1512/8109, {elapsed:.2?}"))
}

// Poincaré duality sums.

fn criterion_duality() -> Outcome {
    let t = rank_three_table();
    let mut sums = Vec::new();
    for (c2, _, euler) in BETTI_ROWS {
        let row = t.row(c2).unwrap();
        let half = row.lower_half();
        let (mid, below) = half.split_last().unwrap();
        let total = 2 * below.iter().sum::<i64>() + mid;
        ensure(total == euler && row.duality_sum() == euler, || format!("c2={c2}: {total} vs {euler}"))?;
        sums.push(format!("2·{}+{}", below.iter().sum::<i64>(), mid));
    }
    Ok(sums.join(", "))
}

// Rank one against partition counting.

fn partitions(n: usize, max: usize, out: &mut usize) {
    if n == 0 {
        *out += 1;
        return;
    }
    for part in (1..=max.min(n)).rev() {
        partitions(n - part, part, out);
    }
}

/// Ordered triples of partitions with total size `n`, by enumeration.
fn partition_triples(n: usize) -> i64 {
    let p: Vec<usize> = (0..=n)
        .map(|k| {
            let mut c = 0;
            partitions(k, k, &mut c);
            c
        })
        .collect();
    let mut total = 0;
    for a in 0..=n {
        for b in 0..=n - a {
            total += p[a] * p[b] * p[n - a - b];
        }
    }
    total as i64
}

fn criterion_rank_one() -> Outcome {
    let h = rank1_genfun(P2, cutoff_for(P2, 1, qexp(9, 1)));
    let omega =
        omegabar_to_omega(&h, |_, _| unreachable!("rank one has no lower classes")).map_err(|e| e.to_string())?;
    let t = extract_table(&omega).map_err(|e| e.to_string())?;
    let mut seen = Vec::new();
    for n in 0..=8 {
        let row = t.row(n).ok_or(format!("missing n={n}"))?;
        let want = partition_triples(n as usize);
        ensure(row.euler == want, || format!("n={n}: {} vs {want}", row.euler))?;
        seen.push(row.euler.to_string());
    }
    Ok(seen.join(","))
}

// Fibre-product leading term.

fn criterion_anchor() -> Outcome {
    for r in 1..=4u32 {
        for l in 0..3 {
            let h = fibre_product_genfun(r, &[0, 0], l, qexp(1, 1)).map_err(|e| e.to_string())?;
            let (_, c) = h.series.leading().ok_or("empty series")?;
            ensure(*c == total_set_curve(r, 0), || format!("r={r} l={l}"))?;
        }
    }
    Ok("r=1..4, l=0..2".into())
}

// Rank four, closed form against recursion.

fn w(k: i64) -> WRat {
    WRat::w_pow(k)
}

fn one_minus(k: i64) -> WRat {
    &WRat::one() - &w(k)
}

fn rat(n: i64, d: i64) -> WRat {
    WRat::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn scaled(c: WRat, s: &QSeries) -> QSeries {
    &QSeries::constant(c) * s
}

fn criterion_rank_four() -> Outcome {
    let s = hz(1);
    let bound = qexp(5, 1);
    let big = |r: u32| fibre_product_series(r, 0, cutoff_for(s, r, bound)).unwrap();
    let (h1, h2, h3, h4) = (big(1), big(2), big(3), big(4));
    let p8 = &WRat::one() + &w(8);
    let mut first = h4.clone();
    for (c, t) in [
        (&(&p8 / &one_minus(8)) * &rat(1, 2), h2.pow(2)),
        (&p8 / &one_minus(8), &h1 * &h3),
        (&one_minus(16) / &(&one_minus(4) * &one_minus(6).pow(2)), &h1.pow(2) * &h2),
        (&(&one_minus(16) / &one_minus(4).pow(4)) * &rat(1, 4), h1.pow(4)),
    ] {
        first = &first + &scaled(c, &t);
    }
    let cut = cutoff_for(s, 4, bound);
    let closed = suitable_genfun_closed(4, 0, 1, cut).map_err(|e| e.to_string())?.series;
    let recursive = suitable_genfun_recursive(4, &[0, 0], 1, cut).map_err(|e| e.to_string())?.series;
    ensure(closed.agrees_with(&first), || "closed form vs first display".into())?;
    ensure(closed.agrees_with(&recursive), || "closed form vs recursion".into())?;

    let o = |r: u32, g: i64| suitable_omegabar(s, r, &[0, g], bound).unwrap();
    let (o1, o20, o2f, o30, o3f) = (o(1, 0), o(2, 0), o(2, 1), o(3, 0), o(3, 1));
    let sum = |xs: Vec<WRat>| xs.into_iter().fold(WRat::zero(), |a, b| &a + &b);
    let c4 = sum(vec![
        -(&w(12) / &(&one_minus(8) * &one_minus(12).pow(2))),
        &(&(&WRat::one() + &w(24)) / &(&one_minus(12) * &one_minus(24))) * &rat(1, 2),
        -(&rat(1, 3) / &one_minus(24)),
        -(&rat(1, 4) / &one_minus(16)),
        rat(1, 24),
    ]);
    let c2_0 = sum(vec![
        &(&rat(2, 1) * &(&WRat::one() + &w(20))) / &(&one_minus(16) * &one_minus(24)),
        &(&WRat::one() + &w(24)) / &(&one_minus(12) * &one_minus(24)),
        -(&rat(2, 1) / &one_minus(24)),
        -one_minus(16).recip(),
        rat(1, 2),
    ]);
    let c2_f = sum(vec![
        &(&rat(2, 1) * &(&w(10) + &w(30))) / &(&one_minus(16) * &one_minus(24)),
        &(&rat(2, 1) * &w(18)) / &(&one_minus(12) * &one_minus(24)),
    ]);
    let c22_0 = sum(vec![-one_minus(16).recip(), rat(1, 2)]);
    let c22_f = -(&w(8) / &one_minus(16));
    let c3_0 = sum(vec![-(&rat(2, 1) / &one_minus(24)), rat(1, 1)]);
    let c3_f = -(&(&rat(2, 1) * &(&w(8) + &w(16))) / &one_minus(24));
    let mut second = h4;
    for (c, t) in [
        (c4, o1.pow(4)),
        (c2_0, &o1.pow(2) * &o20),
        (c2_f, &o1.pow(2) * &o2f),
        (c22_0, o20.pow(2)),
        (c22_f, o2f.pow(2)),
        (c3_0, &o1 * &o30),
        (c3_f, &o1 * &o3f),
    ] {
        second = &second - &scaled(c, &t);
    }
    ensure(recursive.agrees_with(&second), || "recursion vs second display".into())?;
    let n = q_orders(&closed);
    ensure(n >= 5, || format!("only {n} q-orders"))?;
    Ok(format!("both displays, closed = recursive, {n} q-orders"))
}

// Routes through different blow-up residues.

fn criterion_p2_routes(r: u32, c: i64, ks: &[i64]) -> Outcome {
    let bound = qexp(7, 1);
    let base = p2_genfun_via(r, c, ks[0], bound).map_err(|e| e.to_string())?.series;
    for &k in &ks[1..] {
        let other = p2_genfun_via(r, c, k, bound).map_err(|e| e.to_string())?.series;
        ensure(base.agrees_with(&other), || format!("route k={k} differs"))?;
    }
    let n = q_orders(&base);
    ensure(n >= 5, || format!("only {n} q-orders"))?;
    Ok(format!("routes k={ks:?} agree, {n} q-orders"))
}

// Closed forms against the chamber engine.

fn at(t: Q) -> Polarization {
    Polarization::jmn(*t.denom(), *t.numer())
}

fn chamber_points(walls: &[Q]) -> Vec<Q> {
    let mut pts: Vec<Q> = walls.windows(2).map(|p| (p[0] + p[1]) / 2).collect();
    pts.push(walls[walls.len() - 1] / 2);
    pts
}

const CLASSES: [[i64; 2]; 4] = [[0, 0], [1, 0], [0, 1], [1, 1]];

fn criterion_wallcrossing() -> Outcome {
    let bound = qexp(11, 1);
    let mut checked = 0;
    let mut min_orders = i64::MAX;
    for l in 0..3u32 {
        let eng = WallEngine::shared(l, 3, bound).map_err(|e| e.to_string())?;
        let pts = chamber_points(eng.walls());
        ensure(pts.len() >= 3, || format!("l={l}: {} chambers", pts.len()))?;
        let picks = [pts[0], pts[pts.len() / 3], pts[2 * pts.len() / 3], pts[pts.len() - 1]];
        for r in 2..=3u32 {
            let cut = cutoff_for(hz(l), r, bound);
            for c1 in CLASSES {
                for &t in &picks {
                    let k = eng.chamber_of(RayPoint::At(t)).map_err(|e| e.to_string())?;
                    let closed = genfun_at_polarization(r, &c1, l, at(t), cut).map_err(|e| e.to_string())?.series;
                    let iterated = eng.omegabar(r, &c1, k).map_err(|e| e.to_string())?;
                    ensure(closed.agrees_with(&iterated), || format!("l={l} r={r} c1={c1:?} t={t}"))?;
                    if !closed.is_zero() {
                        min_orders = min_orders.min(q_orders(&closed));
                    }
                    checked += 1;
                }
            }
        }
    }
    ensure(min_orders >= 5, || format!("only {min_orders} q-orders"))?;
    Ok(format!("{checked} (l, r, c1, chamber) cases, >= {min_orders} q-orders"))
}

// Geometric properties of every table.

fn suitable_omega(l: u32, r: u32, c1: &[i64], bound: QExp) -> GenFun {
    let h = suitable_genfun_recursive(r, c1, l, cutoff_for(hz(l), r, bound)).unwrap();
    omegabar_to_omega(&h, |ri, ci| Ok(suitable_omega(l, ri, ci, bound).series)).unwrap()
}

fn criterion_properties() -> Outcome {
    let mut tables = 0;
    let mut rows = 0;
    let mut record = |t: Result<InvariantTable, String>, what: String| -> Result<(), String> {
        let t = t.map_err(|e| format!("{what}: {e}"))?;
        tables += 1;
        rows += t.rows.len();
        Ok(())
    };
    for r in 1..=3u32 {
        for c in 0..r as i64 {
            let h = p2_omega(r, c, qexp(6, 1)).map_err(|e| e.to_string())?;
            record(extract_table(&h).map_err(|e| e.to_string()), format!("P2 r={r} c={c}"))?;
        }
    }
    for l in 0..3u32 {
        for r in 1..=4u32 {
            let bound = if r == 4 { qexp(4, 1) } else { qexp(5, 1) };
            for b in 0..r as i64 {
                for g in 0..r as i64 {
                    let h = suitable_omega(l, r, &[b, g], bound);
                    record(extract_table(&h).map_err(|e| e.to_string()), format!("l={l} r={r} c1=[{b},{g}]"))?;
                }
            }
        }
        let bound = qexp(5, 1);
        let eng = WallEngine::shared(l, 3, bound).map_err(|e| e.to_string())?;
        let pts = chamber_points(eng.walls());
        for t in [pts[0], pts[pts.len() / 2], pts[pts.len() - 1]] {
            let k = eng.chamber_of(RayPoint::At(t)).map_err(|e| e.to_string())?;
            for r in 2..=3u32 {
                for c1 in CLASSES {
                    let mut h = genfun_at_polarization(r, &c1, l, at(t), cutoff_for(hz(l), r, bound))
                        .map_err(|e| e.to_string())?;
                    h.series = eng.omegabar(r, &c1, k).map_err(|e| e.to_string())?;
                    let omega = omegabar_to_omega(&h, |ri, ci| eng.omegabar(ri, ci, k)).map_err(|e| e.to_string())?;
                    record(extract_table(&omega).map_err(|e| e.to_string()), format!("l={l} r={r} c1={c1:?} t={t}"))?;
                }
            }
        }
    }
    Ok(format!("{tables} tables, {rows} rows integral, palindromic, nonnegative, span 2·dim"))
}

// Vanishing off fibre degree.

fn criterion_vanishing() -> Outcome {
    let mut n = 0;
    for l in 0..3u32 {
        for r in 2..=3u32 {
            for b in 0..r as i64 {
                for g in 0..r as i64 {
                    // c₁·f = b.
                    if b % r as i64 == 0 {
                        continue;
                    }
                    let h = suitable_omegabar(hz(l), r, &[b, g], qexp(6, 1)).map_err(|e| e.to_string())?;
                    ensure(h.is_zero() && h.cutoff().is_some(), || format!("l={l} r={r} c1=[{b},{g}]"))?;
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} classes identically zero below cutoff"))
}

// Independence of l.

fn criterion_ell_independence() -> Outcome {
    for r in 1..=4u32 {
        let bound = if r == 4 { qexp(4, 1) } else { qexp(6, 1) };
        for g in 0..r as i64 {
            let base = suitable_omegabar(hz(0), r, &[0, g], bound).map_err(|e| e.to_string())?;
            for l in 1..3 {
                let other = suitable_omegabar(hz(l), r, &[0, g], bound).map_err(|e| e.to_string())?;
                ensure(other.agrees_with(&base), || format!("r={r} c1=[0,{g}] l={l}"))?;
            }
        }
    }
    Ok("r=1..4, all c1·f ≡ 0 classes, l=0,1,2".into())
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 rank-3 P2 Betti table", criterion_table1),
        ("2 Betti table duality sums", criterion_duality),
        ("3 rank-1 partition oracle", criterion_rank_one),
        ("4 fibre-product leading coefficient", criterion_anchor),
        ("5a rank-4 closed vs recursive", criterion_rank_four),
        ("5b (3,H) on P2, two routes", || criterion_p2_routes(3, 1, &[0, 1, 2])),
        ("5c (2,0) on P2, B21 vs B20", || criterion_p2_routes(2, 0, &[1, 0])),
        ("5d closed-form vs iterated wall-crossing", criterion_wallcrossing),
        ("6 property suite", criterion_properties),
        ("7 vanishing off fibre degree", criterion_vanishing),
        ("8 independence of l", criterion_ell_independence),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(o) => o,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into())),
        };
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                println!("FAIL  {name}: {why} [{secs:.1}s]");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
