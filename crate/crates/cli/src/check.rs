//! Verification suites run by `bps check`.

use std::panic::{catch_unwind, AssertUnwindSafe};

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use bps_core::blowup::{p2_genfun_via, p2_omega};
use bps_core::geometry::SurfaceId;
use bps_core::hn::{suitable_genfun_closed, suitable_genfun_recursive, suitable_omegabar};
use bps_core::invariants::{cutoff_for, extract_table};
use bps_core::modular::{eta_series, rank1_series, theta_hat};
use bps_core::series::{qexp, QSeries};

use crate::wire::{series_from_wire, series_to_wire};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Core,
    Table1,
    Routes,
    All,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn samples() -> Vec<QSeries> {
    let cut = qexp(6, 1);
    vec![
        eta_series(cut),
        rank1_series(SurfaceId::ProjectivePlane, cut),
        rank1_series(SurfaceId::Hirzebruch(1), cut),
        theta_hat(2, cut),
        &QSeries::one() + &eta_series(cut).shift(qexp(2, 3)),
    ]
}

fn ring_axioms() -> Outcome {
    let xs = samples();
    let mut n = 0;
    for a in &xs {
        for b in &xs {
            ensure((a * b) == (b * a), || "multiplication not commutative".into())?;
            ensure((a + b) == (b + a), || "addition not commutative".into())?;
            for c in &xs {
                ensure((&(a * b) * c).agrees_with(&(a * &(b * c))), || "multiplication not associative".into())?;
                ensure((a * &(b + c)).agrees_with(&(&(a * b) + &(a * c))), || "not distributive".into())?;
                n += 1;
            }
        }
        ensure((a + &(-a)) == QSeries::zero_to(a.cutoff().unwrap()), || "a + (-a) is not zero".into())?;
    }
    Ok(format!("{n} triples"))
}

fn inversion() -> Outcome {
    let xs = samples();
    for a in &xs {
        let inv = a.invert().map_err(|e| e.to_string())?;
        let one = a * &inv;
        ensure(one.agrees_with(&QSeries::one()), || format!("a·a⁻¹ ≠ 1 for {a}"))?;
        let back = inv.invert().map_err(|e| e.to_string())?;
        ensure(back.agrees_with(a), || "double inversion differs".into())?;
    }
    Ok(format!("{} series", xs.len()))
}

fn serialization() -> Outcome {
    let xs = samples();
    for a in &xs {
        let back = series_from_wire(&series_to_wire(a)).map_err(|e| e.to_string())?;
        ensure(&back == a, || "round trip differs".into())?;
    }
    Ok(format!("{} series", xs.len()))
}

const BETTI_ROWS: [(i64, &[i64], i64); 4] = [
    (3, &[1, 1, 2, 2, 2, 2], 18),
    (4, &[1, 2, 5, 9, 15, 19, 22, 23, 24], 216),
    (5, &[1, 2, 6, 12, 25, 43, 70, 98, 125, 142, 154, 156], 1512),
    (6, &[1, 2, 6, 13, 28, 53, 99, 165, 264, 383, 515, 631, 723, 774, 795], 8109),
];

fn table1() -> Outcome {
    let t = extract_table(&p2_omega(3, 0, qexp(7, 1)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    for (c2, betti, euler) in BETTI_ROWS {
        let row = t.row(c2).ok_or(format!("missing c2={c2}"))?;
        ensure(row.lower_half() == betti, || format!("c2={c2}: {:?}", row.lower_half()))?;
        ensure(row.euler == euler && row.duality_sum() == euler, || format!("c2={c2}: euler {}", row.euler))?;
    }
    Ok("c2=3..6".into())
}

fn rank_four_closed() -> Outcome {
    let cut = cutoff_for(SurfaceId::Hirzebruch(1), 4, qexp(5, 1));
    let a = suitable_genfun_closed(4, 0, 1, cut).map_err(|e| e.to_string())?.series;
    let b = suitable_genfun_recursive(4, &[0, 0], 1, cut).map_err(|e| e.to_string())?.series;
    ensure(a.agrees_with(&b), || "closed form and recursion differ".into())?;
    let levels = match (a.leading(), a.cutoff()) {
        (Some((e, _)), Some(c)) => (c - e).ceil().to_integer(),
        _ => 0,
    };
    ensure(levels >= 5, || format!("only {levels} q-levels"))?;
    Ok(format!("{levels} q-levels"))
}

fn p2_routes(r: u32, c: i64, ks: &[i64]) -> Outcome {
    let bound = qexp(7, 1);
    let base = p2_genfun_via(r, c, ks[0], bound).map_err(|e| e.to_string())?.series;
    for &k in &ks[1..] {
        let other = p2_genfun_via(r, c, k, bound).map_err(|e| e.to_string())?.series;
        ensure(base.agrees_with(&other), || format!("route k={k} differs"))?;
    }
    Ok(format!("k={ks:?}, {} terms", base.len()))
}

fn p2_tables() -> Outcome {
    let mut rows = 0;
    for r in 1..=3u32 {
        for c in 0..r as i64 {
            let h = p2_omega(r, c, qexp(6, 1)).map_err(|e| e.to_string())?;
            rows += extract_table(&h).map_err(|e| format!("r={r} c={c}: {e}"))?.rows.len();
        }
    }
    Ok(format!("{rows} rows"))
}

fn vanishing() -> Outcome {
    for l in 0..3 {
        for r in 2..=3u32 {
            for b in 1..r as i64 {
                let h =
                    suitable_omegabar(SurfaceId::Hirzebruch(l), r, &[b, 0], qexp(6, 1)).map_err(|e| e.to_string())?;
                ensure(h.is_zero(), || format!("l={l} r={r} c1.f={b}"))?;
            }
        }
    }
    Ok("l=0..2, r=2,3".into())
}

fn checks(suite: Suite) -> Vec<Check> {
    let core: Vec<Check> = vec![
        ("ring axioms", ring_axioms),
        ("inversion round trip", inversion),
        ("serialization round trip", serialization),
    ];
    let table: Vec<Check> = vec![("rank 3 P2 Betti table", table1)];
    let routes: Vec<Check> = vec![
        ("rank 4 closed vs recursive", rank_four_closed),
        ("P2 (3,H) routes", || p2_routes(3, 1, &[0, 1, 2])),
        ("P2 (2,0) routes", || p2_routes(2, 0, &[1, 0])),
    ];
    let extra: Vec<Check> = vec![("P2 tables geometric", p2_tables), ("vanishing off fibre degree", vanishing)];
    match suite {
        Suite::Core => core,
        Suite::Table1 => table,
        Suite::Routes => routes,
        Suite::All => [core, table, routes, extra].concat(),
    }
}

fn run_one((name, f): Check) -> CheckResult {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    let (pass, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CheckResult { name: name.into(), pass, detail }
}

pub fn run_suite(suite: Suite) -> Report {
    let results: Vec<CheckResult> = checks(suite).into_par_iter().map(run_one).collect();
    let name = suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    Report { suite: name, passed: results.iter().all(|r| r.pass), checks: results }
}
