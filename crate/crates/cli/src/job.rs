//! Job specifications and their dispatch to the engine.

use std::fmt;
use std::str::FromStr;

use bps_core::blowup::{p2_genfun, p2_omega};
use bps_core::genfun::GenFun;
use bps_core::geometry::{Polarization, SurfaceId};
use bps_core::hn::suitable_genfun_recursive;
use bps_core::invariants::{cutoff_for, extract_table, omegabar_to_omega, vacuum_exponent, InvariantTable};
use bps_core::modular::rank1_genfun;
use bps_core::series::{QExp, QSeries};
use bps_core::wallcross::genfun_at_polarization;
use bps_core::{BpsError, Result};

use crate::cache::Cache;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolarizationArg {
    /// `J_{ε,1}` on Σ_ℓ; the only choice on P².
    Suitable,
    /// `J_{m,n} = m(C + ℓf) + nf`.
    Ray(i64, i64),
}

impl FromStr for PolarizationArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "suitable" {
            return Ok(PolarizationArg::Suitable);
        }
        let (m, n) = s.split_once(',').ok_or_else(|| format!("expected 'suitable' or 'm,n', got {s:?}"))?;
        let parse = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(PolarizationArg::Ray(parse(m)?, parse(n)?))
    }
}

impl fmt::Display for PolarizationArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolarizationArg::Suitable => f.write_str("suitable"),
            PolarizationArg::Ray(m, n) => write!(f, "{m},{n}"),
        }
    }
}

pub fn parse_surface(s: &str) -> std::result::Result<SurfaceId, String> {
    match s {
        "p2" | "P2" => Ok(SurfaceId::ProjectivePlane),
        _ => {
            let ell =
                s.strip_prefix("hirzebruch:").ok_or_else(|| format!("expected 'p2' or 'hirzebruch:<l>', got {s:?}"))?;
            ell.parse::<u32>().map(SurfaceId::Hirzebruch).map_err(|e| format!("{ell:?}: {e}"))
        }
    }
}

pub fn surface_name(s: SurfaceId) -> String {
    match s {
        SurfaceId::ProjectivePlane => "p2".into(),
        SurfaceId::Hirzebruch(l) => format!("hirzebruch:{l}"),
    }
}

pub fn parse_class(s: &str) -> std::result::Result<Vec<i64>, String> {
    s.split(',').map(|x| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}"))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobSpec {
    pub surface: SurfaceId,
    pub r: u32,
    pub c1: Vec<i64>,
    pub polarization: PolarizationArg,
    /// Number of q-levels kept above the leading exponent of `Ω`.
    pub qorders: u32,
}

#[derive(Clone, Debug)]
pub struct Computed {
    pub spec: JobSpec,
    /// Classes with `rΔ < bound` are included.
    pub bound: QExp,
    pub omegabar: GenFun,
    pub table: InvariantTable,
}

impl JobSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BpsError::InvalidInput(m));
        if self.qorders == 0 {
            return bad("qorders must be positive".into());
        }
        if self.c1.len() != self.surface.b2() {
            return bad(format!("c1 needs {} entries on {}", self.surface.b2(), self.surface));
        }
        let max_rank = match (self.surface, self.polarization) {
            (SurfaceId::ProjectivePlane, PolarizationArg::Suitable) => 3,
            (SurfaceId::ProjectivePlane, PolarizationArg::Ray(..)) => {
                return bad("P2 has no polarization choice; use 'suitable'".into())
            }
            (_, PolarizationArg::Suitable) => 4,
            (_, PolarizationArg::Ray(m, n)) => {
                if m <= 0 || n <= 0 {
                    return bad(format!("J({m},{n}) is not ample"));
                }
                3
            }
        };
        if self.r == 0 || self.r > max_rank {
            return Err(BpsError::Unsupported(format!(
                "rank {} on {} at {} polarization (supported: 1..={max_rank})",
                self.r, self.surface, self.polarization
            )));
        }
        Ok(())
    }

    fn cutoff(&self, r: u32, bound: QExp) -> QExp {
        cutoff_for(self.surface, r, bound)
    }

    fn key(&self, what: &str, r: u32, c1: &[i64], bound: QExp) -> String {
        let c1 = c1.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        Cache::key(&[
            what,
            &surface_name(self.surface),
            &r.to_string(),
            &c1,
            &self.polarization.to_string(),
            &bound.to_string(),
        ])
    }

    fn tag(&self) -> Polarization {
        match (self.surface, self.polarization) {
            (SurfaceId::ProjectivePlane, _) => Polarization::PullbackH,
            (_, PolarizationArg::Suitable) => Polarization::SuitableNearFibre,
            (_, PolarizationArg::Ray(m, n)) => Polarization::jmn(m, n),
        }
    }

    /// `Ω̄` of `(r, c1)` on the job's surface and polarization.
    fn omegabar(&self, r: u32, c1: &[i64], bound: QExp) -> Result<GenFun> {
        let cutoff = self.cutoff(r, bound);
        // Twisting by a line bundle leaves the series unchanged.
        let red: Vec<i64> = c1.iter().map(|c| c.rem_euclid(r as i64)).collect();
        let mut h = match (self.surface, self.polarization) {
            (SurfaceId::ProjectivePlane, _) => p2_genfun(r, red[0], bound)?,
            (s, _) if r == 1 => rank1_genfun(s, cutoff),
            (SurfaceId::Hirzebruch(l), PolarizationArg::Suitable) => suitable_genfun_recursive(r, &red, l, cutoff)?,
            (SurfaceId::Hirzebruch(l), PolarizationArg::Ray(m, n)) => {
                genfun_at_polarization(r, &red, l, Polarization::jmn(m, n), cutoff)?
            }
        };
        h.c1 = c1.to_vec();
        h.polarization = self.tag();
        Ok(h)
    }

    fn omega(&self, r: u32, c1: &[i64], bound: QExp) -> Result<QSeries> {
        if self.surface == SurfaceId::ProjectivePlane {
            return Ok(p2_omega(r, c1[0], bound)?.series);
        }
        let h = self.omegabar(r, c1, bound)?;
        Ok(omegabar_to_omega(&h, |ri, ci| self.omega(ri, ci, bound))?.series)
    }

    fn cached<F>(&self, cache: Option<&Cache>, what: &str, bound: QExp, compute: F) -> Result<QSeries>
    where
        F: FnOnce() -> Result<QSeries>,
    {
        match cache {
            Some(c) => c.get_or_try(&self.key(what, self.r, &self.c1, bound), compute),
            None => compute(),
        }
    }

    /// `qorders` levels above the leading exponent of `Ω`, or `qorders`
    /// levels above the vacuum when `Ω` vanishes there.
    fn bound(&self, cache: Option<&Cache>) -> Result<QExp> {
        let probe = QExp::from_integer(self.qorders as i64);
        let s = self.cached(cache, "omega", probe, || self.omega(self.r, &self.c1, probe))?;
        Ok(match s.leading() {
            Some((e, _)) => e - vacuum_exponent(self.surface, self.r) + probe,
            None => probe,
        })
    }

    pub fn run(&self, cache: Option<&Cache>) -> Result<Computed> {
        self.validate()?;
        let bound = self.bound(cache)?;
        let series = self.cached(cache, "omegabar", bound, || Ok(self.omegabar(self.r, &self.c1, bound)?.series))?;
        let omega = self.cached(cache, "omega", bound, || self.omega(self.r, &self.c1, bound))?;
        let omegabar = GenFun {
            surface: self.surface,
            r: self.r,
            c1: self.c1.clone(),
            polarization: self.tag(),
            flavor: bps_core::genfun::Flavor::OmegaBar,
            series,
        };
        let table = extract_table(&omegabar.with_series(omega, bps_core::genfun::Flavor::Omega))?;
        Ok(Computed { spec: self.clone(), bound, omegabar, table })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(surface: SurfaceId, r: u32, c1: &[i64], pol: PolarizationArg, qorders: u32) -> JobSpec {
        JobSpec { surface, r, c1: c1.to_vec(), polarization: pol, qorders }
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_surface("p2"), Ok(SurfaceId::ProjectivePlane));
        assert_eq!(parse_surface("hirzebruch:2"), Ok(SurfaceId::Hirzebruch(2)));
        assert!(parse_surface("hirzebruch:-1").is_err());
        assert!(parse_surface("p3").is_err());
        assert_eq!("3,1".parse(), Ok(PolarizationArg::Ray(3, 1)));
        assert_eq!("suitable".parse(), Ok(PolarizationArg::Suitable));
        assert!("3".parse::<PolarizationArg>().is_err());
        assert_eq!(parse_class("-1, 2"), Ok(vec![-1, 2]));
    }

    #[test]
    fn validation() {
        use PolarizationArg::*;
        let ok = spec(SurfaceId::Hirzebruch(1), 4, &[0, 0], Suitable, 2);
        assert!(ok.validate().is_ok());
        let errs = [
            spec(SurfaceId::Hirzebruch(1), 2, &[0], Suitable, 2),
            spec(SurfaceId::Hirzebruch(1), 2, &[0, 1], Ray(0, 1), 2),
            spec(SurfaceId::Hirzebruch(1), 4, &[0, 1], Ray(1, 1), 2),
            spec(SurfaceId::ProjectivePlane, 4, &[0], Suitable, 2),
            spec(SurfaceId::ProjectivePlane, 2, &[0], Ray(1, 1), 2),
            spec(SurfaceId::ProjectivePlane, 2, &[0], Suitable, 0),
        ];
        for e in errs {
            assert!(e.validate().is_err(), "{e:?}");
        }
    }

    #[test]
    fn qorders_count_levels_above_leading_term() {
        let j = spec(SurfaceId::ProjectivePlane, 3, &[0], PolarizationArg::Suitable, 4);
        let out = j.run(None).unwrap();
        let c2: Vec<i64> = out.table.rows.iter().map(|r| r.c2.to_integer()).collect();
        assert_eq!(c2, [3, 4, 5, 6]);
        let row = out.table.row(3).unwrap();
        assert_eq!((row.dim, row.euler), (10, 18));
    }

    #[test]
    fn ray_matches_wall_crossing_route() {
        use bps_core::wallcross::{RayPoint, WallEngine};
        let j = spec(SurfaceId::Hirzebruch(0), 2, &[0, 1], PolarizationArg::Ray(1, 1), 4);
        let out = j.run(None).unwrap();
        // t = 1 is a wall for other classes only, so both neighbouring
        // chambers carry the same series for this one.
        let eng = WallEngine::shared(0, 2, out.bound).unwrap();
        let one = bps_core::geometry::Q::from_integer(1);
        for p in [RayPoint::Above(one), RayPoint::Below(one)] {
            let k = eng.chamber_of(p).unwrap();
            let direct = eng.omegabar(2, &[0, 1], k).unwrap();
            assert!(out.omegabar.series.agrees_with(&direct));
            assert_eq!(out.omegabar.series.cutoff(), direct.cutoff());
        }
    }

    #[test]
    fn vanishing_class_keeps_requested_bound() {
        let j = spec(SurfaceId::Hirzebruch(1), 2, &[1, 0], PolarizationArg::Suitable, 3);
        let out = j.run(None).unwrap();
        assert!(out.omegabar.series.is_zero());
        assert_eq!(out.bound, QExp::from_integer(3));
        assert!(out.table.rows.is_empty());
    }
}
