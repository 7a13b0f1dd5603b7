use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use bps_cli::cache::{Cache, CACHE_ENV};
use bps_cli::check::{run_suite, Suite};
use bps_cli::job::{parse_class, parse_surface, JobSpec, PolarizationArg};
use bps_cli::output::{
    error_kind, error_status, to_wire, write_csv, write_json, write_report, write_text, ErrorWire, Format,
};
use bps_core::geometry::SurfaceId;
use bps_core::BpsError;

#[derive(Parser)]
#[command(name = "bps", version, about = "Refined sheaf invariants on P2 and Hirzebruch surfaces")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Cache root; falls back to $BPS_CACHE_DIR, no caching if neither is set.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generating function and invariant table of one or more classes.
    Compute {
        /// `p2` or `hirzebruch:<l>`.
        #[arg(long, value_parser = parse_surface)]
        surface: SurfaceId,
        #[arg(long)]
        rank: u32,
        /// First Chern class as a comma list; repeat for several classes.
        #[arg(long, value_parser = parse_class, allow_hyphen_values = true)]
        c1: Vec<Vec<i64>>,
        /// `suitable` or `m,n` for m(C + l f) + n f.
        #[arg(long, default_value = "suitable")]
        polarization: PolarizationArg,
        /// q-levels above the leading exponent of the invariants.
        #[arg(long, default_value_t = 5)]
        qorders: u32,
    },
    /// Run a verification suite.
    Check {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
    },
}

fn fail(format: Format, e: &BpsError) -> ExitCode {
    let err = ErrorWire { kind: error_kind(e).into(), message: e.to_string() };
    match format {
        Format::Json => {
            let body = serde_json::json!({ "error": err });
            println!("{}", serde_json::to_string_pretty(&body).unwrap());
        }
        _ => eprintln!("error ({}): {}", err.kind, err.message),
    }
    ExitCode::from(error_status(e))
}

fn compute(format: Format, cache: Option<Cache>, specs: Vec<JobSpec>) -> ExitCode {
    for s in &specs {
        if let Err(e) = s.validate() {
            return fail(format, &e);
        }
    }
    let done: Result<Vec<_>, BpsError> = specs.par_iter().map(|s| s.run(cache.as_ref())).collect();
    let done = match done {
        Ok(d) => d,
        Err(e) => return fail(format, &e),
    };
    let wires: Result<Vec<_>, _> = done.iter().map(to_wire).collect();
    let wires = match wires {
        Ok(w) => w,
        Err(e) => return fail(format, &e),
    };
    let mut out = io::stdout().lock();
    let written = match format {
        Format::Json => write_json(&mut out, &wires).map_err(io::Error::from),
        Format::Csv => write_csv(&mut out, &wires).map_err(io::Error::from),
        Format::Text => write_text(&mut out, &done),
    };
    match written.and_then(|_| out.flush()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let cache = cli.cache_dir.map(Cache::new);
    match cli.command {
        Command::Compute { surface, rank, c1, polarization, qorders } => {
            let classes = if c1.is_empty() { vec![vec![0; surface.b2()]] } else { c1 };
            let specs = classes.into_iter().map(|c1| JobSpec { surface, r: rank, c1, polarization, qorders }).collect();
            compute(cli.format, cache, specs)
        }
        Command::Check { suite } => {
            let report = run_suite(suite);
            let mut out = io::stdout().lock();
            if let Err(e) = write_report(&mut out, &report, cli.format) {
                eprintln!("error: {e}");
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
