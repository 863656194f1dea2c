//! `germlab`: batch driver for set-germ analyses.
//!
//! Exit codes: 0 pass/satisfied, 1 fail/violated, 2 inconclusive or
//! hypotheses unmet, 3 usage or I/O error.

mod commands;
mod config;
mod demos;
mod inputs;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use germlab::examples::DEFAULT_SEED;

use commands::{Outcome, PairCheck};
use report::Artifacts;

#[derive(Parser)]
#[command(name = "germlab", version, about = "Tangent cones, the sequence selection property and bi-Lipschitz harnesses")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a null sequence with the ratio test and the definition oracle.
    SspSeq(commands::SspSeqArgs),
    /// Distance test of the selection property for a germ.
    SspGerm(commands::SspGermArgs),
    /// Estimate the direction set of a germ.
    Direction(commands::DirectionArgs),
    /// Box-counting dimension of a direction set.
    Dimension(commands::DimensionArgs),
    /// Extremal Lipschitz extension of scalar anchors.
    Extend(commands::ExtendArgs),
    /// Pseudo-derivative of a map by dyadic rescaling.
    Dphi(commands::DphiArgs),
    /// Tangent cones of A and B = φ(A) correspond under dφ.
    ConeInvariance(commands::PairArgs),
    /// Intersection dimensions of A, B and h(A), h(B) agree.
    DimEquality(commands::PairArgs),
    /// Transversality of a pair, or preservation of weak transversality with --map.
    Transversality(commands::PairArgs),
    /// Run a named example (or `all`, or `list`) end to end.
    Demo(DemoArgs),
}

#[derive(clap::Args)]
struct DemoArgs {
    /// Example name, `all`, or `list`.
    name: String,
    /// Report directory; `all` writes one subdirectory per example.
    #[arg(long, default_value = "reports")]
    out: PathBuf,
}

/// `GERMLAB_SEED` (decimal or 0x-hex) or the default seed.
fn seed() -> Result<u64> {
    match std::env::var("GERMLAB_SEED") {
        Ok(s) => {
            let s = s.trim();
            let v = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                Some(h) => u64::from_str_radix(h, 16),
                None => s.parse(),
            };
            v.with_context(|| format!("GERMLAB_SEED '{s}' is not an integer"))
        }
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn emit(out: Option<&PathBuf>, art: &Artifacts) -> Result<()> {
    match out {
        Some(dir) => report::write_dir(dir, art),
        None => {
            println!("{}", serde_json::to_string_pretty(&art.report)?);
            Ok(())
        }
    }
}

fn demo(a: &DemoArgs) -> Result<Outcome> {
    if a.name == "list" {
        for (n, d) in demos::DEMOS {
            println!("{n:20} {d}");
        }
        return Ok(Outcome::Pass);
    }
    let seed = seed()?;
    if a.name != "all" {
        let (o, art) = demos::run(&a.name, seed)?;
        report::write_dir(&a.out, &art)?;
        eprintln!("{}: {}", a.name, o.name());
        return Ok(o);
    }
    let mut results = Vec::new();
    for (n, _) in demos::DEMOS {
        let (o, art) = demos::run(n, seed)?;
        report::write_dir(&a.out.join(n), &art)?;
        eprintln!("{n}: {}", o.name());
        results.push((n, o));
    }
    report::write_dir(&a.out, &demos::summary(&results))?;
    Ok(if results.iter().all(|(_, o)| *o == Outcome::Pass) { Outcome::Pass } else { Outcome::Fail })
}

macro_rules! with_config {
    ($args:expr, $f:expr) => {{
        let merged = config::merge($args, $args.common.config.as_deref())?;
        let (o, art) = $f(&merged)?;
        emit(merged.common.out.as_ref(), &art)?;
        Ok(o)
    }};
}

fn run(cmd: &Cmd) -> Result<Outcome> {
    match cmd {
        Cmd::SspSeq(a) => with_config!(a, commands::ssp_seq),
        Cmd::SspGerm(a) => with_config!(a, commands::ssp_germ),
        Cmd::Direction(a) => with_config!(a, commands::direction),
        Cmd::Dimension(a) => with_config!(a, commands::dimension),
        Cmd::Extend(a) => with_config!(a, commands::extend),
        Cmd::Dphi(a) => with_config!(a, commands::dphi),
        Cmd::ConeInvariance(a) => with_config!(a, |m| commands::pair(m, PairCheck::ConeInvariance)),
        Cmd::DimEquality(a) => with_config!(a, |m| commands::pair(m, PairCheck::DimEquality)),
        Cmd::Transversality(a) => with_config!(a, |m| commands::pair(m, PairCheck::Transversality)),
        Cmd::Demo(a) => demo(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli.cmd) {
        Ok(o) => ExitCode::from(o.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
