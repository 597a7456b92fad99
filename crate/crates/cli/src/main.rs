use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use firelab::cayley::{Ball, BallOptions, DEFAULT_MEMORY_BUDGET};
use firelab::group::Group;
use firelab::isoperimetry::run_batch;
use firelab::xlab::{
    batch_csv, emit_csv, growth_csv, report_csv, run_experiment_with, run_paths, shield_verify, CacheStatus,
    CacheStore, ExperimentConfig, FamilySpec, RunOptions, CACHE_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "firelab", version, about = "Fire containment and retainment on Cayley graphs")]
struct Cli {
    /// Refuse to enumerate balls estimated above this size (bytes, or with a K/M/G suffix).
    #[arg(long, global = true, value_parser = parse_bytes, default_value_t = DEFAULT_MEMORY_BUDGET)]
    memory_budget: u64,

    /// Ball cache directory.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print v(R) for R = 0..=RMAX.
    Growth { group: String, rmax: u32 },
    /// Run the experiment described by a config file and write its CSV log.
    Simulate {
        config: PathBuf,
        /// Overrides the config's output path; `-` writes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Load and store balls in the cache directory.
        #[arg(long)]
        cached: bool,
    },
    /// Isoperimetry checks on random subsets of B_{3R}.
    Isoperim {
        group: String,
        r: u32,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// L1 Poincaré checks on random fields over B_{3R}.
    Poincare {
        group: String,
        r: u32,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compile and census the connecting paths of a family file.
    Paths { family: PathBuf },
    /// Run the lamplighter shield with parameter M for T turns and check it.
    ShieldVerify { m: u32, t: u32 },
    /// Manage cached balls.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    Build { group: String, r: u32 },
    Verify { group: String, r: u32 },
    List,
}

fn parse_bytes(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let (digits, mult) = match s.chars().last() {
        Some('K' | 'k') => (&s[..s.len() - 1], 1u64 << 10),
        Some('M' | 'm') => (&s[..s.len() - 1], 1 << 20),
        Some('G' | 'g') => (&s[..s.len() - 1], 1 << 30),
        _ => (s, 1),
    };
    digits
        .parse::<u64>()
        .map_err(|e| e.to_string())?
        .checked_mul(mult)
        .ok_or_else(|| "memory budget overflows".to_string())
}

fn batch(kind: &str, group: &str, r: u32, trials: u64, seed: u64, options: BallOptions) -> Result<bool> {
    let g = Group::parse(group)?;
    let ball = Ball::enumerate_with(&g, 3 * r, options).with_context(|| format!("enumerating B_{} of {group}", 3 * r))?;
    let report = run_batch(&ball, r, trials, seed)?;
    print!("{}", batch_csv(&g, r, &report, Some(kind)));
    let violations = if kind == "poincare" {
        report.poincare_violations
    } else {
        report.isoperimetry_violations + report.identity_violations
    };
    eprintln!("{kind}: {violations} violations");
    Ok(violations == 0)
}

fn run(cli: Cli) -> Result<bool> {
    let options = BallOptions {
        memory_budget: cli.memory_budget,
    };
    let store = || cli.cache_dir.clone().map_or_else(CacheStore::from_env, CacheStore::new);
    match cli.command {
        Command::Growth { group, rmax } => {
            let g = Group::parse(&group)?;
            print!("{}", growth_csv(&g, rmax, options)?);
            Ok(true)
        }
        Command::Simulate { config, output, cached } => {
            let cfg = ExperimentConfig::load(&config)?;
            let run_opts = RunOptions {
                ball: options,
                cache: cached.then(store),
            };
            let report = run_experiment_with(&cfg, &run_opts)?;
            match output.or_else(|| cfg.output.as_ref().map(|p| cfg.resolve(p))) {
                Some(p) if p != Path::new("-") => emit_csv(&report, &p)?,
                _ => print!("{}", report_csv(&report)),
            }
            for (r, f) in &report.saved {
                match f {
                    Some(f) => eprintln!("saved fraction at radius {r}: {f}"),
                    None => eprintln!("saved fraction at radius {r}: beyond r0 + T"),
                }
            }
            let c = &report.constants;
            eprintln!("boundary relation holds: {}", c.boundary_relation);
            if let Some(d) = c.min_fire_density {
                eprintln!("min |F_n|/v(r0+n): {d}");
            }
            if let Some(rg) = &report.regime {
                eprintln!(
                    "regime vs v_{}: {} ({})",
                    rg.factor,
                    if rg.in_regime { "in-regime" } else { "out of regime" },
                    rg.reason
                );
            }
            let mut ok = c.boundary_relation;
            if let Some(s) = &report.shield {
                eprintln!(
                    "shield: {} shield vertices burned, budget respected every turn: {}",
                    s.shield_burned,
                    s.budget_respected.iter().all(|&b| b)
                );
                ok &= s.passed();
            }
            eprintln!("wall time: {:.3}s", report.wall_time.as_secs_f64());
            Ok(ok)
        }
        Command::Isoperim { group, r, trials, seed } => batch("isoperimetry", &group, r, trials, seed, options),
        Command::Poincare { group, r, trials, seed } => batch("poincare", &group, r, trials, seed, options),
        Command::Paths { family } => {
            let spec = FamilySpec::load(&family)?;
            let rep = run_paths(&spec)?;
            print!("{}", rep.csv());
            eprintln!(
                "{}: {} paths, {} dropped, pairwise disjoint: {}, max intersections {} (bound {}), diluted to {} (guaranteed {})",
                spec.case,
                rep.rows.len(),
                rep.dropped.len(),
                rep.census.pairwise_disjoint,
                rep.census.max_count,
                rep.census.bound,
                rep.dilution.kept.len(),
                rep.dilution.guaranteed
            );
            Ok(rep.passed())
        }
        Command::ShieldVerify { m, t } => {
            let v = shield_verify(m, t, &RunOptions { ball: options, cache: None })?;
            println!("turn,budget_respected");
            for (n, ok) in v.budget_respected.iter().enumerate() {
                println!("{},{ok}", n + 1);
            }
            println!("R,shield,volume,ratio");
            for c in &v.census {
                println!("{},{},{},{:.9}", c.radius, c.shield, c.volume, c.ratio());
            }
            eprintln!(
                "shield vertices burned: {}; protections on burning vertices: {}; limit 2^-(M+3) = {}",
                v.shield_burned,
                v.protected_burning,
                v.limit()
            );
            Ok(v.passed())
        }
        Command::Cache { ref action } => {
            let store = store();
            match action {
                CacheAction::Build { group, r } => {
                    let g = Group::parse(group)?;
                    match store.build(&g, *r, options)? {
                        CacheStatus::Built { path, volume } => println!("built {} ({volume} elements)", path.display()),
                        CacheStatus::AlreadyPresent { path, volume } => {
                            println!("present {} ({volume} elements)", path.display())
                        }
                        CacheStatus::Verified { .. } => unreachable!("build never verifies"),
                    }
                }
                CacheAction::Verify { group, r } => {
                    let g = Group::parse(group)?;
                    if let CacheStatus::Verified { path, volume } = store.verify(&g, *r)? {
                        println!("ok {} ({volume} elements)", path.display());
                    }
                }
                CacheAction::List => {
                    for e in store.list()? {
                        match e.header {
                            Ok(h) => println!(
                                "{}\t{}\tR={}\tv={}",
                                e.path.display(),
                                h.descriptor,
                                h.radius,
                                h.layer_counts.iter().sum::<u64>()
                            ),
                            Err(err) => println!("{}\tunreadable: {err}", e.path.display()),
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_suffixes() {
        assert_eq!(parse_bytes("512").unwrap(), 512);
        assert_eq!(parse_bytes("2K").unwrap(), 2048);
        assert_eq!(parse_bytes("3g").unwrap(), 3 << 30);
        assert!(parse_bytes("x").is_err());
    }
}
