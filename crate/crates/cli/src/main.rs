use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use tdchsh_cli::{run_verify, Target, VerifyOptions, SQRT2};
use tdchsh_core::matrix::{scan_row, violation_search, ScanRow, SearchConfig};

#[derive(Parser)]
#[command(name = "tdchsh", version, about = "CHSH checks for ladder-operator and matrix models")]
struct Cli {
    /// Per-mode Fock cutoff for matrix realizations.
    #[arg(long, global = true, default_value_t = 5, value_parser = clap::value_parser!(u64).range(4..=8))]
    cutoff: u64,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for random draws.
    #[arg(long, global = true, env = "TDCHSH_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one verification suite.
    Verify { target: Target },
    /// Random realizations over a grid of perturbation scales.
    Scan {
        /// Perturbation scales, comma separated.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_scale)]
        epsilon: Vec<f64>,
        /// Realizations per scale, seeded from `--seed` upward.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
        /// CSV destination; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for realizations exceeding 2√2.
    Search {
        #[arg(long, default_value_t = 0.1, value_parser = parse_scale)]
        epsilon: f64,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
        restarts: u64,
        #[arg(long, default_value_t = 4000, value_parser = clap::value_parser!(u64).range(1..))]
        iterations: u64,
        /// Destination for the report and realization snapshot.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_scale(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("scale must be finite and non-negative, got {v}"));
    }
    Ok(v)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let cutoff = cli.cutoff as usize;
    match cli.command {
        Command::Verify { target } => {
            let report = run_verify(target, &VerifyOptions { cutoff, seed: cli.seed });
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.human());
            }
            Ok(report.passed)
        }
        Command::Scan { epsilon, seeds, out } => {
            let mut keys: Vec<(f64, u64)> =
                epsilon.iter().flat_map(|&e| (0..seeds).map(move |k| (e, cli.seed.wrapping_add(k)))).collect();
            keys.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let rows: Vec<ScanRow> = keys.iter().map(|&(e, s)| scan_row(cutoff, e, s)).collect::<Result<_, _>>()?;
            let mut csv_text = Vec::new();
            {
                let mut w = csv::Writer::from_writer(&mut csv_text);
                for r in &rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            match &out {
                Some(path) => File::create(path)?.write_all(&csv_text)?,
                None if !cli.json => std::io::stdout().write_all(&csv_text)?,
                None => {}
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&json!({ "schema_version": 1, "cutoff": cutoff, "rows": rows }))?);
            }
            let bounded = rows.iter().all(|r| r.f_td < 4.0);
            if !bounded {
                eprintln!("warning: some rows reach F_TD >= 4");
            }
            Ok(true)
        }
        Command::Search { epsilon, restarts, iterations, out } => {
            let cfg = SearchConfig { cutoff, epsilon, restarts: restarts as usize, iterations, seed: cli.seed };
            let start = Instant::now();
            let outcome = violation_search(&cfg)?;
            let elapsed = start.elapsed().as_secs_f64();
            let r = &outcome.report;
            let artifact = json!({
                "schema_version": 1,
                "report": r,
                "snapshot": outcome.realization.as_ref().map(|x| x.snapshot()),
            });
            if let Some(path) = &out {
                let mut f = File::create(path)?;
                serde_json::to_writer(&mut f, &artifact)?;
                f.write_all(b"\n")?;
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&json!({ "report": r, "wall_time_seconds": elapsed }))?);
            } else {
                println!("{}", r.message);
                println!("F_TD = {}", r.f_td);
                println!("F_TD - 2*sqrt2 = {:e}  (2*sqrt2 = {})", r.excess_over_tsirelson, 2.0 * SQRT2);
                println!("4 - F_TD = {}", r.distance_below_pr_bound);
                println!("Re(P0) = {}  Im(P0) = {}", r.re_p0, r.im_p0);
                println!("constraint residual N - 1 = {:e}", r.constraint_residual);
                println!("sign flipped: {}  best restart: {}", r.sign_flipped, r.best_restart);
                println!("wall time {elapsed:.3} s");
            }
            Ok(r.feasible)
        }
    }
}
