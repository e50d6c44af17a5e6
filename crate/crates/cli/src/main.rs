use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use antsel_core::experiment::{emit_csv, load_config, run_scenarios, write_manifest};
use antsel_core::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "antsel", version, about = "MIMO multicast antenna selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the capacity (and optional SER) experiments of a scenario file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the master seed of every scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Run only the named scenario.
        #[arg(long)]
        scenario: Option<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io { .. } | Error::EnumerationCap { .. } => 1,
        Error::Domain(_) | Error::Contract(_) | Error::Numerical(_) => 2,
    }
}

fn run(
    config: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    scenario: Option<String>,
    jobs: Option<usize>,
) -> Result<(), Error> {
    let start = Instant::now();
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
    }
    let text = std::fs::read_to_string(&config).map_err(|e| Error::Io {
        path: config.clone(),
        source: e,
    })?;
    let mut scenarios = load_config(&config)?;
    if let Some(name) = &scenario {
        scenarios.retain(|s| &s.name == name);
        if scenarios.is_empty() {
            return Err(Error::Config(format!("no scenario named '{name}' in {}", config.display())));
        }
    }
    if let Some(seed) = seed {
        for s in &mut scenarios {
            s.master_seed = seed;
        }
    }
    let report = run_scenarios(&scenarios)?;
    let files = emit_csv(&report, &out)?;
    let manifest = write_manifest(&report, &out, &text, seed, start.elapsed().as_secs_f64(), &files)?;

    for sr in &report.scenarios {
        println!("scenario {} ({})", sr.scenario.name, sr.scenario.mode.as_str());
        if let Some(cap) = &sr.capacity {
            for s in &cap.summaries {
                println!(
                    "  {:>10} snr {:>6.2} dB  mean {:.4} ± {:.4}  min-rate {:.4} bits/s/Hz",
                    s.method.as_str(),
                    s.snr_db,
                    s.mean,
                    s.mean_stderr,
                    s.min_rate
                );
            }
        }
        if let Some(ser) = &sr.ser {
            for r in &ser.rows {
                println!("  {:>10} snr {:>6.2} dB  SER {:.4e}", r.method, r.snr_db, r.ser);
            }
        }
    }
    for f in files.iter().chain(std::iter::once(&manifest)) {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            scenario,
            jobs,
        } => run(config, out, seed, scenario, jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
