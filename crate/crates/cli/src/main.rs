use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cellscan_core::campaign::{compare_model, run_analytic, run_campaign, run_seed, sweep, SweepAxis};
use cellscan_core::output::{render, write_analytic, write_cdf_svg, write_compare, write_summary_csv, write_sweep, write_user_csv};
use cellscan_core::{Error, Result, ScenarioConfig, Summary};
use clap::{Parser, Subcommand};

/// Directional cell discovery simulator and analytic model.
#[derive(Parser)]
#[command(name = "cellscan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign and write users.csv, summary.csv, cdf.svg and scenario.ini.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the analytic step distribution as CSV.
    Analytic {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one replicated campaign per value and print a long-form CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// location_error, edp_sectors, db_range or obstacles
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
    },
    /// Print analytic against simulated means as CSV.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
}

fn simulate(config: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut cfg = ScenarioConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let stats = run_campaign(&cfg)?;
    let codebook = cfg.codebook()?;
    write_user_csv(&out.join("users.csv"), &stats, &codebook)?;

    let mut summaries = vec![stats.summary()];
    for k in 1..cfg.replicates as u64 {
        summaries.push(run_seed(&cfg, cfg.seed.wrapping_add(k))?.0.summary());
    }
    if summaries.len() > 1 {
        summaries.push(Summary::average(&summaries));
    }
    write_summary_csv(&out.join("summary.csv"), &summaries)?;
    if !write_cdf_svg(&out.join("cdf.svg"), &stats)? {
        eprintln!("no discovered users; cdf.svg not written");
    }
    let scenario = out.join("scenario.ini");
    fs::write(&scenario, cfg.to_text()).map_err(|e| Error::Io {
        path: scenario,
        source: e,
    })?;

    let s = &summaries[0];
    println!(
        "{}: {} users, mean MT switches {:.2}, mean BS switches {:.2}, unreachable {:.3}",
        s.algorithm, s.users, s.mean_mt, s.mean_bs, s.unreachable
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, seed, out } => simulate(&config, seed, &out),
        Command::Analytic { config } => {
            let pmf = run_analytic(&ScenarioConfig::load(&config)?)?;
            print!("{}", render(|w| write_analytic(w, &pmf)));
            Ok(())
        }
        Command::Sweep { config, axis, values } => {
            let axis: SweepAxis = axis.parse()?;
            let rows = sweep(&ScenarioConfig::load(&config)?, axis, &values)?;
            print!("{}", render(|w| write_sweep(w, &rows)));
            Ok(())
        }
        Command::Compare { config } => {
            let row = compare_model(&ScenarioConfig::load(&config)?)?;
            print!("{}", render(|w| write_compare(w, std::slice::from_ref(&row))));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
