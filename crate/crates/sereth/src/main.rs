use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sereth::experiments::{self, rows_to_csv, Scenario, ScenarioConfig, SweepRow, CSV_HEADER};

#[derive(Parser)]
#[command(name = "sereth", about = "Deterministic pending-state blockchain simulator")]
struct Cli {
    /// Flat key=value config file; CLI flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and append its CSV row to the output.
    Run(RunArgs),
    /// Run the full (scenario × ratio × seed) grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// geth_unmodified, sereth_client or semantic_mining.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 100)]
    buys: u64,
    #[arg(long, default_value_t = 20)]
    sets: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 15)]
    block_interval: u64,
    #[arg(long, default_value_t = 1)]
    submit_interval: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated buy:set ratios.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20")]
    ratios: Vec<u64>,
    /// Scenario names, or "all".
    #[arg(long, value_delimiter = ',', default_value = "all")]
    scenarios: Vec<String>,
    /// Number of seeds (0..N).
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-scenario (ratio, mean, min, max) plot data here.
    #[arg(long)]
    plot_out: Option<PathBuf>,
}

fn base_config(cli: &Cli) -> Result<ScenarioConfig, String> {
    let mut cfg = ScenarioConfig::new(Scenario::GethUnmodified, 20, 0);
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        for (key, value) in experiments::parse_config_text(&text).map_err(|e| e.to_string())? {
            cfg.apply_kv(&key, &value).map_err(|e| e.to_string())?;
        }
    }
    Ok(cfg)
}

fn write_rows(rows: &[SweepRow], out: Option<&PathBuf>) -> Result<(), String> {
    let csv = rows_to_csv(rows);
    match out {
        Some(path) => fs::write(path, &csv).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main_inner() -> Result<(), String> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => {
            let mut cfg = base_config(&cli)?;
            cfg.scenario = args.scenario.parse::<Scenario>().map_err(|e| e.to_string())?;
            cfg.n_buys = args.buys;
            cfg.n_sets = args.sets;
            cfg.seed = args.seed;
            cfg.block_interval_ticks = args.block_interval;
            cfg.submit_interval_ticks = args.submit_interval;
            let ratio = (cfg.n_buys / cfg.n_sets).max(1);
            let out = experiments::run_scenario(&cfg).map_err(|e| e.to_string())?;
            let row = SweepRow::from_outcome(&out, ratio);
            write_rows(std::slice::from_ref(&row), args.out.as_ref())
        }
        Command::Sweep(args) => {
            let cfg = base_config(&cli)?;
            let scenarios: Vec<Scenario> = if args.scenarios.iter().any(|s| s == "all") {
                Scenario::ALL.to_vec()
            } else {
                args.scenarios
                    .iter()
                    .map(|s| s.parse().map_err(|e: experiments::ConfigError| e.to_string()))
                    .collect::<Result<_, _>>()?
            };
            let seeds: Vec<u64> = (0..args.seeds).collect();
            let rows = experiments::sweep(&cfg, &scenarios, &args.ratios, &seeds)
                .map_err(|e| e.to_string())?;
            write_rows(&rows, args.out.as_ref())?;
            if let Some(path) = &args.plot_out {
                fs::write(path, experiments::emit_plot_data(&rows))
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!("expected CSV header: {CSV_HEADER}");
            ExitCode::FAILURE
        }
    }
}
