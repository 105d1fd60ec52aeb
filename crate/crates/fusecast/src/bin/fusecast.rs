//! Experiment runner CLI.

use clap::{Parser, Subcommand, ValueEnum};
use fusecast::combine::StatsMode;
use fusecast::harness::{
    emit_forecast_diagram, emit_report, load_config, render_report, run_experiment,
    ExperimentReport, ReportFormat,
};
use fusecast::models::ForecastMode;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "fusecast", about = "Forecast combination experiment runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rolling,
    Iterated,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsArg {
    Frozen,
    Recompute,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a config file
    Run {
        /// Path to the experiment config file
        config_path: PathBuf,
        /// Directory for report and diagram files (overrides the config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for model training (overrides the config)
        #[arg(long)]
        seed: Option<u64>,
        /// Report format (overrides the config)
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Forecast mode (overrides the config)
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Standardization statistics at prediction time (overrides the config)
        #[arg(long, value_enum)]
        stats: Option<StatsArg>,
        /// Ridge strength for the ensemble solve (overrides the config)
        #[arg(long)]
        ridge: Option<f64>,
    },
}

fn diagram_series(report: &ExperimentReport) -> Vec<(String, Vec<f64>)> {
    let ensemble: Vec<(String, Vec<f64>)> = report
        .test_forecasts
        .iter()
        .filter(|(name, _)| name == "nonlinear_ensemble")
        .cloned()
        .collect();
    if !ensemble.is_empty() {
        return ensemble;
    }
    report
        .test_forecasts
        .iter()
        .filter(|(name, _)| matches!(name.as_str(), "arima" | "svm" | "ann"))
        .cloned()
        .collect()
}

fn run(cli: Cli) -> fusecast::Result<()> {
    let Command::Run { config_path, out, seed, format, mode, stats, ridge } = cli.command;
    let mut config = load_config(&config_path)?;
    if let Some(out) = out {
        config.out_dir = out;
    }
    if let Some(seed) = seed {
        config.training.seed = seed;
    }
    if let Some(format) = format {
        config.format = match format {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Table => ReportFormat::Table,
        };
    }
    if let Some(mode) = mode {
        config.mode = match mode {
            ModeArg::Rolling => ForecastMode::Rolling,
            ModeArg::Iterated => ForecastMode::Iterated,
        };
    }
    if let Some(stats) = stats {
        config.stats_mode = match stats {
            StatsArg::Frozen => StatsMode::Frozen,
            StatsArg::Recompute => StatsMode::Recompute,
        };
    }
    if let Some(ridge) = ridge {
        config.ridge = Some(ridge);
    }

    let report = run_experiment(&config)?;

    std::fs::create_dir_all(&config.out_dir)?;
    let extension = match config.format {
        ReportFormat::Csv => "csv",
        ReportFormat::Table => "txt",
    };
    let report_path = config.out_dir.join(format!("{}_report.{extension}", report.dataset));
    emit_report(&report, config.format, &report_path)?;
    let diagram_base = config.out_dir.join(format!("{}_diagram", report.dataset));
    let (csv_path, svg_path) =
        emit_forecast_diagram(&report.test_actuals, &diagram_series(&report), &diagram_base)?;

    print!("{}", render_report(&report, ReportFormat::Table));
    println!();
    for (stage, seconds) in &report.timings {
        println!("timing: {stage} {seconds:.3}s");
    }
    println!("wrote {}", report_path.display());
    println!("wrote {}", csv_path.display());
    println!("wrote {}", svg_path.display());
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let mut source = std::error::Error::source(&e);
        while let Some(cause) = source {
            eprintln!("  caused by: {cause}");
            source = cause.source();
        }
        std::process::exit(1);
    }
}
