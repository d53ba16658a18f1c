//! `simulate`: run a telemetry scenario end to end.

use std::path::PathBuf;

use clap::Args;

use spotwise_core::error::Result;
use spotwise_core::sim::{run_simulation, Scenario};

use crate::OutputMode;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Persist the resulting occupancy series here (CSV + sidecar).
    #[arg(long)]
    out_series: Option<PathBuf>,
    /// Write the run report as JSON here.
    #[arg(long)]
    out_report: Option<PathBuf>,
    #[command(flatten)]
    output: OutputMode,
}

pub fn run(args: SimulateArgs) -> Result<Vec<PathBuf>> {
    let scenario = Scenario::load(&args.scenario)?;
    let result = run_simulation(&scenario)?;
    let report = &result.report;

    let mut artifacts = Vec::new();
    if let Some(path) = &args.out_series {
        result.series.save(path)?;
        artifacts.push(path.clone());
        artifacts.push(spotwise_core::series::OccupancySeries::sidecar_path(path));
    }
    if let Some(path) = &args.out_report {
        std::fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
        artifacts.push(path.clone());
    }

    if args.output.json {
        println!("{}", serde_json::to_string(report)?);
    } else {
        println!(
            "ticks={} produced={} delivered={} rejected={} dropped={} pending={}",
            report.ticks,
            report.produced,
            report.delivered,
            report.rejected,
            report.dropped_oldest,
            report.pending_at_end
        );
        println!(
            "staleness: notifications={} stale_ticks={}; totem off ticks={}",
            report.staleness_notifications, report.stale_ticks, report.totem_off_ticks
        );
        println!(
            "sequence intact: {}; final available: {}",
            report.sequence_intact,
            report
                .final_available
                .map(|v| v.to_string())
                .unwrap_or_else(|| "n/a".into())
        );
    }
    Ok(artifacts)
}
