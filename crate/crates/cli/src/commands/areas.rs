//! `areas`: per-spot area statistics and histograms from an assignment area
//! log.

use std::path::PathBuf;

use clap::Args;

use spotwise_core::areas::{area_outlier_bounds, histogram, parse_area_log};
use spotwise_core::error::Result;

use super::read_data_file;

#[derive(Debug, Args)]
pub struct AreasArgs {
    /// Area log CSV with `spot_id,area_px` rows (as written by `process
    /// --out-areas`).
    #[arg(long)]
    input: PathBuf,
    /// Per-spot bounds CSV output.
    #[arg(long)]
    out_stats: PathBuf,
    /// Per-spot histogram CSV output (spot_id,bin_left,bin_right,count).
    #[arg(long)]
    out_hist: PathBuf,
    /// Histogram bin count.
    #[arg(long, default_value_t = 20)]
    bins: usize,
}

pub fn run(args: AreasArgs) -> Result<Vec<PathBuf>> {
    let by_spot = parse_area_log(&read_data_file(&args.input)?)?;

    let mut stats_csv =
        String::from("spot_id,sample_count,mean,std,lower,upper,outlier_count\n");
    let mut hist_csv = String::from("spot_id,bin_left,bin_right,count\n");
    let mut skipped = 0usize;

    for (spot_id, samples) in &by_spot {
        match area_outlier_bounds(*spot_id, samples) {
            Ok(stats) => {
                stats_csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    stats.spot_id,
                    stats.sample_count,
                    stats.mean,
                    stats.std,
                    stats.lower,
                    stats.upper,
                    stats.outlier_count
                ));
                for bin in histogram(samples, args.bins)? {
                    hist_csv.push_str(&format!(
                        "{},{},{},{}\n",
                        spot_id, bin.bin_left, bin.bin_right, bin.count
                    ));
                }
            }
            Err(_) => {
                // a single observation cannot produce bounds; note and move on
                skipped += 1;
            }
        }
    }

    std::fs::write(&args.out_stats, stats_csv)?;
    std::fs::write(&args.out_hist, hist_csv)?;
    println!(
        "analyzed {} spot(s) ({} skipped for too few samples)",
        by_spot.len() - skipped,
        skipped
    );
    Ok(vec![args.out_stats, args.out_hist])
}
