//! `eval`: balanced accuracy and count MAE between predicted and true
//! occupancy files (one 0/1 string per line, one line per frame).

use std::path::PathBuf;

use clap::Args;

use spotwise_core::codec::parse_bit_string;
use spotwise_core::error::{Error, Result};
use spotwise_core::metrics::evaluate;

use super::read_data_file;
use crate::OutputMode;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted occupancy vectors.
    #[arg(long)]
    predicted: PathBuf,
    /// Ground-truth occupancy vectors.
    #[arg(long)]
    truth: PathBuf,
    #[command(flatten)]
    output: OutputMode,
}

fn parse_frames(text: &str, label: &str) -> Result<Vec<Vec<bool>>> {
    let mut frames = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bits = parse_bit_string(line).map_err(|e| {
            Error::Domain(format!("{label} line {}: {e}", i + 1))
        })?;
        frames.push(bits);
    }
    Ok(frames)
}

pub fn run(args: EvalArgs) -> Result<Vec<PathBuf>> {
    let predicted = parse_frames(&read_data_file(&args.predicted)?, "predicted")?;
    let truth = parse_frames(&read_data_file(&args.truth)?, "truth")?;
    let report = evaluate(&predicted, &truth)?;

    if args.output.json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!(
            "balanced_accuracy={:.6} mae={:.6} frames={} tp={} tn={} fp={} fn={}",
            report.balanced_accuracy,
            report.mae_count,
            report.n_frames,
            report.true_positive,
            report.true_negative,
            report.false_positive,
            report.false_negative
        );
    }
    Ok(Vec::new())
}
