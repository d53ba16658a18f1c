//! `encode` and `decode`: bitmask <-> bit string.

use std::path::PathBuf;

use clap::Args;

use spotwise_core::codec::{encode_status, parse_bit_string, summarize, ParkingStatus};
use spotwise_core::error::Result;

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Occupancy bit string, spot 1 first (e.g. 1000011001100110).
    bits: String,
}

pub fn run_encode(args: EncodeArgs) -> Result<Vec<PathBuf>> {
    let bits = parse_bit_string(&args.bits)?;
    println!("{}", encode_status(&bits)?);
    Ok(Vec::new())
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Integer bitmask as transmitted on the wire.
    bitmask: u64,
    /// Number of spots in the lot.
    #[arg(long)]
    spots: usize,
}

pub fn run_decode(args: DecodeArgs) -> Result<Vec<PathBuf>> {
    let status = ParkingStatus::from_bitmask(args.bitmask, args.spots, chrono::Utc::now())?;
    let summary = summarize(&status);
    println!(
        "{} occupied={} free={}",
        status.bit_string(),
        summary.occupied_count,
        summary.free_count
    );
    Ok(Vec::new())
}
