//! `process`: detections JSONL + lot config + spot CSV + ROI mask -> frame
//! results JSONL, bitmask series CSV, and optionally an area log for the
//! distribution analysis.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use spotwise_core::assign::{run_pipeline, PipelineConfig};
use spotwise_core::codec::ParkingStatus;
use spotwise_core::config::LotConfig;
use spotwise_core::error::{Error, Result};
use spotwise_core::geometry::bbox_area_px;
use spotwise_core::logs::{parse_detection_log, FrameRecord};
use spotwise_core::roi::{load_roi_mask, DEFAULT_ROI_THRESHOLD};
use spotwise_core::series::OccupancySeries;
use spotwise_core::spots::parse_spot_annotations;

use super::{read_config_file, read_data_file};

#[derive(Debug, Args)]
pub struct ProcessArgs {
    /// Lot configuration JSON.
    #[arg(long, env = "SPOTWISE_CONFIG")]
    config: PathBuf,
    /// Spot annotation CSV.
    #[arg(long)]
    spots: PathBuf,
    /// ROI mask raster (PNG or PGM; dark pixels = inside).
    #[arg(long)]
    mask: PathBuf,
    /// Luminance cutoff for the mask.
    #[arg(long, default_value_t = DEFAULT_ROI_THRESHOLD)]
    mask_threshold: u8,
    /// Detection log (JSON Lines, one frame per line).
    #[arg(long)]
    detections: PathBuf,
    /// Frame-result JSONL output.
    #[arg(long)]
    out_frames: PathBuf,
    /// Bitmask series CSV output (a .meta.json sidecar is written next to it).
    #[arg(long)]
    out_series: PathBuf,
    /// Optional per-assignment area log (spot_id,area_px).
    #[arg(long)]
    out_areas: Option<PathBuf>,
}

pub fn run(args: ProcessArgs) -> Result<Vec<PathBuf>> {
    let cfg = LotConfig::from_json(&read_config_file(&args.config)?)?;
    let spots = parse_spot_annotations(
        &read_config_file(&args.spots)?,
        cfg.image_width,
        cfg.image_height,
        &cfg.spot_groups(),
        &cfg.critical_spot_ids,
    )?;
    let mask_bytes = std::fs::read(&args.mask)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.mask.display())))?;
    let mask = load_roi_mask(&mask_bytes, args.mask_threshold)?;
    let frames = parse_detection_log(&read_data_file(&args.detections)?)?;

    let pipeline_cfg = PipelineConfig::from_lot(&cfg);
    let mut series = OccupancySeries::new(spots.len())?;
    let mut frame_lines = String::new();
    let mut area_lines = String::from("spot_id,area_px\n");

    for frame in &frames {
        let detections = frame.to_detections()?;
        let result = run_pipeline(&detections, &spots, &mask, &pipeline_cfg)?;

        let record = FrameRecord::from_result(frame.timestamp, &result)?;
        frame_lines.push_str(&record.to_jsonl()?);
        frame_lines.push('\n');

        series.push(ParkingStatus::from_bits(
            result.occupied.clone(),
            frame.timestamp,
        )?)?;

        for assignment in &result.assignments {
            let det = result
                .refined_detections
                .iter()
                .find(|d| d.source_index == assignment.detection_index)
                .expect("assignments reference refined detections");
            let area = bbox_area_px(&det.bbox, spots.image_width(), spots.image_height());
            area_lines.push_str(&format!("{},{}\n", assignment.spot_id, area));
        }
    }

    let mut artifacts = Vec::new();
    let mut out = std::fs::File::create(&args.out_frames)?;
    out.write_all(frame_lines.as_bytes())?;
    artifacts.push(args.out_frames.clone());

    series.save(&args.out_series)?;
    artifacts.push(args.out_series.clone());
    artifacts.push(OccupancySeries::sidecar_path(&args.out_series));

    if let Some(path) = &args.out_areas {
        std::fs::write(path, area_lines)?;
        artifacts.push(path.clone());
    }

    println!(
        "processed {} frame(s) over {} spot(s); series rows: {}",
        frames.len(),
        spots.len(),
        series.len()
    );
    Ok(artifacts)
}
