//! Detection-to-spot assignment.
//!
//! Two passes turn refined detections into per-spot occupancy:
//!
//! 1. **Adaptive bounding-box partitioning** splits an oversized detection
//!    near a critical spot vertically into two half-width boxes, recovering
//!    adjacent vehicles the detector merged into one.
//! 2. **Distance-aware assignment** matches each detection to the nearest
//!    spot center within a tolerance `delta`, provided the detection center
//!    lies inside the ROI mask.
//!
//! [`run_pipeline`] composes NMS, partitioning, and assignment for one frame.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::LotConfig;
use crate::error::{Error, Result};
use crate::geometry::{bbox_area_px, center_distance, nms, Detection, NormBox};
use crate::roi::{point_in_roi, RoiMask};
use crate::spots::SpotMap;

/// Thresholds for one frame-processing run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Max normalized distance between detection and spot centers.
    pub delta: f64,
    /// Pixel area above which a detection near a critical spot is split.
    pub area_threshold_px: f64,
    /// IoU threshold for non-maximum suppression.
    pub nms_iou: f64,
    /// Tolerance for the partitioning pass; `None` reuses `delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abbp_delta: Option<f64>,
}

impl PipelineConfig {
    pub fn from_lot(cfg: &LotConfig) -> Self {
        Self {
            delta: cfg.delta,
            area_threshold_px: cfg.area_threshold_px,
            nms_iou: cfg.nms_iou,
            abbp_delta: cfg.abbp_delta,
        }
    }

    pub fn abbp_delta(&self) -> f64 {
        self.abbp_delta.unwrap_or(self.delta)
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            delta: crate::config::DEFAULT_DELTA,
            area_threshold_px: crate::config::DEFAULT_AREA_THRESHOLD_PX,
            nms_iou: crate::config::DEFAULT_NMS_IOU,
            abbp_delta: None,
        }
    }
}

/// One matched (detection, spot) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `source_index` of the matched detection.
    pub detection_index: usize,
    pub spot_id: u32,
    /// Center distance at match time; always strictly below `delta`.
    pub distance: f64,
}

/// Occupancy outcome of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    /// Per-spot occupancy, index 0 = spot 1.
    pub occupied: Vec<bool>,
    pub assignments: Vec<Assignment>,
    /// Detections the assignment ran over (post-partitioning), kept for audit.
    pub refined_detections: Vec<Detection>,
    /// Detections that had a spot within `delta` but fell outside the ROI.
    pub dropped_outside_roi: usize,
}

/// Match detections to their nearest spot within `delta`.
///
/// Spots are scanned in ascending id, and only a strictly smaller distance
/// displaces the running minimum, so equidistant spots resolve to the lowest
/// id. A detection whose center fails the ROI test is skipped (counted in
/// `dropped_outside_roi`); one with no spot within `delta` contributes
/// nothing. Several detections may map to one spot; the spot is simply
/// occupied and every contributing pair is recorded.
pub fn assign_detections(
    detections: &[Detection],
    spots: &SpotMap,
    mask: &RoiMask,
    delta: f64,
) -> Result<FrameResult> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Config(format!("delta must be > 0, got {delta}")));
    }

    let mut occupied = vec![false; spots.len()];
    let mut assignments = Vec::new();
    let mut dropped_outside_roi = 0usize;

    for det in detections {
        let mut nearest: Option<(u32, f64)> = None;
        let mut min_dist = f64::INFINITY;
        for spot in spots.spots() {
            let dist = center_distance(&det.bbox, &spot.center_box);
            if dist < min_dist && dist < delta {
                min_dist = dist;
                nearest = Some((spot.spot_id, dist));
            }
        }
        if let Some((spot_id, dist)) = nearest {
            if point_in_roi(det.bbox.x_c, det.bbox.y_c, mask)? {
                occupied[spot_id as usize - 1] = true;
                assignments.push(Assignment {
                    detection_index: det.source_index,
                    spot_id,
                    distance: dist,
                });
            } else {
                dropped_outside_roi += 1;
            }
        }
    }

    Ok(FrameResult {
        occupied,
        assignments,
        refined_detections: detections.to_vec(),
        dropped_outside_roi,
    })
}

/// Adaptive bounding-box partitioning.
///
/// A detection whose center lies within `delta` of a critical spot and whose
/// pixel area exceeds `area_threshold_px` is replaced by two boxes of width
/// `w/2` centered at `x_c ∓ w/4` (same `y_c` and `h`). Each detection splits
/// at most once; children inherit the parent's confidence and receive fresh
/// source indices past the highest input index. Everything else passes
/// through unchanged, order preserved. Critical ids that match no spot are
/// simply never hit.
pub fn abbp_refine(
    detections: &[Detection],
    spots: &SpotMap,
    critical_ids: &BTreeSet<u32>,
    area_threshold_px: f64,
    delta: f64,
) -> Vec<Detection> {
    let width = spots.image_width();
    let height = spots.image_height();
    let mut next_index = detections
        .iter()
        .map(|d| d.source_index + 1)
        .max()
        .unwrap_or(0);

    let mut refined = Vec::with_capacity(detections.len());
    'detections: for det in detections {
        for spot in spots.spots() {
            if !critical_ids.contains(&spot.spot_id) {
                continue;
            }
            let dist = center_distance(&det.bbox, &spot.center_box);
            if dist < delta {
                let area = bbox_area_px(&det.bbox, width, height);
                if area > area_threshold_px {
                    let b = det.bbox;
                    let half_w = b.w / 2.0;
                    // centers stay in [0,1] (the half-boxes may overhang the frame)
                    for x_c in [b.x_c - half_w / 2.0, b.x_c + half_w / 2.0] {
                        refined.push(Detection {
                            bbox: NormBox {
                                x_c: x_c.clamp(0.0, 1.0),
                                y_c: b.y_c,
                                w: half_w,
                                h: b.h,
                            },
                            confidence: det.confidence,
                            source_index: next_index,
                        });
                        next_index += 1;
                    }
                    continue 'detections;
                }
            }
        }
        refined.push(*det);
    }
    refined
}

/// Full frame pipeline: NMS, partitioning over the lot's critical spots, then
/// nearest-spot assignment.
pub fn run_pipeline(
    raw_detections: &[Detection],
    spots: &SpotMap,
    mask: &RoiMask,
    cfg: &PipelineConfig,
) -> Result<FrameResult> {
    let suppressed = nms(raw_detections, cfg.nms_iou);
    let refined = abbp_refine(
        &suppressed,
        spots,
        &spots.critical_ids(),
        cfg.area_threshold_px,
        cfg.abbp_delta(),
    );
    assign_detections(&refined, spots, mask, cfg.delta)
}
