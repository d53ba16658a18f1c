//! Normalized bounding-box geometry: IoU, center distance, pixel area, and
//! greedy non-maximum suppression.
//!
//! All boxes use YOLO-style normalized coordinates: `(x_c, y_c)` is the box
//! center and `(w, h)` its extent, each expressed as a fraction of the image
//! side. A box centered near an image edge may extend past the unit square;
//! clipping is left to consumers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in normalized center/size form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBox {
    pub x_c: f64,
    pub y_c: f64,
    pub w: f64,
    pub h: f64,
}

impl NormBox {
    /// Validating constructor: centers in `[0,1]`, sizes in `(0,1]`, all finite.
    pub fn new(x_c: f64, y_c: f64, w: f64, h: f64) -> Result<Self> {
        for (name, v) in [("x_c", x_c), ("y_c", y_c), ("w", w), ("h", h)] {
            if !v.is_finite() {
                return Err(Error::Range(format!("{name} must be finite, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&x_c) || !(0.0..=1.0).contains(&y_c) {
            return Err(Error::Range(format!(
                "box center ({x_c}, {y_c}) outside [0,1]"
            )));
        }
        if !(w > 0.0 && w <= 1.0) || !(h > 0.0 && h <= 1.0) {
            return Err(Error::Range(format!("box size ({w}, {h}) outside (0,1]")));
        }
        Ok(Self { x_c, y_c, w, h })
    }

    /// Corner coordinates `(x_min, y_min, x_max, y_max)`.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.x_c - self.w / 2.0,
            self.y_c - self.h / 2.0,
            self.x_c + self.w / 2.0,
            self.y_c + self.h / 2.0,
        )
    }

    /// Area in normalized units.
    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// One detected vehicle within a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: NormBox,
    /// Detector confidence in `[0,1]`.
    pub confidence: f64,
    /// Ordinal of this detection in the frame's input list. Unique per frame;
    /// boxes synthesized by refinement get fresh indices past the originals.
    pub source_index: usize,
}

impl Detection {
    pub fn new(bbox: NormBox, confidence: f64, source_index: usize) -> Result<Self> {
        if !confidence.is_finite() || !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Range(format!(
                "confidence {confidence} outside [0,1]"
            )));
        }
        Ok(Self {
            bbox,
            confidence,
            source_index,
        })
    }
}

/// Intersection-over-union of two normalized boxes.
///
/// Returns 0 for disjoint boxes and, by convention, 0 when the union has zero
/// area (two identical zero-area boxes).
pub fn iou(a: &NormBox, b: &NormBox) -> f64 {
    let (ax1, ay1, ax2, ay2) = a.corners();
    let (bx1, by1, bx2, by2) = b.corners();

    let ix = (ax2.min(bx2) - ax1.max(bx1)).max(0.0);
    let iy = (ay2.min(by2) - ay1.max(by1)).max(0.0);
    let intersection = ix * iy;

    // areas from the same corner differences, so identical boxes divide out
    // to exactly 1.0
    let area_a = (ax2 - ax1) * (ay2 - ay1);
    let area_b = (bx2 - bx1) * (by2 - by1);
    let union = area_a + area_b - intersection;
    if union <= 0.0 {
        return 0.0;
    }
    intersection / union
}

/// Euclidean distance between box centers, in normalized units.
pub fn center_distance(a: &NormBox, b: &NormBox) -> f64 {
    let dx = a.x_c - b.x_c;
    let dy = a.y_c - b.y_c;
    (dx * dx + dy * dy).sqrt()
}

/// Box area in pixels for an image of `width × height`, computed as
/// `(w·W)·(h·H)` without rounding.
pub fn bbox_area_px(bbox: &NormBox, width: u32, height: u32) -> f64 {
    (bbox.w * f64::from(width)) * (bbox.h * f64::from(height))
}

/// Greedy non-maximum suppression.
///
/// Detections are visited in descending confidence (ties broken by ascending
/// `source_index`); a detection is dropped when its IoU with an already-kept
/// detection exceeds `iou_threshold`. Survivors are returned in descending
/// confidence with their original `source_index`.
pub fn nms(detections: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut order: Vec<&Detection> = detections.iter().collect();
    order.sort_by(|a, b| {
        b.confidence
            .partial_cmp(&a.confidence)
            .expect("confidence is finite")
            .then(a.source_index.cmp(&b.source_index))
    });

    let mut kept: Vec<Detection> = Vec::with_capacity(order.len());
    for cand in order {
        let suppressed = kept.iter().any(|k| iou(&k.bbox, &cand.bbox) > iou_threshold);
        if !suppressed {
            kept.push(*cand);
        }
    }
    kept
}
