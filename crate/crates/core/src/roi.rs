//! Region-of-interest mask: a binary raster where dark pixels mark the
//! monitored parking area, plus the point-membership test used by spot
//! assignment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default luminance cutoff: pixels darker than this are inside the ROI.
pub const DEFAULT_ROI_THRESHOLD: u8 = 128;

/// Binary raster, row-major, `true` = inside the parking area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiMask {
    width: u32,
    height: u32,
    inside: Vec<bool>,
}

impl RoiMask {
    /// Build a mask from raw bits, rejecting rasters that cannot discriminate
    /// (all inside or all outside).
    pub fn from_bits(width: u32, height: u32, inside: Vec<bool>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if expected == 0 || inside.len() != expected {
            return Err(Error::Format(format!(
                "mask raster length {} does not match {width}x{height}",
                inside.len()
            )));
        }
        if inside.iter().all(|&b| b) {
            log::warn!("rejecting ROI mask: every pixel classified inside");
            return Err(Error::DegenerateMask(
                "every pixel is inside the ROI".into(),
            ));
        }
        if inside.iter().all(|&b| !b) {
            log::warn!("rejecting ROI mask: every pixel classified outside");
            return Err(Error::DegenerateMask(
                "every pixel is outside the ROI".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            inside,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Inside bit of the pixel at `(col, row)`.
    pub fn pixel(&self, col: u32, row: u32) -> bool {
        self.inside[row as usize * self.width as usize + col as usize]
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }
}

/// Decode a grayscale raster (PNG or PGM) into a mask.
///
/// Pixels with luminance below `threshold` count as inside, matching masks
/// drawn with black for the parking area on a white background.
pub fn load_roi_mask(bytes: &[u8], threshold: u8) -> Result<RoiMask> {
    let img = image::load_from_memory(bytes)
        .map_err(|e| Error::Format(format!("cannot decode mask raster: {e}")))?;
    let gray = img.to_luma8();
    let (width, height) = gray.dimensions();
    let inside: Vec<bool> = gray.pixels().map(|p| p.0[0] < threshold).collect();
    RoiMask::from_bits(width, height, inside)
}

/// Whether the normalized point `(x, y)` falls inside the ROI.
///
/// The point maps to pixel `(floor(x·width), floor(y·height))`, clamped to the
/// last pixel at the far edges so that `x = 1.0` or `y = 1.0` stay in range.
pub fn point_in_roi(x: f64, y: f64, mask: &RoiMask) -> Result<bool> {
    if !x.is_finite() || !y.is_finite() || !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("point ({x}, {y}) outside [0,1]²")));
    }
    let col = ((x * f64::from(mask.width)).floor() as u32).min(mask.width - 1);
    let row = ((y * f64::from(mask.height)).floor() as u32).min(mask.height - 1);
    Ok(mask.pixel(col, row))
}
