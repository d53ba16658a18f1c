//! Lot configuration: image geometry, pipeline thresholds, critical spots,
//! and group membership.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default spatial tolerance for matching a detection center to a spot center.
pub const DEFAULT_DELTA: f64 = 0.1;
/// Default pixel-area threshold for splitting oversized detections.
pub const DEFAULT_AREA_THRESHOLD_PX: f64 = 5674.0;
/// Default IoU threshold for non-maximum suppression.
pub const DEFAULT_NMS_IOU: f64 = 0.45;

fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_area_threshold() -> f64 {
    DEFAULT_AREA_THRESHOLD_PX
}
fn default_nms_iou() -> f64 {
    DEFAULT_NMS_IOU
}

/// Deployment configuration for one parking lot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LotConfig {
    pub image_width: u32,
    pub image_height: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_area_threshold")]
    pub area_threshold_px: f64,
    #[serde(default = "default_nms_iou")]
    pub nms_iou: f64,
    /// Spatial tolerance used by bounding-box partitioning; defaults to
    /// `delta` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abbp_delta: Option<f64>,
    #[serde(default)]
    pub critical_spot_ids: BTreeSet<u32>,
    /// Group id -> spot ids. Groups must partition 1..n with no overlap.
    pub groups: BTreeMap<String, Vec<u32>>,
}

impl LotConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: LotConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("lot config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_width == 0 || self.image_height == 0 {
            return Err(Error::Config("image dimensions must be positive".into()));
        }
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(Error::Config(format!("delta must be > 0, got {}", self.delta)));
        }
        if let Some(d) = self.abbp_delta {
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::Config(format!("abbp_delta must be > 0, got {d}")));
            }
        }
        if !self.area_threshold_px.is_finite() || self.area_threshold_px <= 0.0 {
            return Err(Error::Config(format!(
                "area_threshold_px must be > 0, got {}",
                self.area_threshold_px
            )));
        }
        if !self.nms_iou.is_finite() || self.nms_iou <= 0.0 || self.nms_iou >= 1.0 {
            return Err(Error::Config(format!(
                "nms_iou must be in (0,1), got {}",
                self.nms_iou
            )));
        }
        if self.groups.is_empty() {
            return Err(Error::Config("at least one parking group is required".into()));
        }

        let mut seen: BTreeMap<u32, &str> = BTreeMap::new();
        for (gid, ids) in &self.groups {
            if ids.is_empty() {
                return Err(Error::Config(format!("group `{gid}` has no spots")));
            }
            for id in ids {
                if *id == 0 {
                    return Err(Error::Config(format!("group `{gid}` lists spot id 0")));
                }
                if let Some(other) = seen.insert(*id, gid) {
                    return Err(Error::Config(format!(
                        "spot {id} belongs to both `{other}` and `{gid}`"
                    )));
                }
            }
        }
        let n = seen.len() as u32;
        if seen.keys().next_back() != Some(&n) {
            return Err(Error::Config(format!(
                "group spot ids must cover 1..{n} with no gaps"
            )));
        }
        for id in &self.critical_spot_ids {
            if *id == 0 || *id > n {
                return Err(Error::Config(format!("critical spot id {id} outside 1..{n}")));
            }
        }
        Ok(())
    }

    /// Total number of spots implied by the group partition.
    pub fn n_spots(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    /// Inverted group map: spot id -> group id.
    pub fn spot_groups(&self) -> BTreeMap<u32, String> {
        let mut out = BTreeMap::new();
        for (gid, ids) in &self.groups {
            for id in ids {
                out.insert(*id, gid.clone());
            }
        }
        out
    }

    /// Tolerance used by bounding-box partitioning.
    pub fn abbp_delta(&self) -> f64 {
        self.abbp_delta.unwrap_or(self.delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> String {
        serde_json::json!({
            "image_width": 512,
            "image_height": 512,
            "delta": 0.1,
            "area_threshold_px": 5674.0,
            "nms_iou": 0.45,
            "critical_spot_ids": [3, 4],
            "groups": {
                "general": (1..=14).collect::<Vec<u32>>(),
                "disabled": [15, 16],
            },
        })
        .to_string()
    }

    #[test]
    fn loads_and_validates_sample() {
        let cfg = LotConfig::from_json(&sample()).unwrap();
        assert_eq!(cfg.n_spots(), 16);
        assert_eq!(cfg.spot_groups()[&15], "disabled");
        assert_eq!(cfg.abbp_delta(), 0.1);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&sample()).unwrap();
        v["groups"]["disabled"] = serde_json::json!([14, 15, 16]);
        let err = LotConfig::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn gapped_ids_rejected() {
        let v = serde_json::json!({
            "image_width": 100, "image_height": 100,
            "groups": {"g": [1, 2, 4]},
        });
        assert!(LotConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn bad_thresholds_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&sample()).unwrap();
        v["delta"] = serde_json::json!(0.0);
        assert!(LotConfig::from_json(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&sample()).unwrap();
        v["nms_iou"] = serde_json::json!(1.0);
        assert!(LotConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn critical_id_out_of_partition_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&sample()).unwrap();
        v["critical_spot_ids"] = serde_json::json!([17]);
        assert!(LotConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn defaults_apply_when_fields_absent() {
        let v = serde_json::json!({
            "image_width": 640, "image_height": 640,
            "groups": {"g": [1, 2]},
        });
        let cfg = LotConfig::from_json(&v.to_string()).unwrap();
        assert_eq!(cfg.delta, DEFAULT_DELTA);
        assert_eq!(cfg.area_threshold_px, DEFAULT_AREA_THRESHOLD_PX);
        assert_eq!(cfg.nms_iou, DEFAULT_NMS_IOU);
    }
}
