//! Spot-level parking occupancy engine.
//!
//! Turns raw vehicle detections into per-spot occupancy states and carries
//! them through the rest of a small smart-parking stack:
//!
//! - [`geometry`], [`spots`], [`roi`] — normalized boxes, IoU/NMS, the spot
//!   annotation format, and the ROI membership test.
//! - [`assign`] — distance-aware spot assignment with spatial tolerance plus
//!   adaptive bounding-box partitioning for merged detections.
//! - [`codec`] — the per-spot occupancy bitmask wire format.
//! - [`stats`], [`areas`], [`metrics`] — occupied hours, z-score anomaly
//!   flags, detection-area outlier bounds, and evaluation metrics.
//! - [`shadow`] — the digital-shadow entity graph and its update fan-out.
//! - [`telemetry`], [`sim`] — store-and-forward queueing, ingestion,
//!   staleness monitoring, totem validation, and a deterministic end-to-end
//!   simulator.

pub mod areas;
pub mod assign;
pub mod codec;
pub mod config;
pub mod error;
pub mod geometry;
pub mod logs;
pub mod metrics;
pub mod roi;
pub mod series;
pub mod shadow;
pub mod sim;
pub mod spots;
pub mod stats;
pub mod telemetry;

pub use assign::{abbp_refine, assign_detections, run_pipeline, FrameResult, PipelineConfig};
pub use codec::{decode_status, encode_status, summarize, ParkingStatus};
pub use config::LotConfig;
pub use error::{Error, Result};
pub use geometry::{bbox_area_px, center_distance, iou, nms, Detection, NormBox};
pub use roi::{load_roi_mask, point_in_roi, RoiMask};
pub use series::OccupancySeries;
pub use shadow::{build_entities, EntityGraph};
pub use spots::{parse_spot_annotations, SpotAnnotation, SpotMap};
