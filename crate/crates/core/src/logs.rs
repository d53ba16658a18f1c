//! JSON Lines wire records: raw detection logs coming in from the edge
//! detector and per-frame occupancy results going out.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::assign::{Assignment, FrameResult};
use crate::codec::encode_status;
use crate::error::{Error, Result};
use crate::geometry::{Detection, NormBox};

/// One detection as logged by the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub x_c: f64,
    pub y_c: f64,
    pub w: f64,
    pub h: f64,
    pub conf: f64,
}

/// One input frame: a timestamp plus its raw detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLogRecord {
    pub timestamp: DateTime<Utc>,
    pub detections: Vec<DetectionRecord>,
}

impl FrameLogRecord {
    /// Validate and convert the raw records into detections with source
    /// indices in log order.
    pub fn to_detections(&self) -> Result<Vec<Detection>> {
        self.detections
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let bbox = NormBox::new(r.x_c, r.y_c, r.w, r.h)?;
                Detection::new(bbox, r.conf, i)
            })
            .collect()
    }
}

/// Parse a detection log (one JSON frame per line, blank lines ignored).
pub fn parse_detection_log(text: &str) -> Result<Vec<FrameLogRecord>> {
    let mut frames = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let record: FrameLogRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            column: 1,
            message: format!("bad frame record: {e}"),
        })?;
        frames.push(record);
    }
    Ok(frames)
}

/// One output frame: occupancy vector, its bitmask, and the audit trail of
/// assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub timestamp: DateTime<Utc>,
    pub bitmask: u64,
    pub occupied: Vec<bool>,
    pub assignments: Vec<Assignment>,
}

impl FrameRecord {
    pub fn from_result(timestamp: DateTime<Utc>, result: &FrameResult) -> Result<Self> {
        Ok(Self {
            timestamp,
            bitmask: encode_status(&result.occupied)?,
            occupied: result.occupied.clone(),
            assignments: result.assignments.clone(),
        })
    }

    /// Serialize as one JSONL line (no trailing newline).
    pub fn to_jsonl(&self) -> Result<String> {
        // normalize the timestamp so output is byte-stable
        let mut v = serde_json::to_value(self)?;
        v["timestamp"] = serde_json::Value::String(
            self.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
        );
        Ok(v.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn parses_frames_and_assigns_source_indices() {
        let text = concat!(
            r#"{"timestamp":"2025-10-22T08:00:00Z","detections":[{"x_c":0.5,"y_c":0.5,"w":0.1,"h":0.1,"conf":0.9},{"x_c":0.2,"y_c":0.2,"w":0.1,"h":0.1,"conf":0.8}]}"#,
            "\n\n",
            r#"{"timestamp":"2025-10-22T08:01:00Z","detections":[]}"#,
            "\n",
        );
        let frames = parse_detection_log(text).unwrap();
        assert_eq!(frames.len(), 2);
        let dets = frames[0].to_detections().unwrap();
        assert_eq!(dets.len(), 2);
        assert_eq!(dets[0].source_index, 0);
        assert_eq!(dets[1].source_index, 1);
        assert!(frames[1].detections.is_empty());
    }

    #[test]
    fn bad_line_reports_its_number() {
        let text = "{\"timestamp\":\"2025-10-22T08:00:00Z\",\"detections\":[]}\nnot json\n";
        match parse_detection_log(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_coordinates_surface_as_range_errors() {
        let text = r#"{"timestamp":"2025-10-22T08:00:00Z","detections":[{"x_c":1.4,"y_c":0.5,"w":0.1,"h":0.1,"conf":0.9}]}"#;
        let frames = parse_detection_log(text).unwrap();
        assert!(matches!(
            frames[0].to_detections().unwrap_err(),
            Error::Range(_)
        ));
    }

    #[test]
    fn frame_record_round_trips_through_jsonl() {
        let ts = Utc.with_ymd_and_hms(2025, 10, 22, 8, 0, 0).unwrap();
        let record = FrameRecord {
            timestamp: ts,
            bitmask: 5,
            occupied: vec![true, false, true],
            assignments: vec![Assignment {
                detection_index: 0,
                spot_id: 1,
                distance: 0.01,
            }],
        };
        let line = record.to_jsonl().unwrap();
        let parsed: FrameRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(parsed, record);
        assert!(line.contains("\"bitmask\":5"));
    }
}
