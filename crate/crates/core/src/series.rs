//! Minute-resolution occupancy series and its on-disk form: an append-only
//! `timestamp,bitmask` CSV next to a small JSON sidecar recording the spot
//! count. Gaps in the series are allowed; timestamps must strictly increase.

use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::codec::ParkingStatus;
use crate::error::{Error, Result};

const CSV_HEADER: &str = "timestamp,bitmask";

#[derive(Debug, Serialize, Deserialize)]
struct SeriesMeta {
    n_spots: usize,
}

/// Time-ordered occupancy snapshots for one lot.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancySeries {
    n_spots: usize,
    rows: Vec<ParkingStatus>,
}

impl OccupancySeries {
    pub fn new(n_spots: usize) -> Result<Self> {
        if n_spots == 0 || n_spots > crate::codec::MAX_SPOTS {
            return Err(Error::Range(format!(
                "spot count {n_spots} outside 1..={}",
                crate::codec::MAX_SPOTS
            )));
        }
        Ok(Self {
            n_spots,
            rows: Vec::new(),
        })
    }

    pub fn n_spots(&self) -> usize {
        self.n_spots
    }

    pub fn rows(&self) -> &[ParkingStatus] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&ParkingStatus> {
        self.rows.last()
    }

    /// Append a snapshot, enforcing the spot count and strict time order.
    pub fn push(&mut self, status: ParkingStatus) -> Result<()> {
        if status.n_spots() != self.n_spots {
            return Err(Error::Domain(format!(
                "status has {} spots, series expects {}",
                status.n_spots(),
                self.n_spots
            )));
        }
        if let Some(last) = self.rows.last() {
            if status.timestamp() <= last.timestamp() {
                return Err(Error::Domain(format!(
                    "timestamps must strictly increase: {} after {}",
                    status.timestamp(),
                    last.timestamp()
                )));
            }
        }
        self.rows.push(status);
        Ok(())
    }

    /// Path of the JSON sidecar describing `csv_path`.
    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        let mut os = csv_path.as_os_str().to_owned();
        os.push(".meta.json");
        PathBuf::from(os)
    }

    /// Write the series as CSV plus sidecar, replacing any existing files.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(
                &row.timestamp()
                    .to_rfc3339_opts(SecondsFormat::Secs, true),
            );
            out.push(',');
            out.push_str(&row.bitmask().to_string());
            out.push('\n');
        }
        std::fs::write(csv_path, out)?;
        let meta = serde_json::to_string_pretty(&SeriesMeta {
            n_spots: self.n_spots,
        })?;
        std::fs::write(Self::sidecar_path(csv_path), meta + "\n")?;
        Ok(())
    }

    /// Load a series from CSV text and its known spot count.
    pub fn from_csv(text: &str, n_spots: usize) -> Result<Self> {
        let mut series = Self::new(n_spots)?;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || (line_no == 1 && line == CSV_HEADER) {
                continue;
            }
            let (ts_text, mask_text) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: line_no,
                column: 1,
                message: "expected `timestamp,bitmask`".into(),
            })?;
            let ts = DateTime::parse_from_rfc3339(ts_text.trim())
                .map_err(|e| Error::Parse {
                    line: line_no,
                    column: 1,
                    message: format!("bad timestamp `{ts_text}`: {e}"),
                })?
                .with_timezone(&Utc);
            let bitmask: u64 = mask_text.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                column: 2,
                message: format!("bad bitmask `{mask_text}`"),
            })?;
            series.push(ParkingStatus::from_bitmask(bitmask, n_spots, ts)?)?;
        }
        Ok(series)
    }

    /// Load CSV + sidecar from disk.
    pub fn load(csv_path: &Path) -> Result<Self> {
        let meta_text = std::fs::read_to_string(Self::sidecar_path(csv_path))?;
        let meta: SeriesMeta = serde_json::from_str(&meta_text)?;
        let text = std::fs::read_to_string(csv_path)?;
        Self::from_csv(&text, meta.n_spots)
    }
}
