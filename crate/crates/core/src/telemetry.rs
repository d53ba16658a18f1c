//! Edge-to-server telemetry pieces: the edge store-and-forward queue, the
//! ingestion endpoint contract, the staleness monitor, and totem display
//! validation. All timing is injected, so every behavior here is
//! deterministic under test.

use std::collections::{BTreeMap, VecDeque};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::codec::ParkingStatus;
use crate::error::{Error, Result};

/// Default queue bound: one week of once-a-minute measurements.
pub const DEFAULT_QUEUE_CAPACITY: usize = 10_080;
/// Default staleness / display freshness tolerance.
pub fn default_tolerance() -> Duration {
    Duration::minutes(5)
}

/// One occupancy sample produced at the edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub device_id: String,
    pub bitmask: u64,
    pub produced_at: DateTime<Utc>,
    /// Delivery attempts that failed so far.
    pub attempt_count: u32,
}

/// FIFO store-and-forward buffer used while the uplink is down. When full,
/// the oldest entry is discarded (counted, not raised).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardQueue {
    pending: VecDeque<Measurement>,
    capacity: usize,
    dropped_oldest: u64,
}

impl ForwardQueue {
    pub fn new(capacity: usize) -> Self {
        Self {
            pending: VecDeque::new(),
            capacity: capacity.max(1),
            dropped_oldest: 0,
        }
    }

    /// Effectively unbounded queue.
    pub fn unbounded() -> Self {
        Self::new(usize::MAX)
    }

    pub fn pending(&self) -> &VecDeque<Measurement> {
        &self.pending
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn dropped_oldest(&self) -> u64 {
        self.dropped_oldest
    }

    /// Enqueue `m`, dropping the oldest entry first when at capacity. With
    /// the link up, the whole queue drains in production order and is
    /// returned as delivered; with it down, every pending measurement counts
    /// one more failed attempt.
    pub fn enqueue_and_flush(&mut self, m: Measurement, link_up: bool) -> Vec<Measurement> {
        if self.pending.len() == self.capacity {
            self.pending.pop_front();
            self.dropped_oldest += 1;
        }
        self.pending.push_back(m);

        if link_up {
            self.pending.drain(..).collect()
        } else {
            for entry in &mut self.pending {
                entry.attempt_count += 1;
            }
            Vec::new()
        }
    }
}

/// Freshness verdict of the monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreshState {
    Fresh,
    Stale,
}

/// Outcome of one staleness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StalenessStatus {
    pub last_update: DateTime<Utc>,
    /// Tolerance in whole seconds.
    pub tolerance_secs: i64,
    pub state: FreshState,
    /// Episode flag: true from the first stale check until the next fresh
    /// update resets it.
    pub notified: bool,
    /// True only on the check that opens a stale episode; this is the
    /// notification trigger.
    pub newly_notified: bool,
}

/// Pure staleness rule: stale iff `now − last_update > tolerance` (strict).
/// `already_notified` threads the episode flag between checks; a notification
/// is due exactly when `newly_notified` comes back true.
pub fn check_staleness(
    last_update: DateTime<Utc>,
    now: DateTime<Utc>,
    tolerance: Duration,
    already_notified: bool,
) -> Result<StalenessStatus> {
    if now < last_update {
        return Err(Error::ClockSkew { now, last_update });
    }
    let stale = now - last_update > tolerance;
    Ok(StalenessStatus {
        last_update,
        tolerance_secs: tolerance.num_seconds(),
        state: if stale { FreshState::Stale } else { FreshState::Fresh },
        notified: stale,
        newly_notified: stale && !already_notified,
    })
}

/// Stateful wrapper that fires exactly one notification per stale episode
/// through the supplied sink.
#[derive(Debug)]
pub struct StalenessMonitor {
    tolerance: Duration,
    notified: bool,
    notifications: u64,
}

impl StalenessMonitor {
    pub fn new(tolerance: Duration) -> Self {
        Self {
            tolerance,
            notified: false,
            notifications: 0,
        }
    }

    pub fn notifications(&self) -> u64 {
        self.notifications
    }

    /// Check freshness; `on_notify` runs once per stale episode.
    pub fn check(
        &mut self,
        last_update: DateTime<Utc>,
        now: DateTime<Utc>,
        mut on_notify: impl FnMut(&StalenessStatus),
    ) -> Result<StalenessStatus> {
        let status = check_staleness(last_update, now, self.tolerance, self.notified)?;
        if status.newly_notified {
            self.notifications += 1;
            log::warn!(
                "occupancy data stale: last update {} ({}s tolerance exceeded at {now})",
                status.last_update,
                status.tolerance_secs
            );
            on_notify(&status);
        }
        self.notified = status.notified;
        Ok(status)
    }
}

/// What the roadside display shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TotemDisplay {
    Off,
    Number(u64),
}

/// Display validation: the panel turns off for negative values, values above
/// the spot count, and data older than `freshness`.
pub fn totem_value(
    available: i64,
    n_spots: usize,
    last_success: DateTime<Utc>,
    now: DateTime<Utc>,
    freshness: Duration,
) -> TotemDisplay {
    if available < 0 || available > n_spots as i64 {
        return TotemDisplay::Off;
    }
    if now - last_success > freshness {
        return TotemDisplay::Off;
    }
    TotemDisplay::Number(available as u64)
}

/// Display state of the roadside panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotemState {
    pub displayed: TotemDisplay,
    pub last_success: DateTime<Utc>,
}

impl TotemState {
    /// Run the validation rules and capture the state they were based on.
    pub fn evaluate(
        available: i64,
        n_spots: usize,
        last_success: DateTime<Utc>,
        now: DateTime<Utc>,
        freshness: Duration,
    ) -> Self {
        Self {
            displayed: totem_value(available, n_spots, last_success, now, freshness),
            last_success,
        }
    }
}

/// Registered device: its API key and configured lot width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceRecord {
    pub api_key: String,
    pub n_spots: usize,
}

/// Device id -> credentials and lot width.
pub type DeviceRegistry = BTreeMap<String, DeviceRecord>;

/// Why an ingestion request was turned away.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    UnknownDevice(String),
    Unauthorized,
    BadPayload(String),
    Range(String),
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::UnknownDevice(id) => write!(f, "unknown-device: {id}"),
            Rejection::Unauthorized => write!(f, "unauthorized"),
            Rejection::BadPayload(msg) => write!(f, "bad-payload: {msg}"),
            Rejection::Range(msg) => write!(f, "range: {msg}"),
        }
    }
}

/// Parsed `?k=<api_key>&i=<device_id>` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestQuery {
    pub api_key: String,
    pub device_id: String,
}

impl IngestQuery {
    /// Parse the query-string part of an ingestion URL.
    pub fn from_query_string(query: &str) -> std::result::Result<Self, Rejection> {
        let mut api_key = None;
        let mut device_id = None;
        for (k, v) in url::form_urlencoded::parse(query.as_bytes()) {
            match k.as_ref() {
                "k" => api_key = Some(v.into_owned()),
                "i" => device_id = Some(v.into_owned()),
                _ => {}
            }
        }
        match (api_key, device_id) {
            (Some(api_key), Some(device_id)) => Ok(Self { api_key, device_id }),
            _ => Err(Rejection::BadPayload(
                "query must carry k=<api_key> and i=<device_id>".into(),
            )),
        }
    }
}

/// Validate one ingestion request and turn it into a timestamped status.
///
/// Checks run in order: device known, key matches, body carries an integer
/// `parking_status`, value fits the device's spot count.
pub fn ingest_request(
    query: &IngestQuery,
    body: &str,
    registry: &DeviceRegistry,
    now: DateTime<Utc>,
) -> std::result::Result<ParkingStatus, Rejection> {
    let device = registry
        .get(&query.device_id)
        .ok_or_else(|| Rejection::UnknownDevice(query.device_id.clone()))?;
    if device.api_key != query.api_key {
        return Err(Rejection::Unauthorized);
    }
    let payload: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| Rejection::BadPayload(format!("body is not JSON: {e}")))?;
    let field = payload
        .get("parking_status")
        .ok_or_else(|| Rejection::BadPayload("missing `parking_status`".into()))?;
    let bitmask = field
        .as_u64()
        .ok_or_else(|| Rejection::BadPayload("`parking_status` must be a non-negative integer".into()))?;
    ParkingStatus::from_bitmask(bitmask, device.n_spots, now)
        .map_err(|e| Rejection::Range(e.to_string()))
}

/// Convenience wrapper mirroring the HTTP surface: `path_and_query` is e.g.
/// `/iot-agent?k=secret&i=edge-01`.
pub fn handle_ingest_http(
    path_and_query: &str,
    body: &str,
    registry: &DeviceRegistry,
    now: DateTime<Utc>,
) -> std::result::Result<ParkingStatus, Rejection> {
    let (path, query) = path_and_query
        .split_once('?')
        .unwrap_or((path_and_query, ""));
    if path != "/iot-agent" {
        return Err(Rejection::BadPayload(format!("unknown path `{path}`")));
    }
    let query = IngestQuery::from_query_string(query)?;
    ingest_request(&query, body, registry, now)
}
