//! Deterministic end-to-end simulation of the telemetry path: an edge device
//! producing one measurement per simulated minute, a store-and-forward queue
//! riding out link outages, the ingestion endpoint, the persisted occupancy
//! series, the digital-shadow fan-out, the staleness monitor, and the totem
//! display.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::MAX_SPOTS;
use crate::config::LotConfig;
use crate::error::{Error, Result};
use crate::series::OccupancySeries;
use crate::shadow::{build_entities, EntityGraph};
use crate::telemetry::{
    handle_ingest_http, DeviceRecord, DeviceRegistry, ForwardQueue, FreshState, Measurement,
    StalenessMonitor, TotemDisplay,
};

/// Half-open tick window `[start_tick, end_tick)` during which the uplink is
/// down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutageWindow {
    pub start_tick: u64,
    pub end_tick: u64,
}

impl OutageWindow {
    pub fn contains(&self, tick: u64) -> bool {
        tick >= self.start_tick && tick < self.end_tick
    }
}

fn default_start_time() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339("2025-10-22T00:00:00Z")
        .expect("valid literal")
        .with_timezone(&Utc)
}

fn default_device_id() -> String {
    "edge-01".into()
}

fn default_api_key() -> String {
    "secret".into()
}

fn default_site() -> String {
    "sim".into()
}

fn default_tolerance_minutes() -> i64 {
    5
}

/// Simulation scenario, loaded from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// One tick = one simulated minute = one measurement.
    pub ticks: u64,
    pub n_spots: usize,
    #[serde(default = "default_start_time")]
    pub start_time: DateTime<Utc>,
    /// Seeded generator for the occupancy sequence; ignored when `bitmasks`
    /// is given.
    #[serde(default)]
    pub seed: u64,
    /// Explicit occupancy sequence, one value per tick.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bitmasks: Option<Vec<u64>>,
    #[serde(default)]
    pub outages: Vec<OutageWindow>,
    /// `None` = unbounded queue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue_capacity: Option<usize>,
    #[serde(default = "default_tolerance_minutes")]
    pub staleness_tolerance_minutes: i64,
    #[serde(default = "default_tolerance_minutes")]
    pub totem_freshness_minutes: i64,
    #[serde(default = "default_device_id")]
    pub device_id: String,
    #[serde(default = "default_api_key")]
    pub api_key: String,
    #[serde(default = "default_site")]
    pub site: String,
    /// Optional group partition; defaults to one `general` group over all
    /// spots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<BTreeMap<String, Vec<u32>>>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ticks == 0 {
            return Err(Error::Config("scenario needs at least one tick".into()));
        }
        if self.n_spots == 0 || self.n_spots > MAX_SPOTS {
            return Err(Error::Config(format!(
                "n_spots {} outside 1..={MAX_SPOTS}",
                self.n_spots
            )));
        }
        if let Some(seq) = &self.bitmasks {
            if seq.len() as u64 != self.ticks {
                return Err(Error::Config(format!(
                    "bitmask sequence has {} entries for {} ticks",
                    seq.len(),
                    self.ticks
                )));
            }
        }
        for w in &self.outages {
            if w.end_tick <= w.start_tick {
                return Err(Error::Config(format!(
                    "outage window [{}, {}) is empty or inverted",
                    w.start_tick, w.end_tick
                )));
            }
        }
        if self.staleness_tolerance_minutes <= 0 || self.totem_freshness_minutes <= 0 {
            return Err(Error::Config("tolerances must be positive minutes".into()));
        }
        Ok(())
    }

    fn lot_config(&self) -> LotConfig {
        let groups = self.groups.clone().unwrap_or_else(|| {
            let mut m = BTreeMap::new();
            m.insert("general".into(), (1..=self.n_spots as u32).collect());
            m
        });
        LotConfig {
            image_width: 640,
            image_height: 640,
            delta: crate::config::DEFAULT_DELTA,
            area_threshold_px: crate::config::DEFAULT_AREA_THRESHOLD_PX,
            nms_iou: crate::config::DEFAULT_NMS_IOU,
            abbp_delta: None,
            critical_spot_ids: Default::default(),
            groups,
        }
    }

    fn link_up(&self, tick: u64) -> bool {
        !self.outages.iter().any(|w| w.contains(tick))
    }
}

/// State of one simulated minute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub link_up: bool,
    pub delivered: usize,
    pub stale: bool,
    pub totem: TotemDisplay,
}

/// Roll-up written at the end of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimReport {
    pub ticks: u64,
    pub produced: u64,
    pub delivered: u64,
    pub rejected: u64,
    pub dropped_oldest: u64,
    pub pending_at_end: usize,
    pub staleness_notifications: u64,
    pub stale_ticks: u64,
    pub totem_off_ticks: u64,
    pub final_available: Option<u64>,
    pub final_bitmask: Option<u64>,
    /// True when the persisted series equals the produced sequence, in order.
    pub sequence_intact: bool,
}

/// Everything a run yields; `report` is the serializable summary.
#[derive(Debug)]
pub struct RunResult {
    pub report: SimReport,
    pub series: OccupancySeries,
    pub graph: EntityGraph,
    pub tick_records: Vec<TickRecord>,
}

/// Execute a scenario. Identical scenarios yield identical results.
pub fn run_simulation(scenario: &Scenario) -> Result<RunResult> {
    scenario.validate()?;

    let registry: DeviceRegistry = [(
        scenario.device_id.clone(),
        DeviceRecord {
            api_key: scenario.api_key.clone(),
            n_spots: scenario.n_spots,
        },
    )]
    .into_iter()
    .collect();

    let mut graph = build_entities(&scenario.lot_config(), &scenario.site)?;
    let mut series = OccupancySeries::new(scenario.n_spots)?;
    let mut queue = match scenario.queue_capacity {
        Some(c) => ForwardQueue::new(c),
        None => ForwardQueue::unbounded(),
    };
    let mut monitor = StalenessMonitor::new(Duration::minutes(scenario.staleness_tolerance_minutes));
    let freshness = Duration::minutes(scenario.totem_freshness_minutes);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    let ingest_path = format!(
        "/iot-agent?k={}&i={}",
        scenario.api_key, scenario.device_id
    );

    let mut produced = Vec::with_capacity(scenario.ticks as usize);
    let mut tick_records = Vec::with_capacity(scenario.ticks as usize);
    let mut delivered_total = 0u64;
    let mut rejected = 0u64;
    let mut stale_ticks = 0u64;
    let mut off_ticks = 0u64;

    for tick in 0..scenario.ticks {
        let now = scenario.start_time + Duration::minutes(tick as i64);
        let bitmask = match &scenario.bitmasks {
            Some(seq) => seq[tick as usize],
            None => {
                if scenario.n_spots == MAX_SPOTS {
                    rng.gen()
                } else {
                    rng.gen_range(0..1u64 << scenario.n_spots)
                }
            }
        };
        produced.push(bitmask);

        let measurement = Measurement {
            device_id: scenario.device_id.clone(),
            bitmask,
            produced_at: now,
            attempt_count: 0,
        };
        let link_up = scenario.link_up(tick);
        let delivered = queue.enqueue_and_flush(measurement, link_up);
        let delivered_count = delivered.len();
        delivered_total += delivered_count as u64;

        for m in delivered {
            let body = serde_json::json!({ "parking_status": m.bitmask }).to_string();
            match handle_ingest_http(&ingest_path, &body, &registry, m.produced_at) {
                Ok(status) => {
                    series.push(status.clone())?;
                    graph.apply_status_update(&status)?;
                }
                Err(rejection) => {
                    log::warn!("ingest rejected at tick {tick}: {rejection}");
                    rejected += 1;
                }
            }
        }

        let last_update = series
            .last()
            .map(|s| s.timestamp())
            .unwrap_or(scenario.start_time);
        let status = monitor.check(last_update, now, |_| {})?;
        let stale = status.state == FreshState::Stale;
        if stale {
            stale_ticks += 1;
        }

        let totem = match graph.dynamic_u64(graph.parking_id(), "availableSpotNumber") {
            Some(available) => crate::telemetry::totem_value(
                available as i64,
                scenario.n_spots,
                last_update,
                now,
                freshness,
            ),
            None => TotemDisplay::Off,
        };
        if totem == TotemDisplay::Off {
            off_ticks += 1;
        }

        tick_records.push(TickRecord {
            tick,
            link_up,
            delivered: delivered_count,
            stale,
            totem,
        });
    }

    let persisted: Vec<u64> = series.rows().iter().map(|r| r.bitmask()).collect();
    let sequence_intact = persisted == produced;

    let report = SimReport {
        ticks: scenario.ticks,
        produced: produced.len() as u64,
        delivered: delivered_total,
        rejected,
        dropped_oldest: queue.dropped_oldest(),
        pending_at_end: queue.len(),
        staleness_notifications: monitor.notifications(),
        stale_ticks,
        totem_off_ticks: off_ticks,
        final_available: graph.dynamic_u64(graph.parking_id(), "availableSpotNumber"),
        final_bitmask: series.last().map(|s| s.bitmask()),
        sequence_intact,
    };

    Ok(RunResult {
        report,
        series,
        graph,
        tick_records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_scenario() -> Scenario {
        Scenario::from_json(
            &serde_json::json!({
                "ticks": 30,
                "n_spots": 8,
                "seed": 3,
                "outages": [{"start_tick": 5, "end_tick": 12}],
            })
            .to_string(),
        )
        .unwrap()
    }

    #[test]
    fn scenario_defaults_and_validation() {
        let s = small_scenario();
        assert_eq!(s.device_id, "edge-01");
        assert_eq!(s.staleness_tolerance_minutes, 5);
        assert!(Scenario::from_json("{\"ticks\":0,\"n_spots\":4}").is_err());
        assert!(Scenario::from_json(
            &serde_json::json!({"ticks": 2, "n_spots": 4, "bitmasks": [1]}).to_string()
        )
        .is_err());
        assert!(Scenario::from_json(
            &serde_json::json!({
                "ticks": 2, "n_spots": 4,
                "outages": [{"start_tick": 3, "end_tick": 3}],
            })
            .to_string()
        )
        .is_err());
    }

    #[test]
    fn fault_free_run_persists_everything_in_order() {
        let mut s = small_scenario();
        s.outages.clear();
        let result = run_simulation(&s).unwrap();
        assert!(result.report.sequence_intact);
        assert_eq!(result.report.delivered, 30);
        assert_eq!(result.report.rejected, 0);
        assert_eq!(result.report.stale_ticks, 0);
        assert_eq!(result.report.totem_off_ticks, 0);
        assert_eq!(result.series.len(), 30);

        // every tick's display equals the available count of the status
        // persisted that tick
        for (record, row) in result.tick_records.iter().zip(result.series.rows()) {
            let available = (s.n_spots - row.bitmask().count_ones() as usize) as u64;
            assert_eq!(record.totem, TotemDisplay::Number(available));
        }
    }

    #[test]
    fn outage_replays_and_recovers() {
        let result = run_simulation(&small_scenario()).unwrap();
        // link restored at tick 12 delivers ticks 5..=12 together
        assert_eq!(result.tick_records[12].delivered, 8);
        assert!(result.report.sequence_intact);
        // 7-minute outage exceeds the 5-minute tolerance exactly once
        assert_eq!(result.report.staleness_notifications, 1);
        // stale/off from tick 10 (gap 6 min from tick 4) through tick 11
        let stale: Vec<u64> = result
            .tick_records
            .iter()
            .filter(|t| t.stale)
            .map(|t| t.tick)
            .collect();
        assert_eq!(stale, vec![10, 11]);
        for t in &result.tick_records {
            assert_eq!(t.stale, t.totem == TotemDisplay::Off);
        }
    }

    #[test]
    fn runs_are_deterministic_for_a_fixed_seed() {
        let s = small_scenario();
        let a = run_simulation(&s).unwrap();
        let b = run_simulation(&s).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.tick_records, b.tick_records);
        assert_eq!(a.series, b.series);
    }

    #[test]
    fn injected_bitmask_sequence_is_used_verbatim() {
        let s = Scenario::from_json(
            &serde_json::json!({
                "ticks": 3,
                "n_spots": 4,
                "bitmasks": [1, 2, 3],
            })
            .to_string(),
        )
        .unwrap();
        let result = run_simulation(&s).unwrap();
        let masks: Vec<u64> = result.series.rows().iter().map(|r| r.bitmask()).collect();
        assert_eq!(masks, vec![1, 2, 3]);
        assert_eq!(result.report.final_available, Some(2)); // 3 = 0b0011 -> 2 occupied
    }

    #[test]
    fn bounded_queue_drops_show_up_in_the_report() {
        let s = Scenario::from_json(
            &serde_json::json!({
                "ticks": 10,
                "n_spots": 4,
                "seed": 1,
                "queue_capacity": 2,
                "outages": [{"start_tick": 0, "end_tick": 9}],
            })
            .to_string(),
        )
        .unwrap();
        let result = run_simulation(&s).unwrap();
        assert!(result.report.dropped_oldest > 0);
        assert!(!result.report.sequence_intact);
        assert_eq!(
            result.report.produced,
            result.report.delivered + result.report.dropped_oldest
                + result.report.pending_at_end as u64
        );
    }
}
