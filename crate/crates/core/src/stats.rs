//! Occupancy statistics: per-spot occupied hours, daily z-score anomaly
//! flags against day-class history, and weekly aggregates.
//!
//! A day is classed as weekday or weekend; holidays count as weekends. Each
//! spot's daily hours are compared to the historical mean and standard
//! deviation of its day class, and |z| > 2 marks the spot as unusually busy
//! or unusually idle.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{Datelike, FixedOffset, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::OccupancySeries;

/// Day classification used to select history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DayClass {
    Weekday,
    Weekend,
}

/// Dates treated as weekends regardless of the calendar day.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HolidayCalendar {
    dates: BTreeSet<NaiveDate>,
}

impl HolidayCalendar {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parse a plain-text calendar: one `YYYY-MM-DD` per line, `#` comments
    /// and blank lines ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut dates = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let date = NaiveDate::parse_from_str(line, "%Y-%m-%d").map_err(|e| Error::Parse {
                line: i + 1,
                column: 1,
                message: format!("bad holiday date `{line}`: {e}"),
            })?;
            dates.insert(date);
        }
        Ok(Self { dates })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.contains(&date)
    }

    pub fn classify(&self, date: NaiveDate) -> DayClass {
        let wd = date.weekday();
        if wd == Weekday::Sat || wd == Weekday::Sun || self.contains(date) {
            DayClass::Weekend
        } else {
            DayClass::Weekday
        }
    }
}

/// Historical (mean, std) of daily occupied hours for one spot and day class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpotHistory {
    pub mean: f64,
    pub std: f64,
}

/// Per-spot history split by day class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    #[serde(default)]
    pub weekday: BTreeMap<u32, SpotHistory>,
    #[serde(default)]
    pub weekend: BTreeMap<u32, SpotHistory>,
}

impl History {
    pub fn get(&self, class: DayClass, spot_id: u32) -> Option<SpotHistory> {
        match class {
            DayClass::Weekday => self.weekday.get(&spot_id).copied(),
            DayClass::Weekend => self.weekend.get(&spot_id).copied(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("history file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Population mean and standard deviation.
fn population_stats(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Build history from the series itself: daily hours of every local date
/// strictly before `before`, grouped by day class. A class needs at least
/// `min_days` observed days to produce entries.
pub fn build_history(
    series: &OccupancySeries,
    before: NaiveDate,
    tz: FixedOffset,
    holidays: &HolidayCalendar,
    min_days: usize,
) -> Result<History> {
    let mut dates: BTreeSet<NaiveDate> = BTreeSet::new();
    for row in series.rows() {
        let date = row.timestamp().with_timezone(&tz).date_naive();
        if date < before {
            dates.insert(date);
        }
    }

    let mut history = History::default();
    for class in [DayClass::Weekday, DayClass::Weekend] {
        let class_dates: Vec<NaiveDate> = dates
            .iter()
            .copied()
            .filter(|d| holidays.classify(*d) == class)
            .collect();
        if class_dates.len() < min_days {
            continue;
        }
        for spot_id in 1..=series.n_spots() as u32 {
            let samples: Vec<f64> = class_dates
                .iter()
                .map(|d| occupied_hours(series, spot_id, *d, tz))
                .collect::<Result<_>>()?;
            let (mean, std) = population_stats(&samples);
            let entry = SpotHistory { mean, std };
            match class {
                DayClass::Weekday => history.weekday.insert(spot_id, entry),
                DayClass::Weekend => history.weekend.insert(spot_id, entry),
            };
        }
    }
    Ok(history)
}

/// Occupied hours of `spot_id` during the local calendar day `day`: one
/// occupied minute-row contributes 1/60 h; missing minutes contribute 0.
pub fn occupied_hours(
    series: &OccupancySeries,
    spot_id: u32,
    day: NaiveDate,
    tz: FixedOffset,
) -> Result<f64> {
    if spot_id == 0 || spot_id as usize > series.n_spots() {
        return Err(Error::Domain(format!(
            "spot {spot_id} outside 1..={}",
            series.n_spots()
        )));
    }
    let mut minutes = 0u64;
    for row in series.rows() {
        if row.timestamp().with_timezone(&tz).date_naive() == day && row.is_occupied(spot_id)? {
            minutes += 1;
        }
    }
    Ok(minutes as f64 / 60.0)
}

/// Unusual-occupation flag; Busy and LowOccupation require |z| strictly
/// above 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OccupationFlag {
    Normal,
    Busy,
    LowOccupation,
}

impl OccupationFlag {
    pub fn from_z(z: f64) -> Self {
        if z > 2.0 {
            OccupationFlag::Busy
        } else if z < -2.0 {
            OccupationFlag::LowOccupation
        } else {
            OccupationFlag::Normal
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            OccupationFlag::Normal => "Normal",
            OccupationFlag::Busy => "Busy",
            OccupationFlag::LowOccupation => "Low Occupation",
        }
    }
}

/// Z-score assessment of one spot-day against its history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredAssessment {
    pub hist_mean: f64,
    pub hist_std: f64,
    pub z: f64,
    pub delta_hours: f64,
    pub flag: OccupationFlag,
}

/// One spot's daily statistic; `assessment` is `None` when the day class has
/// no history for the spot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpotDayStat {
    pub spot_id: u32,
    pub hours: f64,
    pub assessment: Option<ScoredAssessment>,
}

fn assess(hours: f64, hist: SpotHistory) -> ScoredAssessment {
    let delta_hours = hours - hist.mean;
    let z = if hist.std > 0.0 {
        delta_hours / hist.std
    } else if delta_hours == 0.0 {
        0.0
    } else if delta_hours > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    ScoredAssessment {
        hist_mean: hist.mean,
        hist_std: hist.std,
        z,
        delta_hours,
        flag: OccupationFlag::from_z(z),
    }
}

/// Daily per-spot statistics for `date`, using the history of the date's
/// class (holidays count as weekends).
pub fn daily_spot_stats(
    series: &OccupancySeries,
    history: &History,
    date: NaiveDate,
    tz: FixedOffset,
    holidays: &HolidayCalendar,
) -> Result<Vec<SpotDayStat>> {
    let class = holidays.classify(date);
    let mut stats = Vec::with_capacity(series.n_spots());
    for spot_id in 1..=series.n_spots() as u32 {
        let hours = occupied_hours(series, spot_id, date, tz)?;
        let assessment = history.get(class, spot_id).map(|h| assess(hours, h));
        stats.push(SpotDayStat {
            spot_id,
            hours,
            assessment,
        });
    }
    Ok(stats)
}

/// Lot-level roll-up of one day's spot statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySummary {
    pub total_hours: f64,
    pub avg_hours_per_spot: f64,
    pub most_occupied: (u32, f64),
    pub least_occupied: (u32, f64),
    pub spots_under_1h: usize,
    /// Spots whose |z| exceeded 2.
    pub anomalous_count: usize,
}

/// Aggregate per-spot stats; extremes tie-break toward the lowest spot id.
pub fn overall_daily_summary(stats: &[SpotDayStat]) -> Result<DailySummary> {
    if stats.is_empty() {
        return Err(Error::Domain("no spot statistics to summarize".into()));
    }
    let total_hours: f64 = stats.iter().map(|s| s.hours).sum();
    let mut most = (stats[0].spot_id, stats[0].hours);
    let mut least = (stats[0].spot_id, stats[0].hours);
    for s in &stats[1..] {
        if s.hours > most.1 {
            most = (s.spot_id, s.hours);
        }
        if s.hours < least.1 {
            least = (s.spot_id, s.hours);
        }
    }
    Ok(DailySummary {
        total_hours,
        avg_hours_per_spot: total_hours / stats.len() as f64,
        most_occupied: most,
        least_occupied: least,
        spots_under_1h: stats.iter().filter(|s| s.hours < 1.0).count(),
        anomalous_count: stats
            .iter()
            .filter(|s| {
                s.assessment
                    .map(|a| a.flag != OccupationFlag::Normal)
                    .unwrap_or(false)
            })
            .count(),
    })
}

/// Weekly aggregate over the seven local days ending at `week_ending`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyReport {
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    /// (spot id, hours over the week), ascending by id.
    pub per_spot_hours: Vec<(u32, f64)>,
    pub total_hours: f64,
    pub avg_hours_per_spot: f64,
    pub most_occupied: (u32, f64),
    pub least_occupied: (u32, f64),
    /// Mean occupied-spot count per local hour of day, over the week's rows.
    pub hourly_occupied_avg: Vec<f64>,
}

pub fn weekly_report(
    series: &OccupancySeries,
    week_ending: NaiveDate,
    tz: FixedOffset,
) -> Result<WeeklyReport> {
    let start = week_ending - chrono::Duration::days(6);
    let n = series.n_spots();

    let mut per_spot = vec![0.0f64; n];
    let mut day = start;
    while day <= week_ending {
        for (i, slot) in per_spot.iter_mut().enumerate() {
            *slot += occupied_hours(series, (i + 1) as u32, day, tz)?;
        }
        day += chrono::Duration::days(1);
    }

    let mut hour_occupied = [0u64; 24];
    let mut hour_samples = [0u64; 24];
    for row in series.rows() {
        let local = row.timestamp().with_timezone(&tz);
        let date = local.date_naive();
        if date >= start && date <= week_ending {
            let h = chrono::Timelike::hour(&local) as usize;
            hour_occupied[h] += row.bits().iter().filter(|&&b| b).count() as u64;
            hour_samples[h] += 1;
        }
    }
    let hourly_occupied_avg: Vec<f64> = hour_occupied
        .iter()
        .zip(&hour_samples)
        .map(|(&occ, &cnt)| if cnt == 0 { 0.0 } else { occ as f64 / cnt as f64 })
        .collect();

    let per_spot_hours: Vec<(u32, f64)> = per_spot
        .iter()
        .enumerate()
        .map(|(i, &h)| ((i + 1) as u32, h))
        .collect();
    let total_hours: f64 = per_spot.iter().sum();
    let mut most = per_spot_hours[0];
    let mut least = per_spot_hours[0];
    for &(id, h) in &per_spot_hours[1..] {
        if h > most.1 {
            most = (id, h);
        }
        if h < least.1 {
            least = (id, h);
        }
    }

    Ok(WeeklyReport {
        start_date: start,
        end_date: week_ending,
        per_spot_hours,
        total_hours,
        avg_hours_per_spot: total_hours / n as f64,
        most_occupied: most,
        least_occupied: least,
        hourly_occupied_avg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::ParkingStatus;
    use chrono::{DateTime, TimeZone, Utc};

    fn utc() -> FixedOffset {
        FixedOffset::east_opt(0).unwrap()
    }

    fn minute(day: u32, m: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2025, 10, day, m / 60, m % 60, 0).unwrap()
    }

    /// Series over one day where spot `s` is occupied for `minutes[s-1]`
    /// leading minutes.
    fn day_series(day: u32, minutes: &[u32]) -> OccupancySeries {
        let n = minutes.len();
        let mut series = OccupancySeries::new(n).unwrap();
        for m in 0..1440u32 {
            let bits: Vec<bool> = minutes.iter().map(|&k| m < k).collect();
            series
                .push(ParkingStatus::from_bits(bits, minute(day, m)).unwrap())
                .unwrap();
        }
        series
    }

    #[test]
    fn hours_are_minutes_over_sixty() {
        let series = day_series(22, &[60, 1440, 648, 0]);
        let d = NaiveDate::from_ymd_opt(2025, 10, 22).unwrap();
        assert_eq!(occupied_hours(&series, 1, d, utc()).unwrap(), 1.0);
        assert_eq!(occupied_hours(&series, 2, d, utc()).unwrap(), 24.0);
        assert_eq!(occupied_hours(&series, 3, d, utc()).unwrap(), 10.8);
        assert_eq!(occupied_hours(&series, 4, d, utc()).unwrap(), 0.0);
    }

    #[test]
    fn unknown_spot_is_domain_error() {
        let series = day_series(22, &[10]);
        let d = NaiveDate::from_ymd_opt(2025, 10, 22).unwrap();
        assert!(occupied_hours(&series, 0, d, utc()).is_err());
        assert!(occupied_hours(&series, 2, d, utc()).is_err());
    }

    #[test]
    fn rows_outside_the_day_do_not_count() {
        let series = day_series(22, &[1440]);
        let other = NaiveDate::from_ymd_opt(2025, 10, 23).unwrap();
        assert_eq!(occupied_hours(&series, 1, other, utc()).unwrap(), 0.0);
    }

    #[test]
    fn timezone_shifts_the_day_boundary() {
        // rows at 00:00..01:00 UTC land on the previous local day at UTC-3
        let mut series = OccupancySeries::new(1).unwrap();
        for m in 0..60u32 {
            series
                .push(ParkingStatus::from_bits(vec![true], minute(22, m)).unwrap())
                .unwrap();
        }
        let tz = FixedOffset::west_opt(3 * 3600).unwrap();
        let d21 = NaiveDate::from_ymd_opt(2025, 10, 21).unwrap();
        let d22 = NaiveDate::from_ymd_opt(2025, 10, 22).unwrap();
        assert_eq!(occupied_hours(&series, 1, d21, tz).unwrap(), 1.0);
        assert_eq!(occupied_hours(&series, 1, d22, tz).unwrap(), 0.0);
    }

    #[test]
    fn hours_are_additive_over_row_partitions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let d = NaiveDate::from_ymd_opt(2025, 10, 22).unwrap();
        let mut full = OccupancySeries::new(2).unwrap();
        let mut first = OccupancySeries::new(2).unwrap();
        let mut second = OccupancySeries::new(2).unwrap();
        let cut: u32 = rng.gen_range(1..1439);
        for m in 0..1440u32 {
            let bits: Vec<bool> = vec![rng.gen(), rng.gen()];
            let status = ParkingStatus::from_bits(bits, minute(22, m)).unwrap();
            full.push(status.clone()).unwrap();
            if m < cut {
                first.push(status).unwrap();
            } else {
                second.push(status).unwrap();
            }
        }
        for spot in 1..=2u32 {
            let whole = occupied_hours(&full, spot, d, utc()).unwrap();
            let parts = occupied_hours(&first, spot, d, utc()).unwrap()
                + occupied_hours(&second, spot, d, utc()).unwrap();
            assert!((whole - parts).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_variance_history_cases() {
        let hist = SpotHistory { mean: 4.5, std: 0.0 };
        let same = assess(4.5, hist);
        assert_eq!(same.z, 0.0);
        assert_eq!(same.flag, OccupationFlag::Normal);

        let above = assess(5.0, hist);
        assert_eq!(above.z, f64::INFINITY);
        assert_eq!(above.flag, OccupationFlag::Busy);

        let below = assess(4.0, hist);
        assert_eq!(below.z, f64::NEG_INFINITY);
        assert_eq!(below.flag, OccupationFlag::LowOccupation);
    }

    #[test]
    fn missing_history_yields_marker_not_failure() {
        let series = day_series(22, &[60, 120]);
        let d = NaiveDate::from_ymd_opt(2025, 10, 22).unwrap();
        let mut history = History::default();
        history.weekday.insert(
            1,
            SpotHistory {
                mean: 1.0,
                std: 0.5,
            },
        );
        let stats =
            daily_spot_stats(&series, &history, d, utc(), &HolidayCalendar::empty()).unwrap();
        assert!(stats[0].assessment.is_some());
        assert!(stats[1].assessment.is_none());
    }

    #[test]
    fn holidays_use_the_weekend_class() {
        // 2025-10-22 is a Wednesday
        let d = NaiveDate::from_ymd_opt(2025, 10, 22).unwrap();
        let series = day_series(22, &[120]);
        let mut history = History::default();
        history.weekday.insert(1, SpotHistory { mean: 2.0, std: 1.0 });
        history.weekend.insert(1, SpotHistory { mean: 10.0, std: 1.0 });

        let plain = HolidayCalendar::empty();
        assert_eq!(plain.classify(d), DayClass::Weekday);
        let with_holiday = HolidayCalendar::from_text("2025-10-22\n").unwrap();
        assert_eq!(with_holiday.classify(d), DayClass::Weekend);

        let weekday_stats = daily_spot_stats(&series, &history, d, utc(), &plain).unwrap();
        assert_eq!(weekday_stats[0].assessment.unwrap().hist_mean, 2.0);
        let holiday_stats =
            daily_spot_stats(&series, &history, d, utc(), &with_holiday).unwrap();
        assert_eq!(holiday_stats[0].assessment.unwrap().hist_mean, 10.0);
    }

    #[test]
    fn flag_matches_z_threshold_strictly() {
        assert_eq!(OccupationFlag::from_z(2.0), OccupationFlag::Normal);
        assert_eq!(OccupationFlag::from_z(-2.0), OccupationFlag::Normal);
        assert_eq!(OccupationFlag::from_z(2.0000001), OccupationFlag::Busy);
        assert_eq!(OccupationFlag::from_z(-2.1), OccupationFlag::LowOccupation);
    }

    #[test]
    fn summary_handles_ties_and_empty_input() {
        assert!(overall_daily_summary(&[]).is_err());

        let equal: Vec<SpotDayStat> = (1..=3)
            .map(|spot_id| SpotDayStat {
                spot_id,
                hours: 2.0,
                assessment: None,
            })
            .collect();
        let summary = overall_daily_summary(&equal).unwrap();
        assert_eq!(summary.most_occupied, (1, 2.0));
        assert_eq!(summary.least_occupied, (1, 2.0));
        assert_eq!(summary.spots_under_1h, 0);

        let single = [SpotDayStat {
            spot_id: 1,
            hours: 0.0,
            assessment: None,
        }];
        let summary = overall_daily_summary(&single).unwrap();
        assert_eq!(summary.total_hours, 0.0);
        assert_eq!(summary.spots_under_1h, 1);
    }

    #[test]
    fn build_history_needs_enough_days_per_class() {
        // two weekdays (Wed 22, Thu 23) but a single weekend day (Sat 25)
        let mut series = OccupancySeries::new(1).unwrap();
        for (day, occupied) in [(22u32, 60u32), (23, 120), (25, 30)] {
            for m in 0..240u32 {
                series
                    .push(
                        ParkingStatus::from_bits(vec![m < occupied], minute(day, m)).unwrap(),
                    )
                    .unwrap();
            }
        }
        let after = NaiveDate::from_ymd_opt(2025, 10, 26).unwrap();
        let history =
            build_history(&series, after, utc(), &HolidayCalendar::empty(), 2).unwrap();
        let weekday = history.get(DayClass::Weekday, 1).unwrap();
        assert!((weekday.mean - 1.5).abs() < 1e-12); // (1h + 2h) / 2
        assert!((weekday.std - 0.5).abs() < 1e-12);
        assert!(history.get(DayClass::Weekend, 1).is_none());
    }

    #[test]
    fn weekly_report_accumulates_across_days() {
        let mut series = OccupancySeries::new(2).unwrap();
        // two days: spot 1 occupied 60 min/day, spot 2 occupied 30 min/day
        for day in [20u32, 21] {
            for m in 0..120u32 {
                let bits = vec![m < 60, m < 30];
                series
                    .push(ParkingStatus::from_bits(bits, minute(day, m)).unwrap())
                    .unwrap();
            }
        }
        let report = weekly_report(
            &series,
            NaiveDate::from_ymd_opt(2025, 10, 21).unwrap(),
            utc(),
        )
        .unwrap();
        assert_eq!(report.per_spot_hours, vec![(1, 2.0), (2, 1.0)]);
        assert_eq!(report.total_hours, 3.0);
        assert_eq!(report.most_occupied, (1, 2.0));
        assert_eq!(report.least_occupied, (2, 1.0));
        // first hour of each day: spot1 always occupied, spot2 half the time
        assert!((report.hourly_occupied_avg[0] - 1.5).abs() < 1e-12);
        assert_eq!(report.hourly_occupied_avg[3], 0.0);
    }

    #[test]
    fn history_json_round_trip() {
        let mut history = History::default();
        history.weekday.insert(2, SpotHistory { mean: 4.7, std: 1.5 });
        history.weekend.insert(2, SpotHistory { mean: 1.0, std: 0.2 });
        let text = serde_json::to_string(&history).unwrap();
        let back = History::from_json(&text).unwrap();
        assert_eq!(history, back);
    }
}
