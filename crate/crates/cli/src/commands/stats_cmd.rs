//! `stats daily` and `stats weekly`.

use std::path::PathBuf;

use chrono::NaiveDate;
use clap::Args;

use spotwise_core::error::{Error, Result};
use spotwise_core::series::OccupancySeries;
use spotwise_core::stats::{
    build_history, daily_spot_stats, overall_daily_summary, weekly_report, History,
    HolidayCalendar, SpotDayStat,
};

use super::{fmt1, parse_tz};
use crate::OutputMode;

fn parse_date(text: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map_err(|e| Error::Config(format!("bad date `{text}`: {e} (use YYYY-MM-DD)")))
}

#[derive(Debug, Args)]
pub struct DailyArgs {
    /// Bitmask series CSV (with its .meta.json sidecar).
    #[arg(long)]
    series: PathBuf,
    /// Local calendar day to report, YYYY-MM-DD.
    #[arg(long)]
    date: String,
    /// Timezone offset for day boundaries.
    #[arg(long, default_value = "+00:00")]
    tz: String,
    /// History JSON with per-spot weekday/weekend means and stds; when
    /// absent, history is computed from the series days before the date.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Holiday calendar (one YYYY-MM-DD per line); holidays class as weekends.
    #[arg(long)]
    holidays: Option<PathBuf>,
    /// Minimum observed days per class when computing history from the series.
    #[arg(long, default_value_t = 2)]
    min_history_days: usize,
    #[command(flatten)]
    output: OutputMode,
}

fn render_daily_table(stats: &[SpotDayStat]) -> String {
    let mut out = String::from("Spot  Hours  Hist.Avg  Z-score  DeltaHours  Occupation\n");
    for s in stats {
        match s.assessment {
            Some(a) => out.push_str(&format!(
                "{:<4}  {:>5}  {:>8}  {:>7}  {:>10}  {}\n",
                s.spot_id,
                fmt1(s.hours),
                fmt1(a.hist_mean),
                fmt1(a.z),
                format!("{:+.1}", a.delta_hours),
                a.flag.label()
            )),
            None => out.push_str(&format!(
                "{:<4}  {:>5}  {:>8}  {:>7}  {:>10}  insufficient history\n",
                s.spot_id,
                fmt1(s.hours),
                "-",
                "-",
                "-"
            )),
        }
    }
    out
}

pub fn run_daily(args: DailyArgs) -> Result<Vec<PathBuf>> {
    let series = OccupancySeries::load(&args.series)?;
    let date = parse_date(&args.date)?;
    let tz = parse_tz(&args.tz)?;
    let holidays = match &args.holidays {
        Some(path) => HolidayCalendar::load(path)?,
        None => HolidayCalendar::empty(),
    };
    let history = match &args.history {
        Some(path) => History::load(path)?,
        None => build_history(&series, date, tz, &holidays, args.min_history_days)?,
    };

    let stats = daily_spot_stats(&series, &history, date, tz, &holidays)?;
    let summary = overall_daily_summary(&stats)?;

    if args.output.json {
        println!(
            "{}",
            serde_json::json!({
                "date": args.date,
                "stats": stats,
                "summary": summary,
            })
        );
    } else {
        print!("{}", render_daily_table(&stats));
        println!(
            "Total occupied hours = {}; Average per spot = {}h; Most occupied = spot {} ({}h); \
             Least occupied = spot {} ({}h); Spots with < 1h = {}; Spots with |Z| > 2 = {}",
            fmt1(summary.total_hours),
            fmt1(summary.avg_hours_per_spot),
            summary.most_occupied.0,
            fmt1(summary.most_occupied.1),
            summary.least_occupied.0,
            fmt1(summary.least_occupied.1),
            summary.spots_under_1h,
            summary.anomalous_count
        );
    }
    Ok(Vec::new())
}

#[derive(Debug, Args)]
pub struct WeeklyArgs {
    /// Bitmask series CSV (with its .meta.json sidecar).
    #[arg(long)]
    series: PathBuf,
    /// Last day of the seven-day window, YYYY-MM-DD.
    #[arg(long)]
    week_ending: String,
    /// Timezone offset for day boundaries.
    #[arg(long, default_value = "+00:00")]
    tz: String,
    #[command(flatten)]
    output: OutputMode,
}

pub fn run_weekly(args: WeeklyArgs) -> Result<Vec<PathBuf>> {
    let series = OccupancySeries::load(&args.series)?;
    let end = parse_date(&args.week_ending)?;
    let tz = parse_tz(&args.tz)?;
    let report = weekly_report(&series, end, tz)?;

    if args.output.json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("Week {} .. {}", report.start_date, report.end_date);
        println!("Spot  Hours");
        for (spot_id, hours) in &report.per_spot_hours {
            println!("{spot_id:<4}  {:>6}", fmt1(*hours));
        }
        println!(
            "Total = {}h; Average per spot = {}h; Most occupied = spot {} ({}h); \
             Least occupied = spot {} ({}h)",
            fmt1(report.total_hours),
            fmt1(report.avg_hours_per_spot),
            report.most_occupied.0,
            fmt1(report.most_occupied.1),
            report.least_occupied.0,
            fmt1(report.least_occupied.1)
        );
        let pattern: Vec<String> = report
            .hourly_occupied_avg
            .iter()
            .map(|v| fmt1(*v))
            .collect();
        println!("Hourly occupied average (00..23): {}", pattern.join(" "));
    }
    Ok(Vec::new())
}
