//! `entities`: build the digital-shadow graph from the lot configuration,
//! optionally apply a bitmask update, and emit NGSI-style payloads.

use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::Args;

use spotwise_core::codec::ParkingStatus;
use spotwise_core::config::LotConfig;
use spotwise_core::error::{Error, Result};
use spotwise_core::shadow::{build_entities, TotemSource};

use super::read_config_file;

#[derive(Debug, Args)]
pub struct EntitiesArgs {
    /// Lot configuration JSON.
    #[arg(long, env = "SPOTWISE_CONFIG")]
    config: PathBuf,
    /// Site label used in entity ids.
    #[arg(long, default_value = "ic2")]
    site: String,
    /// Occupancy bitmask to fan out before serializing.
    #[arg(long, requires = "timestamp")]
    bitmask: Option<u64>,
    /// Observation instant for the update (RFC 3339, e.g.
    /// 2025-10-22T08:00:00Z).
    #[arg(long)]
    timestamp: Option<String>,
    /// Group whose availability the totem mirrors; default is the whole lot.
    #[arg(long)]
    totem_group: Option<String>,
    /// Write one payload file per entity into this directory instead of
    /// printing to stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also persist the whole graph snapshot as JSON.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

pub fn run(args: EntitiesArgs) -> Result<Vec<PathBuf>> {
    let cfg = LotConfig::from_json(&read_config_file(&args.config)?)?;
    let mut graph = build_entities(&cfg, &args.site)?;

    if let Some(group) = &args.totem_group {
        let group_entity = format!("urn:ngsi-ld:ParkingGroup:{}-{group}", args.site);
        graph.set_totem_source(TotemSource::Group(group_entity))?;
    }

    if let Some(bitmask) = args.bitmask {
        let ts_text = args.timestamp.as_deref().expect("clap enforces the pair");
        let ts: DateTime<Utc> = DateTime::parse_from_rfc3339(ts_text)
            .map_err(|e| Error::Config(format!("bad timestamp `{ts_text}`: {e}")))?
            .with_timezone(&Utc);
        let status = ParkingStatus::from_bitmask(bitmask, graph.n_spots(), ts)?;
        let changes = graph.apply_status_update(&status)?;
        eprintln!("applied bitmask {bitmask}: {} propert(ies) changed", changes.len());
    }

    let mut artifacts = Vec::new();
    match &args.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for (id, payload) in graph.serialize_all() {
                let file_name = format!("{}.json", id.replace(':', "_"));
                let path = dir.join(file_name);
                std::fs::write(&path, payload + "\n")?;
                artifacts.push(path);
            }
            println!("wrote {} entity payload(s) to {}", artifacts.len(), dir.display());
        }
        None => {
            for (_, payload) in graph.serialize_all() {
                println!("{payload}");
            }
        }
    }

    if let Some(path) = &args.snapshot {
        std::fs::write(path, graph.to_json()? + "\n")?;
        artifacts.push(path.clone());
    }
    Ok(artifacts)
}
