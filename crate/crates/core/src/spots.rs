//! Parking-spot annotations and their CSV wire format.
//!
//! The spot file holds one line per labeled image; each line is a `;`-separated
//! list of YOLO-style quintuples `class x_c y_c w h` in normalized coordinates.
//! Only the first non-empty line is read (a single reference image is labeled).
//! Spot ids are assigned 1..n in file order; group membership and critical
//! flags come from the lot configuration, not the CSV.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::NormBox;

/// One annotated parking spot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotAnnotation {
    /// 1-based spot id.
    pub spot_id: u32,
    pub center_box: NormBox,
    pub group_id: String,
    /// Member of the critical set used by bounding-box partitioning.
    pub critical: bool,
}

/// The full annotated lot: spots ordered by ascending id plus the reference
/// image dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotMap {
    spots: Vec<SpotAnnotation>,
    image_width: u32,
    image_height: u32,
}

impl SpotMap {
    /// Build a map from already-ordered annotations, validating ids 1..n.
    pub fn new(spots: Vec<SpotAnnotation>, image_width: u32, image_height: u32) -> Result<Self> {
        if image_width == 0 || image_height == 0 {
            return Err(Error::Config("image dimensions must be positive".into()));
        }
        if spots.is_empty() {
            return Err(Error::Config("spot map must contain at least one spot".into()));
        }
        for (i, s) in spots.iter().enumerate() {
            let expected = (i + 1) as u32;
            if s.spot_id != expected {
                return Err(Error::Config(format!(
                    "spot ids must be 1..n in order; found id {} at position {}",
                    s.spot_id, expected
                )));
            }
        }
        Ok(Self {
            spots,
            image_width,
            image_height,
        })
    }

    pub fn spots(&self) -> &[SpotAnnotation] {
        &self.spots
    }

    pub fn len(&self) -> usize {
        self.spots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spots.is_empty()
    }

    pub fn image_width(&self) -> u32 {
        self.image_width
    }

    pub fn image_height(&self) -> u32 {
        self.image_height
    }

    pub fn get(&self, spot_id: u32) -> Option<&SpotAnnotation> {
        if spot_id == 0 {
            return None;
        }
        self.spots.get(spot_id as usize - 1)
    }

    /// Ids of spots flagged critical, ascending.
    pub fn critical_ids(&self) -> BTreeSet<u32> {
        self.spots
            .iter()
            .filter(|s| s.critical)
            .map(|s| s.spot_id)
            .collect()
    }
}

/// Parse the spot CSV, attaching group and critical metadata.
///
/// `groups` maps each spot id to its group; every parsed spot must appear in
/// exactly one group and every configured id must exist. `critical_ids` must
/// be a subset of the parsed ids.
pub fn parse_spot_annotations(
    csv_text: &str,
    image_width: u32,
    image_height: u32,
    groups: &BTreeMap<u32, String>,
    critical_ids: &BTreeSet<u32>,
) -> Result<SpotMap> {
    let (line_no, line) = csv_text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| Error::Parse {
            line: 1,
            column: 1,
            message: "spot CSV contains no annotation rows".into(),
        })?;

    let mut spots = Vec::new();
    for (box_no, field) in line.split(';').enumerate() {
        let field = field.trim();
        if field.is_empty() {
            // tolerate a trailing separator
            continue;
        }
        let column = box_no + 1;
        let tokens: Vec<&str> = field.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                column,
                message: format!("expected `class x_c y_c w h`, found {} token(s)", tokens.len()),
            });
        }
        tokens[0].parse::<i64>().map_err(|_| Error::Parse {
            line: line_no,
            column,
            message: format!("class `{}` is not an integer", tokens[0]),
        })?;
        let mut coords = [0.0f64; 4];
        for (k, tok) in tokens[1..].iter().enumerate() {
            coords[k] = tok.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                column,
                message: format!("coordinate `{tok}` is not a number"),
            })?;
        }
        let bbox = NormBox::new(coords[0], coords[1], coords[2], coords[3])?;

        let spot_id = (spots.len() + 1) as u32;
        let group_id = groups.get(&spot_id).cloned().ok_or_else(|| {
            Error::Config(format!("spot {spot_id} is not assigned to any group"))
        })?;
        spots.push(SpotAnnotation {
            spot_id,
            center_box: bbox,
            group_id,
            critical: critical_ids.contains(&spot_id),
        });
    }

    if spots.is_empty() {
        return Err(Error::Parse {
            line: line_no,
            column: 1,
            message: "annotation row contains no boxes".into(),
        });
    }

    let n = spots.len() as u32;
    for id in groups.keys() {
        if *id == 0 || *id > n {
            return Err(Error::Config(format!(
                "group config references spot {id}, but the CSV defines spots 1..{n}"
            )));
        }
    }
    for id in critical_ids {
        if *id == 0 || *id > n {
            return Err(Error::Config(format!(
                "critical spot id {id} outside 1..{n}"
            )));
        }
    }

    SpotMap::new(spots, image_width, image_height)
}

/// Serialize a spot map back to the single-row CSV form (class written as 0).
pub fn serialize_spot_annotations(map: &SpotMap) -> String {
    map.spots()
        .iter()
        .map(|s| {
            let b = s.center_box;
            format!("0 {} {} {} {}", b.x_c, b.y_c, b.w, b.h)
        })
        .collect::<Vec<_>>()
        .join(";")
}
