//! Digital-shadow entity graph for one parking lot.
//!
//! Six entity types mirror the physical deployment: `Building`,
//! `OffStreetParking`, `ParkingGroup`, `ParkingSpot`, `ParkingSensor`, and
//! `Totem`. Relationships link spots to groups, groups to the lot, the lot to
//! its building, and sensor/totem to the lot. The context broker this graph
//! stands in for does not propagate derived values on its own, so
//! [`EntityGraph::apply_status_update`] fans one sensor bitmask out to every
//! dependent entity and reports the touched properties as a [`ChangeSet`].

use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::codec::ParkingStatus;
use crate::config::LotConfig;
use crate::error::{Error, Result};

/// Default `@context` advertised in entity payloads.
pub const DEFAULT_CONTEXT_URL: &str = "https://smartdatamodels.org/context.jsonld";

/// The six modeled entity types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntityType {
    Building,
    OffStreetParking,
    ParkingGroup,
    ParkingSpot,
    ParkingSensor,
    Totem,
}

impl EntityType {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntityType::Building => "Building",
            EntityType::OffStreetParking => "OffStreetParking",
            EntityType::ParkingGroup => "ParkingGroup",
            EntityType::ParkingSpot => "ParkingSpot",
            EntityType::ParkingSensor => "ParkingSensor",
            EntityType::Totem => "Totem",
        }
    }

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Building" => EntityType::Building,
            "OffStreetParking" => EntityType::OffStreetParking,
            "ParkingGroup" => EntityType::ParkingGroup,
            "ParkingSpot" => EntityType::ParkingSpot,
            "ParkingSensor" => EntityType::ParkingSensor,
            "Totem" => EntityType::Totem,
            other => return Err(Error::Domain(format!("unknown entity type `{other}`"))),
        })
    }
}

/// A typed property value. Integer first so untagged JSON numbers without a
/// fraction decode back to `Int`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropValue {
    Int(u64),
    Num(f64),
    Text(String),
}

impl PropValue {
    pub fn as_u64(&self) -> Option<u64> {
        match self {
            PropValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            PropValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// A state-bearing property with the instant it was last observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicProperty {
    pub value: PropValue,
    pub observed_at: Option<DateTime<Utc>>,
}

impl DynamicProperty {
    fn unknown() -> Self {
        Self {
            value: PropValue::Text("unknown".into()),
            observed_at: None,
        }
    }
}

/// One graph node: identity, structural properties, live state, and links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub entity_type: EntityType,
    /// Structural properties (name, category, capacity, ...).
    pub static_props: BTreeMap<String, PropValue>,
    /// Frequently-updated state (status, counts, ...).
    pub dynamic_props: BTreeMap<String, DynamicProperty>,
    /// Relationship name -> target entity id.
    pub relationships: BTreeMap<String, String>,
    /// Instant of the last applied state change, if any.
    pub observed_at: Option<DateTime<Utc>>,
}

impl Entity {
    pub fn new(id: impl Into<String>, entity_type: EntityType) -> Self {
        Self {
            id: id.into(),
            entity_type,
            static_props: BTreeMap::new(),
            dynamic_props: BTreeMap::new(),
            relationships: BTreeMap::new(),
            observed_at: None,
        }
    }

    fn with_static(mut self, key: &str, value: PropValue) -> Self {
        self.static_props.insert(key.into(), value);
        self
    }

    fn with_dynamic_unknown(mut self, key: &str) -> Self {
        self.dynamic_props
            .insert(key.into(), DynamicProperty::unknown());
        self
    }

    fn with_relationship(mut self, name: &str, target: &str) -> Self {
        self.relationships.insert(name.into(), target.into());
        self
    }

    /// NGSI-style JSON payload with Property/Relationship wrappers; keys are
    /// emitted in sorted order so output is byte-reproducible.
    pub fn to_ngsi_json(&self, context_url: &str) -> String {
        let mut obj: BTreeMap<String, serde_json::Value> = BTreeMap::new();
        obj.insert("@context".into(), serde_json::json!(context_url));
        obj.insert("id".into(), serde_json::json!(self.id));
        obj.insert("type".into(), serde_json::json!(self.entity_type.as_str()));
        for (key, value) in &self.static_props {
            obj.insert(
                key.clone(),
                serde_json::json!({"type": "Property", "value": value}),
            );
        }
        for (key, prop) in &self.dynamic_props {
            let mut wrapped = serde_json::json!({"type": "Property", "value": prop.value});
            if let Some(at) = prop.observed_at {
                wrapped["observedAt"] = serde_json::json!(
                    at.to_rfc3339_opts(SecondsFormat::Secs, true)
                );
            }
            obj.insert(key.clone(), wrapped);
        }
        for (name, target) in &self.relationships {
            obj.insert(
                name.clone(),
                serde_json::json!({"type": "Relationship", "object": target}),
            );
        }
        serde_json::Value::Object(obj.into_iter().collect()).to_string()
    }

    /// Parse an NGSI-style payload back into an entity. Properties carrying
    /// `observedAt` become dynamic; the rest become static.
    pub fn from_ngsi_json(text: &str) -> Result<Entity> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Domain("entity payload is not a JSON object".into()))?;
        let id = obj
            .get("id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Domain("entity payload missing `id`".into()))?;
        let type_name = obj
            .get("type")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Domain("entity payload missing `type`".into()))?;
        let mut entity = Entity::new(id, EntityType::from_str(type_name)?);

        for (key, v) in obj {
            if key == "id" || key == "type" || key == "@context" {
                continue;
            }
            let wrapper = v
                .as_object()
                .ok_or_else(|| Error::Domain(format!("attribute `{key}` is not wrapped")))?;
            match wrapper.get("type").and_then(|t| t.as_str()) {
                Some("Relationship") => {
                    let target = wrapper
                        .get("object")
                        .and_then(|o| o.as_str())
                        .ok_or_else(|| {
                            Error::Domain(format!("relationship `{key}` missing object"))
                        })?;
                    entity.relationships.insert(key.clone(), target.into());
                }
                Some("Property") => {
                    let raw = wrapper
                        .get("value")
                        .ok_or_else(|| Error::Domain(format!("property `{key}` missing value")))?;
                    let prop_value: PropValue = serde_json::from_value(raw.clone())?;
                    match wrapper.get("observedAt").and_then(|o| o.as_str()) {
                        Some(at_text) => {
                            let at = DateTime::parse_from_rfc3339(at_text)
                                .map_err(|e| {
                                    Error::Domain(format!("bad observedAt on `{key}`: {e}"))
                                })?
                                .with_timezone(&Utc);
                            entity.dynamic_props.insert(
                                key.clone(),
                                DynamicProperty {
                                    value: prop_value,
                                    observed_at: Some(at),
                                },
                            );
                            entity.observed_at = Some(
                                entity.observed_at.map_or(at, |prev| prev.max(at)),
                            );
                        }
                        None => {
                            entity.static_props.insert(key.clone(), prop_value);
                        }
                    }
                }
                other => {
                    return Err(Error::Domain(format!(
                        "attribute `{key}` has unsupported wrapper type {other:?}"
                    )))
                }
            }
        }
        Ok(entity)
    }
}

/// What the totem displays after a fan-out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TotemSource {
    /// Available spots across the whole lot.
    TotalAvailable,
    /// Available spots of one group only.
    Group(String),
}

/// One recorded property mutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Change {
    pub entity_id: String,
    pub property: String,
    pub old: Option<PropValue>,
    pub new: PropValue,
    pub observed_at: DateTime<Utc>,
}

/// Ordered audit trail of one fan-out; applying it to the pre-state graph
/// reproduces the post-state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub changes: Vec<Change>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.changes.len()
    }

    /// Replay the recorded mutations onto `graph`.
    pub fn apply_to(&self, graph: &mut EntityGraph) -> Result<()> {
        for change in &self.changes {
            let entity = graph
                .entities
                .get_mut(&change.entity_id)
                .ok_or_else(|| Error::Domain(format!("unknown entity {}", change.entity_id)))?;
            entity.dynamic_props.insert(
                change.property.clone(),
                DynamicProperty {
                    value: change.new.clone(),
                    observed_at: Some(change.observed_at),
                },
            );
            entity.observed_at = Some(change.observed_at);
        }
        Ok(())
    }
}

/// The whole lot graph plus lookup tables for the fan-out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityGraph {
    entities: BTreeMap<String, Entity>,
    /// Spot id -> ParkingGroup entity id.
    group_membership: BTreeMap<u32, String>,
    /// Spot id -> ParkingSpot entity id.
    spot_entities: BTreeMap<u32, String>,
    building_id: String,
    parking_id: String,
    sensor_id: String,
    totem_id: String,
    context_url: String,
    totem_source: TotemSource,
    n_spots: usize,
}

/// Build the full graph for a lot configuration. Entity names derive from
/// `site` (e.g. `urn:ngsi-ld:ParkingSpot:ic2-003`).
pub fn build_entities(cfg: &LotConfig, site: &str) -> Result<EntityGraph> {
    cfg.validate()?;
    if site.is_empty() || site.contains(|c: char| c.is_whitespace()) {
        return Err(Error::Config(format!("invalid site label `{site}`")));
    }
    let n_spots = cfg.n_spots();

    let building_id = format!("urn:ngsi-ld:Building:{site}");
    let parking_id = format!("urn:ngsi-ld:OffStreetParking:{site}");
    let sensor_id = format!("urn:ngsi-ld:ParkingSensor:{site}");
    let totem_id = format!("urn:ngsi-ld:Totem:{site}");

    let mut entities = BTreeMap::new();

    let building = Entity::new(&building_id, EntityType::Building)
        .with_static("name", PropValue::Text(format!("{site} building")))
        .with_static("category", PropValue::Text("office".into()));
    entities.insert(building.id.clone(), building);

    let parking = Entity::new(&parking_id, EntityType::OffStreetParking)
        .with_static("name", PropValue::Text(format!("{site} parking")))
        .with_static("category", PropValue::Text("offStreetParking".into()))
        .with_static("totalSpotNumber", PropValue::Int(n_spots as u64))
        .with_dynamic_unknown("availableSpotNumber")
        .with_dynamic_unknown("occupiedSpotNumber")
        .with_dynamic_unknown("occupancy")
        .with_relationship("refBuilding", &building_id);
    entities.insert(parking.id.clone(), parking);

    let mut group_membership = BTreeMap::new();
    for (group_name, spot_ids) in &cfg.groups {
        let group_id = format!("urn:ngsi-ld:ParkingGroup:{site}-{group_name}");
        let group = Entity::new(&group_id, EntityType::ParkingGroup)
            .with_static("name", PropValue::Text(group_name.clone()))
            .with_static("totalSpotNumber", PropValue::Int(spot_ids.len() as u64))
            .with_dynamic_unknown("availableSpotNumber")
            .with_dynamic_unknown("occupiedSpotNumber")
            .with_dynamic_unknown("occupancy")
            .with_relationship("refOffStreetParking", &parking_id);
        entities.insert(group.id.clone(), group);
        for spot_id in spot_ids {
            group_membership.insert(*spot_id, group_id.clone());
        }
    }

    let mut spot_entities = BTreeMap::new();
    for spot_id in 1..=n_spots as u32 {
        let entity_id = format!("urn:ngsi-ld:ParkingSpot:{site}-{spot_id:03}");
        let group_id = group_membership
            .get(&spot_id)
            .ok_or_else(|| Error::Config(format!("spot {spot_id} has no group")))?;
        let spot = Entity::new(&entity_id, EntityType::ParkingSpot)
            .with_static("name", PropValue::Text(format!("spot {spot_id}")))
            .with_dynamic_unknown("status")
            .with_relationship("refParkingGroup", group_id);
        entities.insert(spot.id.clone(), spot);
        spot_entities.insert(spot_id, entity_id);
    }

    let sensor = Entity::new(&sensor_id, EntityType::ParkingSensor)
        .with_static("name", PropValue::Text(format!("{site} camera")))
        .with_static(
            "description",
            PropValue::Text("edge camera computing per-spot occupancy".into()),
        )
        .with_dynamic_unknown("parking_status")
        .with_relationship("refOffStreetParking", &parking_id);
    entities.insert(sensor.id.clone(), sensor);

    let totem = Entity::new(&totem_id, EntityType::Totem)
        .with_static("name", PropValue::Text(format!("{site} totem")))
        .with_dynamic_unknown("display")
        .with_relationship("refOffStreetParking", &parking_id);
    entities.insert(totem.id.clone(), totem);

    let graph = EntityGraph {
        entities,
        group_membership,
        spot_entities,
        building_id,
        parking_id,
        sensor_id,
        totem_id,
        context_url: DEFAULT_CONTEXT_URL.into(),
        totem_source: TotemSource::TotalAvailable,
        n_spots,
    };
    graph.validate()?;
    Ok(graph)
}

impl EntityGraph {
    pub fn n_spots(&self) -> usize {
        self.n_spots
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn get(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn parking_id(&self) -> &str {
        &self.parking_id
    }

    pub fn sensor_id(&self) -> &str {
        &self.sensor_id
    }

    pub fn totem_id(&self) -> &str {
        &self.totem_id
    }

    pub fn context_url(&self) -> &str {
        &self.context_url
    }

    pub fn group_membership(&self) -> &BTreeMap<u32, String> {
        &self.group_membership
    }

    pub fn spot_entity_id(&self, spot_id: u32) -> Option<&String> {
        self.spot_entities.get(&spot_id)
    }

    /// Choose what the totem mirrors; the group must exist.
    pub fn set_totem_source(&mut self, source: TotemSource) -> Result<()> {
        if let TotemSource::Group(id) = &source {
            if !self.entities.contains_key(id) {
                return Err(Error::Config(format!("unknown totem source group `{id}`")));
            }
        }
        self.totem_source = source;
        Ok(())
    }

    /// Structural invariants: resolvable relationships, spots in exactly one
    /// group, and exactly one sensor and one totem per lot.
    pub fn validate(&self) -> Result<()> {
        for entity in self.entities.values() {
            for (name, target) in &entity.relationships {
                if !self.entities.contains_key(target) {
                    return Err(Error::Config(format!(
                        "{}: relationship `{name}` targets missing entity {target}",
                        entity.id
                    )));
                }
            }
        }
        let mut sensors = 0;
        let mut totems = 0;
        for entity in self.entities.values() {
            match entity.entity_type {
                EntityType::ParkingSensor | EntityType::Totem => {
                    let references_lot = entity
                        .relationships
                        .get("refOffStreetParking")
                        .is_some_and(|t| t == &self.parking_id);
                    if !references_lot {
                        return Err(Error::Config(format!(
                            "{} must reference the lot entity",
                            entity.id
                        )));
                    }
                    if entity.entity_type == EntityType::ParkingSensor {
                        sensors += 1;
                    } else {
                        totems += 1;
                    }
                }
                EntityType::ParkingSpot => {
                    let group = entity.relationships.get("refParkingGroup");
                    let valid = group.is_some_and(|g| {
                        self.entities
                            .get(g)
                            .is_some_and(|e| e.entity_type == EntityType::ParkingGroup)
                    });
                    if !valid {
                        return Err(Error::Config(format!(
                            "{} must reference exactly one parking group",
                            entity.id
                        )));
                    }
                }
                EntityType::ParkingGroup => {
                    if entity.relationships.get("refOffStreetParking") != Some(&self.parking_id) {
                        return Err(Error::Config(format!(
                            "{} must reference the lot entity",
                            entity.id
                        )));
                    }
                }
                EntityType::OffStreetParking => {
                    if entity.relationships.get("refBuilding") != Some(&self.building_id) {
                        return Err(Error::Config(format!(
                            "{} must reference the building",
                            entity.id
                        )));
                    }
                }
                EntityType::Building => {}
            }
        }
        if sensors != 1 || totems != 1 {
            return Err(Error::Config(format!(
                "expected exactly one sensor and one totem, found {sensors} and {totems}"
            )));
        }
        if self.spot_entities.len() != self.n_spots {
            return Err(Error::Config(format!(
                "graph tracks {} spots, expected {}",
                self.spot_entities.len(),
                self.n_spots
            )));
        }
        Ok(())
    }

    fn set_dynamic(
        &mut self,
        entity_id: &str,
        property: &str,
        new: PropValue,
        observed_at: DateTime<Utc>,
        changes: &mut Vec<Change>,
    ) {
        let entity = self
            .entities
            .get_mut(entity_id)
            .expect("entity ids come from the graph's own tables");
        let old = entity.dynamic_props.get(property).map(|p| p.value.clone());
        if old.as_ref() == Some(&new) {
            return;
        }
        entity.dynamic_props.insert(
            property.into(),
            DynamicProperty {
                value: new.clone(),
                observed_at: Some(observed_at),
            },
        );
        entity.observed_at = Some(observed_at);
        changes.push(Change {
            entity_id: entity_id.into(),
            property: property.into(),
            old,
            new,
            observed_at,
        });
    }

    /// Fan one decoded sensor update out to every dependent entity.
    ///
    /// Touches, in order: each spot's `status`, each group's counts, the lot
    /// totals, the sensor's raw `parking_status`, and the totem display. Only
    /// properties whose value actually changes are written and recorded, so
    /// re-applying the same status yields an empty change set.
    pub fn apply_status_update(&mut self, status: &ParkingStatus) -> Result<ChangeSet> {
        if status.n_spots() != self.n_spots {
            return Err(Error::Range(format!(
                "status has {} spots, graph has {}",
                status.n_spots(),
                self.n_spots
            )));
        }
        let ts = status.timestamp();
        let bits = status.bits().to_vec();
        let mut changes = Vec::new();

        let spot_ids: Vec<(u32, String)> = self
            .spot_entities
            .iter()
            .map(|(id, eid)| (*id, eid.clone()))
            .collect();
        for (spot_id, entity_id) in &spot_ids {
            let text = if bits[*spot_id as usize - 1] {
                "occupied"
            } else {
                "free"
            };
            self.set_dynamic(
                entity_id,
                "status",
                PropValue::Text(text.into()),
                ts,
                &mut changes,
            );
        }

        // group totals, in ascending group-entity-id order
        let mut group_sizes: BTreeMap<String, u64> = BTreeMap::new();
        let mut group_occupied: BTreeMap<String, u64> = BTreeMap::new();
        for (spot_id, group_id) in &self.group_membership {
            *group_sizes.entry(group_id.clone()).or_default() += 1;
            if bits[*spot_id as usize - 1] {
                *group_occupied.entry(group_id.clone()).or_default() += 1;
            }
        }
        let mut group_available: BTreeMap<String, u64> = BTreeMap::new();
        for (group_id, size) in &group_sizes {
            let occupied = group_occupied.get(group_id).copied().unwrap_or(0);
            let available = size - occupied;
            group_available.insert(group_id.clone(), available);
            let occupancy = occupied as f64 / *size as f64;
            self.set_dynamic(
                &group_id.clone(),
                "availableSpotNumber",
                PropValue::Int(available),
                ts,
                &mut changes,
            );
            self.set_dynamic(
                &group_id.clone(),
                "occupiedSpotNumber",
                PropValue::Int(occupied),
                ts,
                &mut changes,
            );
            self.set_dynamic(
                &group_id.clone(),
                "occupancy",
                PropValue::Num(occupancy),
                ts,
                &mut changes,
            );
        }

        let occupied_total = bits.iter().filter(|&&b| b).count() as u64;
        let available_total = self.n_spots as u64 - occupied_total;
        let parking_id = self.parking_id.clone();
        self.set_dynamic(
            &parking_id,
            "availableSpotNumber",
            PropValue::Int(available_total),
            ts,
            &mut changes,
        );
        self.set_dynamic(
            &parking_id,
            "occupiedSpotNumber",
            PropValue::Int(occupied_total),
            ts,
            &mut changes,
        );
        self.set_dynamic(
            &parking_id,
            "occupancy",
            PropValue::Num(occupied_total as f64 / self.n_spots as f64),
            ts,
            &mut changes,
        );

        let sensor_id = self.sensor_id.clone();
        self.set_dynamic(
            &sensor_id,
            "parking_status",
            PropValue::Int(status.bitmask()),
            ts,
            &mut changes,
        );

        let display = match &self.totem_source {
            TotemSource::TotalAvailable => available_total,
            TotemSource::Group(group_id) => group_available.get(group_id).copied().ok_or_else(
                || Error::Config(format!("totem source group `{group_id}` not in graph")),
            )?,
        };
        let totem_id = self.totem_id.clone();
        self.set_dynamic(
            &totem_id,
            "display",
            PropValue::Int(display),
            ts,
            &mut changes,
        );

        Ok(ChangeSet { changes })
    }

    /// Current integer value of a dynamic property, if set.
    pub fn dynamic_u64(&self, entity_id: &str, property: &str) -> Option<u64> {
        self.entities
            .get(entity_id)?
            .dynamic_props
            .get(property)?
            .value
            .as_u64()
    }

    /// Serialize every entity as NGSI JSON, ascending by entity id.
    pub fn serialize_all(&self) -> Vec<(String, String)> {
        self.entities
            .values()
            .map(|e| (e.id.clone(), e.to_ngsi_json(&self.context_url)))
            .collect()
    }

    /// Graph snapshot persistence.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let graph: EntityGraph = serde_json::from_str(text)?;
        graph.validate()?;
        Ok(graph)
    }
}
